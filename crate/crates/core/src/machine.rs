//! The machine's view of the interaction.
//!
//! The machine picks `a^M ∈ A ∪ {defer}` (defer has index `A`). The human
//! then acts according to the adherence law, and the environment moves
//! according to the human's action. Marginalizing the human's response gives
//! an ordinary tabular MDP over machine actions.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelBuilder};
use crate::model::{check_compatible, AdherenceModel, HumanPolicy, TabularMdp};

/// Distribution of the human's action given the state, step and the
/// machine's action (`a_m == A` means defer).
///
/// * defer: the human's own row `π^H_h(· | s)`;
/// * advise `a_m`: `θ(s, a_m)` on `a_m`, and the remaining `1 − θ` spread
///   over the other actions proportionally to `π^H`.
///
/// When `π^H_h(a_m | s) = 1` there is no alternative action to spread over,
/// and the human takes `a_m` with probability one.
pub fn human_action_distribution(
    s: usize,
    h: usize,
    a_m: usize,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
) -> Vec<f64> {
    let mut out = vec![0.0; pi.num_actions()];
    human_action_distribution_into(s, h, a_m, pi, theta, &mut out);
    out
}

pub(crate) fn human_action_distribution_into(
    s: usize,
    h: usize,
    a_m: usize,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
    out: &mut [f64],
) {
    let row = pi.row(h, s);
    let num_actions = row.len();
    if a_m >= num_actions {
        out.copy_from_slice(row);
        return;
    }
    // mass of the non-advised actions
    let others: f64 = row
        .iter()
        .enumerate()
        .filter(|&(a, _)| a != a_m)
        .map(|(_, p)| p)
        .sum();
    if others <= 0.0 {
        out.fill(0.0);
        out[a_m] = 1.0;
        return;
    }
    let adhere = theta.get(s, a_m);
    for (a, (o, &p)) in out.iter_mut().zip(row).enumerate() {
        *o = if a == a_m {
            adhere
        } else {
            (1.0 - adhere) * p / others
        };
    }
}

/// Tabular MDP over machine actions `0..=A`, index `A` being defer.
///
/// Rewards are not restricted to `[0, 1]`: penalized variants carry
/// negative rewards on advising actions.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineMdp {
    num_actions: usize,
    kernel: Arc<Kernel>,
    reward: Vec<f64>,
    initial_state: usize,
}

impl MachineMdp {
    /// `kernel` must have `num_actions + 1` actions.
    pub fn new(
        num_actions: usize,
        kernel: Arc<Kernel>,
        reward: Vec<f64>,
        initial_state: usize,
    ) -> Result<Self> {
        if kernel.num_actions() != num_actions + 1 {
            return Err(Error::dimension(
                "machine actions",
                num_actions + 1,
                kernel.num_actions(),
            ));
        }
        let n = kernel.horizon() * kernel.num_states() * kernel.num_actions();
        if reward.len() != n {
            return Err(Error::dimension("machine reward table", n, reward.len()));
        }
        if initial_state >= kernel.num_states() {
            return Err(Error::invalid(
                "initial state",
                initial_state.to_string(),
                "out of range",
            ));
        }
        kernel.validate()?;
        Ok(MachineMdp {
            num_actions,
            kernel,
            reward,
            initial_state,
        })
    }

    pub fn num_states(&self) -> usize {
        self.kernel.num_states()
    }

    /// Number of advisable (human) actions `A`.
    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// `A + 1`.
    pub fn num_machine_actions(&self) -> usize {
        self.num_actions + 1
    }

    pub fn defer(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.kernel.horizon()
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn shared_kernel(&self) -> Arc<Kernel> {
        Arc::clone(&self.kernel)
    }

    #[inline]
    pub fn reward(&self, h: usize, s: usize, a_m: usize) -> f64 {
        self.reward[(h * self.num_states() + s) * self.num_machine_actions() + a_m]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    /// Same kernel, new reward table.
    pub fn with_rewards(&self, reward: Vec<f64>) -> Result<Self> {
        if reward.len() != self.reward.len() {
            return Err(Error::dimension(
                "machine reward table",
                self.reward.len(),
                reward.len(),
            ));
        }
        Ok(MachineMdp {
            num_actions: self.num_actions,
            kernel: Arc::clone(&self.kernel),
            reward,
            initial_state: self.initial_state,
        })
    }
}

/// Marginalizes the human's response out of the environment:
/// `p^M_h(s'|s,a^M) = Σ_a p_h(s'|s,a) P_h(a|s,a^M)` and likewise for rewards.
pub fn build_machine_mdp(
    mdp: &TabularMdp,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
) -> Result<MachineMdp> {
    check_compatible(mdp, pi, theta)?;
    let (horizon, num_states, num_actions) = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let kernel = mdp.kernel();
    // a stationary environment under a stationary human stays stationary
    let stationary = kernel.is_stationary() && pi.is_stationary();
    let mut builder = if stationary {
        KernelBuilder::stationary(horizon, num_states, num_actions + 1)
    } else {
        KernelBuilder::new(horizon, num_states, num_actions + 1)
    };
    let mut reward = Vec::with_capacity(horizon * num_states * (num_actions + 1));
    let mut dist = vec![0.0; num_actions];
    let mut entries: Vec<(usize, f64)> = Vec::new();

    for h in 0..horizon {
        let push_rows = !stationary || h == 0;
        for s in 0..num_states {
            for a_m in 0..=num_actions {
                human_action_distribution_into(s, h, a_m, pi, theta, &mut dist);
                entries.clear();
                let mut r = 0.0;
                for (a, &w) in dist.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    r += w * mdp.reward(h, s, a);
                    if !push_rows {
                        continue;
                    }
                    match kernel.row(h, s, a) {
                        crate::kernel::Row::Sparse { targets, probs } => {
                            entries.extend(targets.iter().zip(probs).map(|(&t, &p)| (t, w * p)));
                        }
                        crate::kernel::Row::Uniform { num_states } => {
                            entries.extend((0..num_states).map(|t| (t, w / num_states as f64)));
                        }
                    }
                }
                if push_rows {
                    builder.push_row(entries.iter().copied())?;
                }
                reward.push(r);
            }
        }
    }
    MachineMdp::new(
        num_actions,
        Arc::new(builder.finish()?),
        reward,
        mdp.initial_state(),
    )
}
