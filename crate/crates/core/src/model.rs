//! The human's episodic MDP, the human's fixed policy, and the adherence model.
//!
//! Steps are 0-based internally: `h ∈ 0..H`, with value tables carrying an
//! extra terminal layer at index `H`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, ROW_SUM_TOL};

/// Episodic, time-inhomogeneous tabular MDP faced by the human.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    kernel: Arc<Kernel>,
    reward: Vec<f64>,
    initial_state: usize,
}

impl TabularMdp {
    /// Validates row-stochasticity, rewards in `[0, 1]`, and `s1 < S`.
    pub fn new(kernel: Kernel, reward: Vec<f64>, initial_state: usize) -> Result<Self> {
        kernel.validate()?;
        let (h, s, a) = (kernel.horizon(), kernel.num_states(), kernel.num_actions());
        if h == 0 || s == 0 || a == 0 {
            return Err(Error::invalid(
                "mdp dimensions",
                format!("(H={h}, S={s}, A={a})"),
                "must be positive",
            ));
        }
        if reward.len() != h * s * a {
            return Err(Error::dimension("reward table", h * s * a, reward.len()));
        }
        if let Some(i) = reward.iter().position(|r| !(0.0..=1.0).contains(r)) {
            let (hh, ss, aa) = (i / (s * a), (i / a) % s, i % a);
            return Err(Error::invalid(
                "reward",
                format!("(h={hh}, s={ss}, a={aa})"),
                format!("{} outside [0, 1]", reward[i]),
            ));
        }
        if initial_state >= s {
            return Err(Error::invalid(
                "initial state",
                initial_state.to_string(),
                format!("must be < S={s}"),
            ));
        }
        Ok(TabularMdp {
            kernel: Arc::new(kernel),
            reward,
            initial_state,
        })
    }

    pub fn num_states(&self) -> usize {
        self.kernel.num_states()
    }

    pub fn num_actions(&self) -> usize {
        self.kernel.num_actions()
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

    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.reward[(h * self.num_states() + s) * self.num_actions() + a]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }
}

/// Time-dependent stochastic human policy `π^H_h(a | s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanPolicy {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl HumanPolicy {
    pub fn new(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        if probs.len() != horizon * num_states * num_actions {
            return Err(Error::dimension(
                "human policy",
                horizon * num_states * num_actions,
                probs.len(),
            ));
        }
        for (i, row) in probs.chunks(num_actions).enumerate() {
            let (h, s) = (i / num_states, i % num_states);
            if let Some(a) = row.iter().position(|p| p.is_nan() || *p < 0.0) {
                return Err(Error::invalid(
                    "human policy",
                    format!("(h={h}, s={s}, a={a})"),
                    format!("negative or non-finite entry {}", row[a]),
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::invalid(
                    "human policy",
                    format!("(h={h}, s={s})"),
                    format!("row sums to {sum}"),
                ));
            }
        }
        Ok(HumanPolicy {
            horizon,
            num_states,
            num_actions,
            probs,
        })
    }

    /// Builds a policy row by row from `f(h, s) -> Vec<f64>`.
    pub fn from_fn(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        mut f: impl FnMut(usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        let mut probs = Vec::with_capacity(horizon * num_states * num_actions);
        for h in 0..horizon {
            for s in 0..num_states {
                let row = f(h, s);
                if row.len() != num_actions {
                    return Err(Error::dimension("human policy row", num_actions, row.len()));
                }
                probs.extend(row);
            }
        }
        Self::new(horizon, num_states, num_actions, probs)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn row(&self, h: usize, s: usize) -> &[f64] {
        let i = (h * self.num_states + s) * self.num_actions;
        &self.probs[i..i + self.num_actions]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// True when every step uses the same rows.
    pub fn is_stationary(&self) -> bool {
        let layer = self.num_states * self.num_actions;
        self.probs.chunks(layer).all(|c| c == &self.probs[..layer])
    }
}

/// Stationary adherence level `θ(s, a) ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdherenceModel {
    num_states: usize,
    num_actions: usize,
    theta: Vec<f64>,
}

impl AdherenceModel {
    pub fn new(num_states: usize, num_actions: usize, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != num_states * num_actions {
            return Err(Error::dimension(
                "adherence table",
                num_states * num_actions,
                theta.len(),
            ));
        }
        if let Some(i) = theta.iter().position(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::invalid(
                "adherence",
                format!("(s={}, a={})", i / num_actions, i % num_actions),
                format!("{} outside [0, 1]", theta[i]),
            ));
        }
        Ok(AdherenceModel {
            num_states,
            num_actions,
            theta,
        })
    }

    pub fn constant(num_states: usize, num_actions: usize, value: f64) -> Result<Self> {
        Self::new(
            num_states,
            num_actions,
            vec![value; num_states * num_actions],
        )
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.theta[s * self.num_actions + a]
    }

    pub fn values(&self) -> &[f64] {
        &self.theta
    }

    /// Pairs `(h, s, a)` where `θ(s, a) < π^H_h(a | s)`, i.e. advice lowers
    /// the probability of the advised action. Allowed, but the monotonicity
    /// of the optimal value in `θ` is only guaranteed without such pairs.
    pub fn below_human_policy(&self, pi: &HumanPolicy) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for h in 0..pi.horizon() {
            for s in 0..self.num_states {
                for (a, &p) in pi.row(h, s).iter().enumerate() {
                    if self.get(s, a) < p {
                        out.push((h, s, a));
                    }
                }
            }
        }
        out
    }
}

/// Checks that the three components of an instance agree on `S`, `A`, `H`.
pub fn check_compatible(mdp: &TabularMdp, pi: &HumanPolicy, theta: &AdherenceModel) -> Result<()> {
    let dims = (mdp.horizon(), mdp.num_states(), mdp.num_actions());
    if (pi.horizon(), pi.num_states(), pi.num_actions()) != dims {
        return Err(Error::dimension(
            "human policy (H, S, A)",
            format!("{dims:?}"),
            format!("{:?}", (pi.horizon(), pi.num_states(), pi.num_actions())),
        ));
    }
    if (theta.num_states(), theta.num_actions()) != (dims.1, dims.2) {
        return Err(Error::dimension(
            "adherence (S, A)",
            format!("{:?}", (dims.1, dims.2)),
            format!("{:?}", (theta.num_states(), theta.num_actions())),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelBuilder;

    fn two_state_kernel() -> Kernel {
        let mut b = KernelBuilder::new(1, 2, 1);
        b.push_dense(&[1.0, 0.0]).unwrap();
        b.push_dense(&[0.0, 1.0]).unwrap();
        b.finish().unwrap()
    }

    #[test]
    fn rejects_reward_out_of_range() {
        let err = TabularMdp::new(two_state_kernel(), vec![0.5, 1.5], 0)
            .unwrap_err()
            .to_string();
        assert!(err.contains("(h=0, s=1, a=0)"), "{err}");
    }

    #[test]
    fn rejects_initial_state_out_of_range() {
        assert!(TabularMdp::new(two_state_kernel(), vec![0.0, 0.0], 2).is_err());
    }

    #[test]
    fn human_policy_rows_must_sum_to_one() {
        assert!(HumanPolicy::new(1, 1, 2, vec![0.5, 0.5]).is_ok());
        let err = HumanPolicy::new(1, 1, 2, vec![0.5, 0.6])
            .unwrap_err()
            .to_string();
        assert!(err.contains("sums to"), "{err}");
        assert!(HumanPolicy::new(1, 1, 2, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn adherence_range_and_violations() {
        assert!(AdherenceModel::new(1, 2, vec![0.2, 1.1]).is_err());
        let theta = AdherenceModel::new(1, 2, vec![0.2, 0.9]).unwrap();
        let pi = HumanPolicy::new(2, 1, 2, vec![0.5, 0.5, 0.1, 0.9]).unwrap();
        assert_eq!(theta.below_human_policy(&pi), vec![(0, 0, 0)]);
    }
}
