//! Pertinent advice: planning under a per-advice penalty β, and under an
//! expected advice budget `D`.
//!
//! The budgeted problem is solved through its Lagrangian. For a single linear
//! constraint the penalty β acts as the dual variable: bisection on β finds
//! two penalized optima whose advice counts straddle `D`, and mixing them at
//! episode start meets the budget with equality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::MachineMdp;
use crate::planning::{backward_induction, expected_advice_count, policy_evaluation};
use crate::policy::{DeterministicPolicy, MixturePolicy, QTable, ValueTable};

/// Tolerance for value comparisons.
pub const VALUE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub beta: f64,
}

impl PenaltyConfig {
    pub fn new(beta: f64, horizon: usize) -> Result<Self> {
        if !(beta >= 0.0 && beta < horizon as f64) {
            return Err(Error::config(
                "beta",
                format!("{beta} outside [0, {horizon})"),
            ));
        }
        Ok(PenaltyConfig { beta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetConfig {
    /// Expected advice budget `D`.
    pub budget: f64,
    pub tol_beta: f64,
    pub max_iterations: usize,
}

impl BudgetConfig {
    pub fn new(budget: f64, horizon: usize) -> Result<Self> {
        let cfg = BudgetConfig {
            budget,
            tol_beta: 1e-6,
            max_iterations: 80,
        };
        cfg.validate(horizon)?;
        Ok(cfg)
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if !(self.budget > 0.0 && self.budget < horizon as f64) {
            return Err(Error::config(
                "budget",
                format!("{} outside (0, {horizon})", self.budget),
            ));
        }
        if self.tol_beta.is_nan() || self.tol_beta <= 0.0 {
            return Err(Error::config("tol_beta", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations", "must be at least 1"));
        }
        Ok(())
    }
}

/// `r^M_β(s, a) = r^M(s, a) − β·1{a ≠ defer}`; transitions are shared.
pub fn penalized_machine_mdp(m: &MachineMdp, cfg: PenaltyConfig) -> MachineMdp {
    penalize(m, cfg.beta)
}

fn penalize(m: &MachineMdp, beta: f64) -> MachineMdp {
    if beta == 0.0 {
        return m.clone();
    }
    let num_m = m.num_machine_actions();
    let defer = m.defer();
    let reward = m
        .rewards()
        .iter()
        .enumerate()
        .map(|(i, &r)| if i % num_m == defer { r } else { r - beta })
        .collect();
    m.with_rewards(reward)
        .expect("reward table has unchanged length")
}

/// An optimal policy of the penalized problem, with its unpenalized statistics.
#[derive(Debug, Clone)]
pub struct PenalizedSolution {
    pub beta: f64,
    pub policy: DeterministicPolicy,
    /// `V*_β(s1)`.
    pub penalized_value: f64,
    /// `V^π(s1)` on the unpenalized rewards.
    pub value: f64,
    /// Expected number of advised steps from `s1`.
    pub advice_count: f64,
}

pub fn solve_penalized(m: &MachineMdp, cfg: PenaltyConfig) -> PenalizedSolution {
    solve_at(m, cfg.beta)
}

fn solve_at(m: &MachineMdp, beta: f64) -> PenalizedSolution {
    let plan = backward_induction(&penalize(m, beta));
    let s1 = m.initial_state();
    let advice_count =
        expected_advice_count(m, &plan.policy).expect("planned policy matches the MDP");
    // V_β = V − β·count on the same kernel
    let value = plan.v.get(0, s1) + beta * advice_count;
    PenalizedSolution {
        beta,
        penalized_value: plan.v.get(0, s1),
        value,
        advice_count,
        policy: plan.policy,
    }
}

/// A step where a β-optimal policy advises with a gap below β.
#[derive(Debug, Clone, PartialEq)]
pub struct GapViolation {
    pub h: usize,
    pub s: usize,
    pub action: usize,
    /// `Q*_h(s, a) − V^{π^H}_h(s)`.
    pub gap: f64,
}

/// Checks `Q*_h(s, π_β(h, s)) − V^{π^H}_h(s) ≥ β` wherever `π_β` advises.
///
/// `human_value` must be the evaluation of the always-defer policy on `m`,
/// and `Q*` is computed here on the unpenalized `m`.
pub fn criticalness_gap_check(
    m: &MachineMdp,
    human_value: &ValueTable,
    pol_beta: &DeterministicPolicy,
    beta: f64,
) -> Result<Vec<GapViolation>> {
    if human_value.horizon() != m.horizon() || human_value.num_states() != m.num_states() {
        return Err(Error::dimension(
            "human value table (H, S)",
            format!("{:?}", (m.horizon(), m.num_states())),
            format!("{:?}", (human_value.horizon(), human_value.num_states())),
        ));
    }
    if pol_beta.horizon() != m.horizon()
        || pol_beta.num_states() != m.num_states()
        || pol_beta.num_actions() != m.num_actions()
    {
        return Err(Error::dimension(
            "policy (H, S, A)",
            format!("{:?}", (m.horizon(), m.num_states(), m.num_actions())),
            format!(
                "{:?}",
                (
                    pol_beta.horizon(),
                    pol_beta.num_states(),
                    pol_beta.num_actions()
                )
            ),
        ));
    }
    let q: QTable = backward_induction(m).q;
    let mut violations = Vec::new();
    for h in 0..m.horizon() {
        for s in 0..m.num_states() {
            if !pol_beta.advises(h, s) {
                continue;
            }
            let action = pol_beta.action(h, s);
            let gap = q.get(h, s, action) - human_value.get(h, s);
            if gap < beta - VALUE_TOL {
                violations.push(GapViolation { h, s, action, gap });
            }
        }
    }
    Ok(violations)
}

/// The human's unassisted value table.
pub fn human_value(m: &MachineMdp) -> ValueTable {
    let defer = DeterministicPolicy::always_defer(m.horizon(), m.num_states(), m.num_actions());
    policy_evaluation(m, &defer).expect("always-defer matches the MDP")
}

#[derive(Debug, Clone)]
pub struct BetaSweepResult {
    pub entries: Vec<PenalizedSolution>,
}

/// One penalized solve per β, in input order. `betas` must be ascending and in `[0, H)`.
pub fn beta_sweep(m: &MachineMdp, betas: &[f64]) -> Result<BetaSweepResult> {
    for &b in betas {
        PenaltyConfig::new(b, m.horizon())?;
    }
    if betas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::config("betas", "must be sorted ascending"));
    }
    let entries = std::thread::scope(|scope| {
        let handles: Vec<_> = betas
            .iter()
            .map(|&b| scope.spawn(move || solve_at(m, b)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    Ok(BetaSweepResult { entries })
}

/// Solution of the advice-budget problem.
#[derive(Debug, Clone)]
pub struct CmdpSolution {
    pub policy: MixturePolicy,
    /// Unpenalized value of the mixture at `s1`.
    pub value: f64,
    pub advice_count: f64,
    /// Final dual bracket; `lo == hi == 0` when the budget is inactive.
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub iterations: usize,
}

pub fn solve_cmdp_dual(m: &MachineMdp, cfg: &BudgetConfig) -> Result<CmdpSolution> {
    cfg.validate(m.horizon())?;
    let d = cfg.budget;
    let unconstrained = solve_at(m, 0.0);
    if unconstrained.advice_count <= d {
        return Ok(CmdpSolution {
            value: unconstrained.value,
            advice_count: unconstrained.advice_count,
            policy: MixturePolicy::pure(unconstrained.policy),
            beta_lo: 0.0,
            beta_hi: 0.0,
            iterations: 0,
        });
    }

    let mut lo = unconstrained;
    let mut hi = solve_at(m, m.horizon() as f64);
    if hi.advice_count > d {
        return Err(Error::NonConvergence {
            iterations: 0,
            lo: 0.0,
            hi: hi.beta,
        });
    }
    let mut iterations = 0;
    while hi.beta - lo.beta > cfg.tol_beta {
        if iterations == cfg.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                lo: lo.beta,
                hi: hi.beta,
            });
        }
        iterations += 1;
        let mid = solve_at(m, 0.5 * (lo.beta + hi.beta));
        if mid.advice_count > d {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // lo.count > D ≥ hi.count: weight q on `lo` so the mixed count is D
    let q = ((d - hi.advice_count) / (lo.advice_count - hi.advice_count)).clamp(0.0, 1.0);
    let value = q * lo.value + (1.0 - q) * hi.value;
    let advice_count = q * lo.advice_count + (1.0 - q) * hi.advice_count;
    Ok(CmdpSolution {
        policy: MixturePolicy::new(lo.policy, hi.policy, q)?,
        value,
        advice_count,
        beta_lo: lo.beta,
        beta_hi: hi.beta,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::kernel::KernelBuilder;

    /// Single state, one advisable action worth `gain` more than deferring.
    fn single_state(horizon: usize, advise_reward: f64, defer_reward: f64) -> MachineMdp {
        let mut b = KernelBuilder::new(horizon, 1, 2);
        for _ in 0..2 * horizon {
            b.push_dense(&[1.0]).unwrap();
        }
        let reward = (0..horizon)
            .flat_map(|_| [advise_reward, defer_reward])
            .collect();
        MachineMdp::new(1, Arc::new(b.finish().unwrap()), reward, 0).unwrap()
    }

    #[test]
    fn zero_penalty_is_identity() {
        let m = single_state(3, 0.8, 0.2);
        assert_eq!(
            penalized_machine_mdp(&m, PenaltyConfig::new(0.0, 3).unwrap()),
            m
        );
    }

    #[test]
    fn penalty_shifts_only_advising_rewards() {
        let m = single_state(2, 0.8, 0.2);
        let p = penalized_machine_mdp(&m, PenaltyConfig::new(0.3, 2).unwrap());
        for h in 0..2 {
            assert!((p.reward(h, 0, 0) - 0.5).abs() < 1e-15);
            assert_eq!(p.reward(h, 0, 1), 0.2);
        }
    }

    #[test]
    fn penalty_config_range() {
        assert!(PenaltyConfig::new(-0.1, 3).is_err());
        assert!(PenaltyConfig::new(3.0, 3).is_err());
        assert!(PenaltyConfig::new(2.9, 3).is_ok());
    }

    #[test]
    fn large_penalty_defers_everywhere() {
        let m = single_state(4, 1.0, 0.0);
        let sol = solve_penalized(&m, PenaltyConfig::new(4.0 - 1e-6, 4).unwrap());
        assert_eq!(sol.advice_count, 0.0);
        assert_eq!(sol.policy.num_advised_cells(), 0);
    }

    #[test]
    fn gap_check_flags_wrong_policy() {
        let m = single_state(2, 0.3, 0.2);
        let hv = human_value(&m);
        let always_advise = DeterministicPolicy::constant(2, 1, 1, 0).unwrap();
        // gap is 0.1 at h=1 and 0.2 at h=0; β = 0.15 flags only h=1
        let v = criticalness_gap_check(&m, &hv, &always_advise, 0.15).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].h, v[0].s, v[0].action), (1, 0, 0));
        let defer = DeterministicPolicy::always_defer(2, 1, 1);
        assert!(criticalness_gap_check(&m, &hv, &defer, 0.15)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn sweep_rejects_unsorted() {
        let m = single_state(2, 0.3, 0.2);
        assert!(beta_sweep(&m, &[0.2, 0.1]).is_err());
        assert!(beta_sweep(&m, &[0.0, 2.0]).is_err());
        let r = beta_sweep(&m, &[0.0]).unwrap();
        assert_eq!(r.entries[0].policy, backward_induction(&m).policy);
    }

    #[test]
    fn inactive_budget_returns_unconstrained_optimum() {
        let m = single_state(3, 0.1, 0.9);
        let sol = solve_cmdp_dual(&m, &BudgetConfig::new(1.0, 3).unwrap()).unwrap();
        assert_eq!(sol.policy.q(), 1.0);
        assert_eq!(sol.advice_count, 0.0);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn binding_budget_mixes_to_equality() {
        let m = single_state(3, 0.9, 0.1);
        let sol = solve_cmdp_dual(&m, &BudgetConfig::new(2.99, 3).unwrap()).unwrap();
        assert!((sol.advice_count - 2.99).abs() < 1e-9);
        assert!((sol.value - (2.99 * 0.9 + 0.01 * 0.1)).abs() < 1e-9);

        let sol = solve_cmdp_dual(&m, &BudgetConfig::new(1.5, 3).unwrap()).unwrap();
        assert!(
            (sol.advice_count - 1.5).abs() < 1e-9,
            "{}",
            sol.advice_count
        );
        // each advised step is worth 0.8 extra
        assert!((sol.value - (0.3 + 1.5 * 0.8)).abs() < 1e-9);
        assert!(sol.beta_hi - sol.beta_lo <= 1e-6);
    }

    #[test]
    fn budget_config_validation() {
        assert!(BudgetConfig::new(0.0, 3).is_err());
        assert!(BudgetConfig::new(3.0, 3).is_err());
        let m = single_state(3, 0.9, 0.1);
        let cfg = BudgetConfig {
            budget: 1.5,
            tol_beta: 1e-12,
            max_iterations: 3,
        };
        match solve_cmdp_dual(&m, &cfg) {
            Err(Error::NonConvergence { iterations, lo, hi }) => {
                assert_eq!(iterations, 3);
                assert!(lo < hi);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
