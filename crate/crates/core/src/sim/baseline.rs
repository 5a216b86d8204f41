//! Generic optimistic value iteration that treats the machine MDP as a fully
//! unknown non-stationary tabular MDP.
//!
//! The bonus is Hoeffding-style, `c·H·√(log(S·Ā·H·T/δ)/n)`. It is a plain
//! comparison point and not any published algorithm's bonus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::build_machine_mdp;
use crate::model::{check_compatible, AdherenceModel, HumanPolicy, TabularMdp};
use crate::planning::{argmax, backward_induction, expected_advice_count, policy_evaluation};
use crate::policy::{DeterministicPolicy, QTable};
use crate::rfe::EmpiricalModel;
use crate::sim::metrics::{MetricsLog, Recorder};
use crate::sim::rng::episode_rng;
use crate::sim::rollout::rollout_episode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub delta: f64,
    pub episodes: u64,
    /// `c` in the bonus.
    pub bonus_scale: f64,
    pub replan_every: u64,
    pub log_every: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            delta: 0.1,
            episodes: 1000,
            bonus_scale: 1.0,
            replan_every: 1,
            log_every: 1,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(
                "delta",
                format!("{} outside (0, 1)", self.delta),
            ));
        }
        if self.episodes == 0 {
            return Err(Error::config("episodes", "must be at least 1"));
        }
        if self.bonus_scale.is_nan() || self.bonus_scale <= 0.0 {
            return Err(Error::config("bonus_scale", "must be positive"));
        }
        if self.replan_every == 0 || self.log_every == 0 {
            return Err(Error::config("replan_every", "cadences must be at least 1"));
        }
        Ok(())
    }
}

/// Optimistic `Q`, clipped at the remaining horizon `H − h`; unvisited pairs get `H`.
pub fn optimistic_q(emp: &EmpiricalModel, cfg: &BaselineConfig) -> QTable {
    let (horizon, num_states, num_m) = (emp.horizon(), emp.num_states(), emp.num_actions() + 1);
    let hf = horizon as f64;
    let log_term = (num_states as f64 * num_m as f64 * hf * cfg.episodes as f64 / cfg.delta).ln();
    let m = emp.machine_mdp().expect("empirical rows are normalized");
    let kernel = m.kernel();
    let mut q = QTable::zeros(horizon, num_states, num_m);
    let mut next = vec![0.0; num_states];
    for h in (0..horizon).rev() {
        let remaining = (horizon - h) as f64;
        for (s, v) in next.iter_mut().enumerate() {
            *v = if h + 1 == horizon {
                0.0
            } else {
                q.row(h + 1, s)
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max)
            };
        }
        for s in 0..num_states {
            let row = q.row_mut(h, s);
            for (a, qa) in row.iter_mut().enumerate() {
                let n = emp.count(h, s, a);
                *qa = if n == 0 {
                    hf
                } else {
                    let bonus = cfg.bonus_scale * hf * (log_term / n as f64).sqrt();
                    (m.reward(h, s, a) + kernel.row(h, s, a).expect(&next) + bonus).min(remaining)
                };
            }
        }
    }
    q
}

pub fn optimistic_policy(emp: &EmpiricalModel, cfg: &BaselineConfig) -> DeterministicPolicy {
    let q = optimistic_q(emp, cfg);
    let (horizon, num_states) = (emp.horizon(), emp.num_states());
    let act = (0..horizon)
        .flat_map(|h| (0..num_states).map(move |s| (h, s)))
        .map(|(h, s)| argmax(q.row(h, s)))
        .collect();
    DeterministicPolicy::new(horizon, num_states, emp.num_actions(), act)
        .expect("argmax is a machine action")
}

pub fn baseline_optimistic(
    mdp: &TabularMdp,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
    cfg: &BaselineConfig,
    seed: u64,
) -> Result<MetricsLog> {
    let mut recorder = Recorder::new();
    baseline_record(mdp, pi, theta, cfg, seed, &mut recorder)?;
    recorder.finish()
}

pub fn baseline_record(
    mdp: &TabularMdp,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
    cfg: &BaselineConfig,
    seed: u64,
    recorder: &mut Recorder,
) -> Result<()> {
    cfg.validate()?;
    check_compatible(mdp, pi, theta)?;
    let truth = build_machine_mdp(mdp, pi, theta)?;
    let optimal = backward_induction(&truth).root_value(&truth);
    let s1 = mdp.initial_state();
    let mut emp = EmpiricalModel::for_mdp(mdp);
    let mut policy =
        DeterministicPolicy::always_defer(mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let (mut gap, mut advice, mut updates) = (0.0, 0.0, 0u64);
    for t in 0..cfg.episodes {
        if t % cfg.replan_every == 0 {
            policy = optimistic_policy(&emp, cfg);
            updates += 1;
            gap = optimal - policy_evaluation(&truth, &policy)?.get(0, s1);
            advice = expected_advice_count(&truth, &policy)?;
        }
        let traj = rollout_episode(mdp, pi, theta, &policy, &mut episode_rng(seed, t));
        emp.update(&traj);
        let done = t + 1;
        if done % cfg.log_every == 0 || done == cfg.episodes {
            recorder.record(done, gap, advice, updates, None, None)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unvisited_pairs_are_fully_optimistic() {
        let emp = EmpiricalModel::new(3, 2, 2, 0);
        let q = optimistic_q(&emp, &BaselineConfig::default());
        for h in 0..3 {
            assert!(q.row(h, 1).iter().all(|&x| x == 3.0));
        }
    }

    #[test]
    fn visited_values_stay_clipped() {
        let mut emp = EmpiricalModel::new(2, 1, 1, 0);
        for h in 0..2 {
            emp.record(h, 0, 0, 0, 1.0);
        }
        let q = optimistic_q(&emp, &BaselineConfig::default());
        assert_eq!(q.get(0, 0, 0), 2.0);
        assert_eq!(q.get(0, 0, 1), 2.0);
        assert_eq!(q.get(1, 0, 0), 1.0);
        assert_eq!(q.get(1, 0, 1), 2.0);
    }
}
