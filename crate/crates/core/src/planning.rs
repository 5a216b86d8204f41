//! Exact finite-horizon planning and evaluation on a machine MDP.
//!
//! Argmax ties go to the lowest action index, so defer (index `A`) only wins
//! when it is strictly better than every advising action.

use crate::error::{Error, Result};
use crate::kernel::Row;
use crate::machine::MachineMdp;
use crate::policy::{DeterministicPolicy, MixturePolicy, OccupancyMeasure, QTable, ValueTable};

/// Output of [`backward_induction`].
#[derive(Debug, Clone)]
pub struct Plan {
    pub q: QTable,
    pub v: ValueTable,
    pub policy: DeterministicPolicy,
}

impl Plan {
    pub fn root_value(&self, m: &MachineMdp) -> f64 {
        self.v.get(0, m.initial_state())
    }
}

/// Index of the maximum, first index winning exact ties.
#[inline]
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[inline]
fn layer_mean(layer: &[f64]) -> f64 {
    layer.iter().sum::<f64>() / layer.len() as f64
}

pub fn backward_induction(m: &MachineMdp) -> Plan {
    let (horizon, num_states, num_m) = (m.horizon(), m.num_states(), m.num_machine_actions());
    let kernel = m.kernel();
    let mut q = QTable::zeros(horizon, num_states, num_m);
    let mut v = ValueTable::zeros(horizon, num_states);
    let mut act = vec![0usize; horizon * num_states];
    let mut next = vec![0.0; num_states];

    for h in (0..horizon).rev() {
        next.copy_from_slice(v.layer(h + 1));
        let mean = layer_mean(&next);
        for s in 0..num_states {
            let row = q.row_mut(h, s);
            for (a, qa) in row.iter_mut().enumerate() {
                *qa = m.reward(h, s, a) + kernel.row(h, s, a).expect_with_mean(&next, mean);
            }
            let best = argmax(row);
            let best_value = row[best];
            act[h * num_states + s] = best;
            v.layer_mut(h)[s] = best_value;
        }
    }
    let policy = DeterministicPolicy::new(horizon, num_states, m.num_actions(), act)
        .expect("argmax indices are within the machine action set");
    Plan { q, v, policy }
}

fn check_policy(m: &MachineMdp, pol: &DeterministicPolicy) -> Result<()> {
    if pol.horizon() != m.horizon()
        || pol.num_states() != m.num_states()
        || pol.num_actions() != m.num_actions()
    {
        return Err(Error::dimension(
            "policy (H, S, A)",
            format!("{:?}", (m.horizon(), m.num_states(), m.num_actions())),
            format!("{:?}", (pol.horizon(), pol.num_states(), pol.num_actions())),
        ));
    }
    Ok(())
}

/// Exact `V^π` by backward recursion.
pub fn policy_evaluation(m: &MachineMdp, pol: &DeterministicPolicy) -> Result<ValueTable> {
    check_policy(m, pol)?;
    let (horizon, num_states) = (m.horizon(), m.num_states());
    let kernel = m.kernel();
    let mut v = ValueTable::zeros(horizon, num_states);
    let mut next = vec![0.0; num_states];
    for h in (0..horizon).rev() {
        next.copy_from_slice(v.layer(h + 1));
        let mean = layer_mean(&next);
        let layer = v.layer_mut(h);
        for (s, out) in layer.iter_mut().enumerate() {
            let a = pol.action(h, s);
            *out = m.reward(h, s, a) + kernel.row(h, s, a).expect_with_mean(&next, mean);
        }
    }
    Ok(v)
}

/// `q·V^{first} + (1 − q)·V^{second}`. Only the root entry is the value of
/// the mixture in the episode-start sense; deeper entries are the same
/// weighted combination.
pub fn mixture_evaluation(m: &MachineMdp, pol: &MixturePolicy) -> Result<ValueTable> {
    let first = policy_evaluation(m, &pol.first)?;
    if pol.q() == 1.0 {
        return Ok(first);
    }
    let second = policy_evaluation(m, &pol.second)?;
    Ok(ValueTable::mix(&first, &second, pol.q()))
}

/// Forward recursion of state-action occupancy from the initial state.
pub fn occupancy_measures(m: &MachineMdp, pol: &DeterministicPolicy) -> Result<OccupancyMeasure> {
    check_policy(m, pol)?;
    let (horizon, num_states) = (m.horizon(), m.num_states());
    let kernel = m.kernel();
    let mut occ = OccupancyMeasure::zeros(horizon, num_states, m.num_machine_actions());
    let mut current = vec![0.0; num_states];
    let mut next = vec![0.0; num_states];
    current[m.initial_state()] = 1.0;
    for h in 0..horizon {
        next.fill(0.0);
        let mut uniform_mass = 0.0;
        for (s, &mass) in current.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let a = pol.action(h, s);
            occ.add(h, s, a, mass);
            match kernel.row(h, s, a) {
                Row::Sparse { targets, probs } => {
                    for (&t, &p) in targets.iter().zip(probs) {
                        next[t] += mass * p;
                    }
                }
                Row::Uniform { .. } => uniform_mass += mass,
            }
        }
        if uniform_mass > 0.0 {
            let share = uniform_mass / num_states as f64;
            next.iter_mut().for_each(|x| *x += share);
        }
        std::mem::swap(&mut current, &mut next);
    }
    Ok(occ)
}

/// `E^π[Σ_h 1{a_h ≠ defer}]`.
pub fn expected_advice_count(m: &MachineMdp, pol: &DeterministicPolicy) -> Result<f64> {
    let occ = occupancy_measures(m, pol)?;
    Ok((0..m.horizon()).map(|h| occ.advice_mass(h)).sum())
}

pub fn mixture_advice_count(m: &MachineMdp, pol: &MixturePolicy) -> Result<f64> {
    let first = expected_advice_count(m, &pol.first)?;
    if pol.q() == 1.0 {
        return Ok(first);
    }
    let second = expected_advice_count(m, &pol.second)?;
    Ok(pol.q() * first + (1.0 - pol.q()) * second)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::kernel::KernelBuilder;

    /// Two-state chain, one advisable action.
    fn chain(rewards: Vec<f64>, horizon: usize) -> MachineMdp {
        let mut b = KernelBuilder::new(horizon, 2, 2);
        for _ in 0..horizon {
            // state 0: advise -> 1, defer -> 0; state 1 absorbing
            b.push_dense(&[0.0, 1.0]).unwrap();
            b.push_dense(&[1.0, 0.0]).unwrap();
            b.push_dense(&[0.0, 1.0]).unwrap();
            b.push_dense(&[0.0, 1.0]).unwrap();
        }
        MachineMdp::new(1, Arc::new(b.finish().unwrap()), rewards, 0).unwrap()
    }

    #[test]
    fn one_step_horizon_takes_max_reward() {
        let m = chain(vec![0.3, 0.7, 0.2, 0.1], 1);
        let plan = backward_induction(&m);
        assert_eq!(plan.v.get(0, 0), 0.7);
        assert_eq!(plan.v.get(0, 1), 0.2);
        assert_eq!(plan.policy.action(0, 0), 1);
        assert_eq!(plan.v.get(1, 0), 0.0);
    }

    #[test]
    fn zero_rewards_pick_lowest_index() {
        let m = chain(vec![0.0; 8], 2);
        let plan = backward_induction(&m);
        assert!(plan.policy.actions().iter().all(|&a| a == 0));
        assert!((0..=2).all(|h| (0..2).all(|s| plan.v.get(h, s) == 0.0)));
    }

    #[test]
    fn greedy_policy_evaluates_to_optimum() {
        let m = chain(vec![0.1, 0.5, 0.9, 0.2, 0.3, 0.6, 0.4, 0.0], 2);
        let plan = backward_induction(&m);
        let v = policy_evaluation(&m, &plan.policy).unwrap();
        for h in 0..=2 {
            for s in 0..2 {
                assert!((v.get(h, s) - plan.v.get(h, s)).abs() < 1e-10);
                if h < 2 {
                    let row = plan.q.row(h, s);
                    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    assert_eq!(plan.v.get(h, s), max);
                }
            }
        }
    }

    #[test]
    fn deterministic_chain_occupancy_follows_trajectory() {
        let m = chain(vec![0.0; 12], 3);
        // advise at h=0 moves to state 1 and stays
        let pol = DeterministicPolicy::new(3, 2, 1, vec![0, 1, 1, 1, 1, 1]).unwrap();
        let occ = occupancy_measures(&m, &pol).unwrap();
        assert_eq!(occ.get(0, 0, 0), 1.0);
        assert_eq!(occ.get(1, 1, 1), 1.0);
        assert_eq!(occ.get(2, 1, 1), 1.0);
        for h in 0..3 {
            assert_eq!(occ.step_mass(h), 1.0);
        }
        assert_eq!(expected_advice_count(&m, &pol).unwrap(), 1.0);
    }

    #[test]
    fn horizon_one_occupancy_is_point_mass() {
        let m = chain(vec![0.0; 4], 1);
        let pol = DeterministicPolicy::new(1, 2, 1, vec![1, 0]).unwrap();
        let occ = occupancy_measures(&m, &pol).unwrap();
        assert_eq!(occ.get(0, 0, 1), 1.0);
        assert_eq!(occ.step_mass(0), 1.0);
        assert_eq!(occ.get(0, 0, 0) + occ.get(0, 1, 0) + occ.get(0, 1, 1), 0.0);
    }

    #[test]
    fn advice_count_extremes() {
        let m = chain(vec![0.0; 12], 3);
        let defer = DeterministicPolicy::always_defer(3, 2, 1);
        let never_defer = DeterministicPolicy::constant(3, 2, 1, 0).unwrap();
        assert_eq!(expected_advice_count(&m, &defer).unwrap(), 0.0);
        assert_eq!(expected_advice_count(&m, &never_defer).unwrap(), 3.0);
    }

    #[test]
    fn mixture_with_q_one_is_first_component() {
        let m = chain(vec![0.1, 0.5, 0.9, 0.2, 0.3, 0.6, 0.4, 0.0], 2);
        let a = DeterministicPolicy::constant(2, 2, 1, 0).unwrap();
        let b = DeterministicPolicy::always_defer(2, 2, 1);
        let mix = MixturePolicy::new(a.clone(), b.clone(), 1.0).unwrap();
        assert_eq!(
            mixture_evaluation(&m, &mix).unwrap(),
            policy_evaluation(&m, &a).unwrap()
        );
        let half = MixturePolicy::new(a.clone(), b.clone(), 0.5).unwrap();
        let expected = 0.5 * policy_evaluation(&m, &a).unwrap().get(0, 0)
            + 0.5 * policy_evaluation(&m, &b).unwrap().get(0, 0);
        assert!((mixture_evaluation(&m, &half).unwrap().get(0, 0) - expected).abs() < 1e-15);
        assert!((mixture_advice_count(&m, &half).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let m = chain(vec![0.0; 4], 1);
        let pol = DeterministicPolicy::always_defer(2, 2, 1);
        assert!(policy_evaluation(&m, &pol).is_err());
    }
}
