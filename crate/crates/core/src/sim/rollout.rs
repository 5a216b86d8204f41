use rand::RngExt;

use crate::machine::human_action_distribution_into;
use crate::model::{AdherenceModel, HumanPolicy, TabularMdp};
use crate::policy::{DeterministicPolicy, MixturePolicy};
use crate::sim::rng::EpisodeRng;

/// One interaction step `s_h → a^M → a^H → (r_h, s_{h+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: usize,
    /// Machine action; equals `A` for defer.
    pub machine_action: usize,
    pub human_action: usize,
    pub reward: f64,
    pub next_state: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn advice_count(&self, num_actions: usize) -> usize {
        self.steps
            .iter()
            .filter(|s| s.machine_action != num_actions)
            .count()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

/// Inverse-CDF draw from a finite distribution.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

/// Draws the human's response to `a_m` under the adherence law.
pub fn sample_human_action(
    s: usize,
    h: usize,
    a_m: usize,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
    rng: &mut EpisodeRng,
    scratch: &mut [f64],
) -> usize {
    human_action_distribution_into(s, h, a_m, pi, theta, scratch);
    sample_index(scratch, rng.random::<f64>())
}

/// Plays one episode of `pol` against the true environment and adherence.
pub fn rollout_episode(
    mdp: &TabularMdp,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
    pol: &DeterministicPolicy,
    rng: &mut EpisodeRng,
) -> Trajectory {
    let mut scratch = vec![0.0; mdp.num_actions()];
    let mut steps = Vec::with_capacity(mdp.horizon());
    let mut s = mdp.initial_state();
    for h in 0..mdp.horizon() {
        let a_m = pol.action(h, s);
        let a_h = sample_human_action(s, h, a_m, pi, theta, rng, &mut scratch);
        let reward = mdp.reward(h, s, a_h);
        let next_state = mdp.kernel().row(h, s, a_h).sample(rng.random::<f64>());
        steps.push(Step {
            state: s,
            machine_action: a_m,
            human_action: a_h,
            reward,
            next_state,
        });
        s = next_state;
    }
    Trajectory { steps }
}

/// Picks a component at episode start, then plays it for the whole episode.
pub fn rollout_mixture(
    mdp: &TabularMdp,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
    pol: &MixturePolicy,
    rng: &mut EpisodeRng,
) -> Trajectory {
    let component = if rng.random::<f64>() < pol.q() {
        &pol.first
    } else {
        &pol.second
    };
    rollout_episode(mdp, pi, theta, component, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelBuilder;
    use crate::sim::rng::episode_rng;

    fn line(horizon: usize) -> (TabularMdp, HumanPolicy) {
        // states 0..3, action 0 moves right, action 1 stays
        let mut b = KernelBuilder::new(horizon, 3, 2);
        for _ in 0..horizon {
            for s in 0..3 {
                b.push_row([((s + 1).min(2), 1.0)]).unwrap();
                b.push_row([(s, 1.0)]).unwrap();
            }
        }
        let reward = (0..horizon * 6)
            .map(|i| if i % 2 == 0 { 1.0 } else { 0.0 })
            .collect();
        let mdp = TabularMdp::new(b.finish().unwrap(), reward, 0).unwrap();
        let pi = HumanPolicy::from_fn(horizon, 3, 2, |_, _| vec![0.5, 0.5]).unwrap();
        (mdp, pi)
    }

    #[test]
    fn full_adherence_deterministic_kernel_is_fixed() {
        let (mdp, pi) = line(3);
        let theta = AdherenceModel::constant(3, 2, 1.0).unwrap();
        let pol = DeterministicPolicy::constant(3, 3, 2, 0).unwrap();
        for seed in 0..5 {
            let t = rollout_episode(&mdp, &pi, &theta, &pol, &mut episode_rng(seed, 0));
            let states: Vec<_> = t.steps.iter().map(|s| s.state).collect();
            assert_eq!(states, vec![0, 1, 2]);
            assert_eq!(t.total_reward(), 3.0);
            assert_eq!(t.advice_count(2), 3);
        }
    }

    #[test]
    fn same_stream_same_trajectory() {
        let (mdp, pi) = line(4);
        let theta = AdherenceModel::constant(3, 2, 0.5).unwrap();
        let pol = DeterministicPolicy::always_defer(4, 3, 2);
        let a = rollout_episode(&mdp, &pi, &theta, &pol, &mut episode_rng(11, 5));
        let b = rollout_episode(&mdp, &pi, &theta, &pol, &mut episode_rng(11, 5));
        assert_eq!(a, b);
        assert_eq!(a.steps.len(), 4);
    }

    #[test]
    fn sample_index_edges() {
        assert_eq!(sample_index(&[0.0, 1.0], 0.0), 1);
        assert_eq!(sample_index(&[0.5, 0.5, 0.0], 0.999_999_999_999), 1);
    }
}
