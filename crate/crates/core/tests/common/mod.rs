//! Instance generators and brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use adherence::envs::Instance;
use adherence::kernel::KernelBuilder;
use adherence::sim::rng::{auxiliary_rng, EpisodeRng};
use adherence::{AdherenceModel, HumanPolicy, TabularMdp};
use rand::RngExt;

pub fn rng(seed: u64) -> EpisodeRng {
    auxiliary_rng(seed)
}

/// Random distribution over `n` outcomes; some entries are zeroed to
/// exercise sparse rows, and now and then the row is one-hot.
pub fn random_row(rng: &mut EpisodeRng, n: usize) -> Vec<f64> {
    if n > 1 && rng.random::<f64>() < 0.15 {
        let mut row = vec![0.0; n];
        row[rng.random_range(0..n)] = 1.0;
        return row;
    }
    let mut row: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < 0.25 {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    if row.iter().all(|&p| p == 0.0) {
        row[rng.random_range(0..n)] = 1.0;
    }
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= total);
    row
}

/// Random instance with the given sizes and `θ ~ U[0, 1]`.
pub fn random_instance(
    rng: &mut EpisodeRng,
    num_states: usize,
    num_actions: usize,
    horizon: usize,
) -> Instance {
    let mut b = KernelBuilder::new(horizon, num_states, num_actions);
    for _ in 0..horizon * num_states * num_actions {
        b.push_dense(&random_row(rng, num_states)).unwrap();
    }
    let reward = (0..horizon * num_states * num_actions)
        .map(|_| rng.random::<f64>())
        .collect();
    let s1 = rng.random_range(0..num_states);
    let mdp = TabularMdp::new(b.finish().unwrap(), reward, s1).unwrap();
    let probs = (0..horizon * num_states)
        .flat_map(|_| random_row(rng, num_actions))
        .collect();
    let pi = HumanPolicy::new(horizon, num_states, num_actions, probs).unwrap();
    let theta = (0..num_states * num_actions)
        .map(|_| rng.random::<f64>())
        .collect();
    let theta = AdherenceModel::new(num_states, num_actions, theta).unwrap();
    Instance::new(mdp, pi, theta).unwrap()
}

/// Random instance with each size drawn uniformly from `1..=max`.
pub fn random_sized_instance(
    rng: &mut EpisodeRng,
    max_states: usize,
    max_actions: usize,
    max_horizon: usize,
) -> Instance {
    let s = rng.random_range(1..=max_states);
    let a = rng.random_range(1..=max_actions);
    let h = rng.random_range(1..=max_horizon);
    random_instance(rng, s, a, h)
}

/// The adherence law, written out independently of the library.
pub fn response(pi_row: &[f64], theta: f64, a_m: usize) -> Vec<f64> {
    if a_m >= pi_row.len() {
        return pi_row.to_vec();
    }
    let rest = 1.0 - pi_row[a_m];
    if rest <= 1e-15 {
        let mut out = vec![0.0; pi_row.len()];
        out[a_m] = 1.0;
        return out;
    }
    pi_row
        .iter()
        .enumerate()
        .map(|(a, &p)| {
            if a == a_m {
                theta
            } else {
                (1.0 - theta) * p / rest
            }
        })
        .collect()
}

/// Value and expected advice count of `act[h * S + s]`, by forward
/// propagation of the state distribution on the original environment.
pub fn evaluate_direct(inst: &Instance, act: &[usize]) -> (f64, f64) {
    let mdp = &inst.mdp;
    let (ss, aa, hh) = (mdp.num_states(), mdp.num_actions(), mdp.horizon());
    let mut dist = vec![0.0; ss];
    dist[mdp.initial_state()] = 1.0;
    let (mut value, mut advice) = (0.0, 0.0);
    for h in 0..hh {
        let mut next = vec![0.0; ss];
        for s in 0..ss {
            if dist[s] == 0.0 {
                continue;
            }
            let a_m = act[h * ss + s];
            if a_m < aa {
                advice += dist[s];
            }
            let theta = if a_m < aa {
                inst.theta.get(s, a_m)
            } else {
                0.0
            };
            for (a, p) in response(inst.pi.row(h, s), theta, a_m)
                .into_iter()
                .enumerate()
            {
                if p == 0.0 {
                    continue;
                }
                value += dist[s] * p * mdp.reward(h, s, a);
                for (t, q) in mdp.kernel().dense_row(h, s, a).into_iter().enumerate() {
                    next[t] += dist[s] * p * q;
                }
            }
        }
        dist = next;
    }
    (value, advice)
}

/// Calls `f` on every deterministic Markov machine policy.
pub fn for_each_policy(inst: &Instance, mut f: impl FnMut(&[usize])) {
    let mdp = &inst.mdp;
    let cells = mdp.horizon() * mdp.num_states();
    let choices = mdp.num_actions() + 1;
    let mut act = vec![0usize; cells];
    loop {
        f(&act);
        let mut i = 0;
        loop {
            if i == cells {
                return;
            }
            act[i] += 1;
            if act[i] < choices {
                break;
            }
            act[i] = 0;
            i += 1;
        }
    }
}

pub fn brute_force_optimum(inst: &Instance) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_policy(inst, |act| best = best.max(evaluate_direct(inst, act).0));
    best
}

/// `(advice_count, value)` of every deterministic policy.
pub fn brute_force_points(inst: &Instance) -> Vec<(f64, f64)> {
    let mut points = Vec::new();
    for_each_policy(inst, |act| {
        let (v, c) = evaluate_direct(inst, act);
        points.push((c, v));
    });
    points
}

/// Best value of a randomization over `points` whose expected cost is at
/// most `budget`: the upper concave envelope evaluated at `budget`.
pub fn upper_hull_value(points: &[(f64, f64)], budget: f64) -> f64 {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut best = f64::NEG_INFINITY;
    for w in hull.windows(2) {
        let ((c0, v0), (c1, v1)) = (w[0], w[1]);
        if c0 <= budget && budget <= c1 && c1 > c0 {
            best = best.max(v0 + (v1 - v0) * (budget - c0) / (c1 - c0));
        }
    }
    for &(c, v) in &hull {
        if c <= budget {
            best = best.max(v);
        }
    }
    best
}

/// `|k/n − p| ≤ z·√(p(1−p)/n)`, with `p` clamped to `[0, 1]` first.
pub fn within_binomial(k: u64, n: u64, p: f64, z: f64) -> bool {
    let freq = k as f64 / n as f64;
    let p = p.clamp(0.0, 1.0);
    let se = (p * (1.0 - p) / n as f64).sqrt();
    (freq - p).abs() <= z * se + 1e-12
}
