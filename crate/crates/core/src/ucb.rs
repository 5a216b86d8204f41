//! Learning the advice policy when the environment and the human policy are
//! known but the adherence level is not.
//!
//! Because the optimal value is monotone in `θ` (when advice never lowers
//! the advised action's probability), planning against an entrywise upper
//! confidence bound `θ̄ ≥ θ` gives an optimistic value. Counts are pooled
//! over all steps of an episode since `θ` does not depend on `h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::build_machine_mdp;
use crate::model::{check_compatible, AdherenceModel, HumanPolicy, TabularMdp};
use crate::planning::{backward_induction, expected_advice_count, policy_evaluation, Plan};
use crate::policy::DeterministicPolicy;
use crate::sim::metrics::Recorder;
use crate::sim::rng::episode_rng;
use crate::sim::rollout::{rollout_episode, Trajectory};
use crate::sim::MetricsLog;

/// Visit and adherence counts per `(s, a)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdherenceEstimator {
    num_states: usize,
    num_actions: usize,
    counts: Vec<u64>,
    adhered: Vec<u64>,
}

impl AdherenceEstimator {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        AdherenceEstimator {
            num_states,
            num_actions,
            counts: vec![0; num_states * num_actions],
            adhered: vec![0; num_states * num_actions],
        }
    }

    /// Counts advised steps only; deferring reveals nothing about `θ`.
    pub fn update(&mut self, traj: &Trajectory) {
        for step in &traj.steps {
            if step.machine_action >= self.num_actions {
                continue;
            }
            let i = step.state * self.num_actions + step.machine_action;
            self.counts[i] += 1;
            if step.human_action == step.machine_action {
                self.adhered[i] += 1;
            }
        }
    }

    pub fn count(&self, s: usize, a: usize) -> u64 {
        self.counts[s * self.num_actions + a]
    }

    pub fn adhered(&self, s: usize, a: usize) -> u64 {
        self.adhered[s * self.num_actions + a]
    }

    /// Empirical adherence `m / n`, 0 when unvisited.
    pub fn theta_hat(&self, s: usize, a: usize) -> f64 {
        let n = self.count(s, a);
        if n == 0 {
            0.0
        } else {
            self.adhered(s, a) as f64 / n as f64
        }
    }

    /// `θ̄(s, a) = min(1, θ̂ + C(θ̂, n)/√n)`, and 1 where unvisited.
    pub fn optimistic_theta(&self, width: &ConfidenceWidth) -> AdherenceModel {
        let mut theta = Vec::with_capacity(self.counts.len());
        for s in 0..self.num_states {
            for a in 0..self.num_actions {
                let n = self.count(s, a);
                theta.push(if n == 0 {
                    1.0
                } else {
                    let hat = self.theta_hat(s, a);
                    let c = width.width(hat, n).expect("θ̂ lies in [0, 1]");
                    (hat + c / (n as f64).sqrt()).min(1.0)
                });
            }
        }
        AdherenceModel::new(self.num_states, self.num_actions, theta).expect("θ̄ lies in [0, 1]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthMode {
    /// Minimum of the Hoeffding, Bernstein and variance-based widths.
    Theory,
    /// `c·√(2 log n / n)`.
    Practical,
}

impl std::str::FromStr for WidthMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "theory" => Ok(WidthMode::Theory),
            "practical" => Ok(WidthMode::Practical),
            other => Err(format!(
                "unknown width mode `{other}` (expected theory|practical)"
            )),
        }
    }
}

/// The confidence width `C(θ̂, n, T, δ)` for a fixed instance size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceWidth {
    pub mode: WidthMode,
    pub num_states: usize,
    pub num_actions: usize,
    pub episodes: u64,
    pub delta: f64,
    pub scale: f64,
}

impl ConfidenceWidth {
    pub fn width(&self, theta_hat: f64, n: u64) -> Result<f64> {
        confidence_width(
            theta_hat,
            n,
            self.episodes,
            self.delta,
            self.mode,
            self.scale,
            self.num_states,
            self.num_actions,
        )
    }
}

/// Width `C` such that `θ̄ = min(1, θ̂ + C/√n)`.
///
/// Theory mode takes the minimum of
/// 1. `2√L`,
/// 2. `√(2θ̂(1−θ̂)L) + 7√n/(3n−1)·L`,
/// 3. `((1 + √(1 + 4x²))/2 − θ̂)·√n` with
///    `x = max(0, √(θ̂(1−θ̂)) − √(2 log(SAT/δ)/(n−1)))`,
///
/// where `L = log(12SAT/δ)`. Term 3 needs `n ≥ 2` and is skipped otherwise.
/// Practical mode is `scale·√(2 log n / n)`, which is 0 at `n = 1`.
#[allow(clippy::too_many_arguments)]
pub fn confidence_width(
    theta_hat: f64,
    n: u64,
    episodes: u64,
    delta: f64,
    mode: WidthMode,
    scale: f64,
    num_states: usize,
    num_actions: usize,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta_hat) {
        return Err(Error::invalid(
            "theta_hat",
            theta_hat.to_string(),
            "outside [0, 1]",
        ));
    }
    if n == 0 {
        return Ok(f64::INFINITY);
    }
    let nf = n as f64;
    match mode {
        WidthMode::Practical => Ok(scale * (2.0 * nf.ln() / nf).sqrt()),
        WidthMode::Theory => {
            let sat = num_states as f64 * num_actions as f64 * episodes as f64;
            let log12 = (12.0 * sat / delta).ln();
            let var = theta_hat * (1.0 - theta_hat);
            let hoeffding = 2.0 * log12.sqrt();
            let bernstein = (2.0 * var * log12).sqrt() + 7.0 * nf.sqrt() / (3.0 * nf - 1.0) * log12;
            let mut c = hoeffding.min(bernstein);
            if n >= 2 {
                let x = (var.sqrt() - (2.0 * (sat / delta).ln() / (nf - 1.0)).sqrt()).max(0.0);
                let variance_term =
                    ((1.0 + (1.0 + 4.0 * x * x).sqrt()) / 2.0 - theta_hat) * nf.sqrt();
                c = c.min(variance_term);
            }
            Ok(c)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcbConfig {
    pub delta: f64,
    /// Declared episode budget `T`; also the run length.
    pub episodes: u64,
    pub width_mode: WidthMode,
    /// `c` of the practical width.
    pub width_scale: f64,
    pub replan_every: u64,
    /// Metric rows are logged every this many episodes.
    pub log_every: u64,
}

impl Default for UcbConfig {
    fn default() -> Self {
        UcbConfig {
            delta: 0.1,
            episodes: 1000,
            width_mode: WidthMode::Practical,
            width_scale: 0.4,
            replan_every: 1,
            log_every: 1,
        }
    }
}

impl UcbConfig {
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
        if self.width_scale.is_nan() || self.width_scale <= 0.0 {
            return Err(Error::config("width_scale", "must be positive"));
        }
        if self.replan_every == 0 {
            return Err(Error::config("replan_every", "must be at least 1"));
        }
        if self.log_every == 0 {
            return Err(Error::config("log_every", "must be at least 1"));
        }
        Ok(())
    }

    pub fn width(&self, num_states: usize, num_actions: usize) -> ConfidenceWidth {
        ConfidenceWidth {
            mode: self.width_mode,
            num_states,
            num_actions,
            episodes: self.episodes,
            delta: self.delta,
            scale: self.width_scale,
        }
    }
}

/// Stateful learner: plan against `θ̄`, observe, repeat.
#[derive(Debug, Clone)]
pub struct UcbLearner<'a> {
    mdp: &'a TabularMdp,
    pi: &'a HumanPolicy,
    width: ConfidenceWidth,
    estimator: AdherenceEstimator,
}

impl<'a> UcbLearner<'a> {
    pub fn new(mdp: &'a TabularMdp, pi: &'a HumanPolicy, cfg: &UcbConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(UcbLearner {
            mdp,
            pi,
            width: cfg.width(mdp.num_states(), mdp.num_actions()),
            estimator: AdherenceEstimator::new(mdp.num_states(), mdp.num_actions()),
        })
    }

    pub fn estimator(&self) -> &AdherenceEstimator {
        &self.estimator
    }

    pub fn optimistic_theta(&self) -> AdherenceModel {
        self.estimator.optimistic_theta(&self.width)
    }

    /// Optimal plan on the machine MDP built from the current `θ̄`.
    pub fn plan(&self) -> Result<Plan> {
        let m = build_machine_mdp(self.mdp, self.pi, &self.optimistic_theta())?;
        Ok(backward_induction(&m))
    }

    pub fn observe(&mut self, traj: &Trajectory) {
        self.estimator.update(traj);
    }
}

pub fn ucb_ad_run(
    mdp: &TabularMdp,
    pi: &HumanPolicy,
    true_theta: &AdherenceModel,
    cfg: &UcbConfig,
    seed: u64,
) -> Result<MetricsLog> {
    let mut recorder = Recorder::new();
    ucb_ad_record(mdp, pi, true_theta, cfg, seed, &mut recorder)?;
    recorder.finish()
}

/// As [`ucb_ad_run`], logging into `recorder`.
pub fn ucb_ad_record(
    mdp: &TabularMdp,
    pi: &HumanPolicy,
    true_theta: &AdherenceModel,
    cfg: &UcbConfig,
    seed: u64,
    recorder: &mut Recorder,
) -> Result<()> {
    check_compatible(mdp, pi, true_theta)?;
    let truth = build_machine_mdp(mdp, pi, true_theta)?;
    let optimal = backward_induction(&truth).root_value(&truth);
    let s1 = mdp.initial_state();

    let mut learner = UcbLearner::new(mdp, pi, cfg)?;
    let mut policy =
        DeterministicPolicy::always_defer(mdp.horizon(), mdp.num_states(), mdp.num_actions());
    let (mut gap, mut advice) = (0.0, 0.0);
    let mut updates = 0u64;

    for t in 0..cfg.episodes {
        if t % cfg.replan_every == 0 {
            policy = learner.plan()?.policy;
            updates += 1;
            gap = optimal - policy_evaluation(&truth, &policy)?.get(0, s1);
            advice = expected_advice_count(&truth, &policy)?;
        }
        let traj = rollout_episode(mdp, pi, true_theta, &policy, &mut episode_rng(seed, t));
        learner.observe(&traj);
        let done = t + 1;
        if done % cfg.log_every == 0 || done == cfg.episodes {
            recorder.record(done, gap, advice, updates, None, None)?;
        }
    }
    Ok(())
}
