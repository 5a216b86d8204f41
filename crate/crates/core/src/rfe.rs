//! Reward-free exploration over the machine MDP when the environment, the
//! human policy and the adherence levels are all unknown.
//!
//! Stage 1 explores with the greedy policy of an uncertainty table `W` until
//! `W` at the root is small. Stage 2 plans on the empirical model, for any
//! advice penalty β or any advice budget `D`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelBuilder;
use crate::machine::{build_machine_mdp, MachineMdp};
use crate::model::{check_compatible, AdherenceModel, HumanPolicy, TabularMdp};
use crate::pertinence::{beta_sweep, solve_cmdp_dual, BetaSweepResult, BudgetConfig, CmdpSolution};
use crate::planning::{argmax, backward_induction, expected_advice_count, policy_evaluation};
use crate::policy::{DeterministicPolicy, MixturePolicy};
use crate::sim::metrics::Recorder;
use crate::sim::rng::episode_rng;
use crate::sim::rollout::{rollout_episode, Trajectory};
use crate::sim::MetricsLog;

/// Counts over machine state-action pairs `(h, s, ā)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalModel {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    initial_state: usize,
    counts: Vec<u64>,
    /// Per row, `(next_state, count)` pairs in first-seen order.
    transitions: Vec<Vec<(usize, u64)>>,
    reward_sums: Vec<f64>,
}

impl EmpiricalModel {
    /// Empty model; `num_actions` is the human action count `A`.
    pub fn new(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        initial_state: usize,
    ) -> Self {
        let rows = horizon * num_states * (num_actions + 1);
        EmpiricalModel {
            horizon,
            num_states,
            num_actions,
            initial_state,
            counts: vec![0; rows],
            transitions: vec![Vec::new(); rows],
            reward_sums: vec![0.0; rows],
        }
    }

    pub fn for_mdp(mdp: &TabularMdp) -> Self {
        Self::new(
            mdp.horizon(),
            mdp.num_states(),
            mdp.num_actions(),
            mdp.initial_state(),
        )
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

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    #[inline]
    fn index(&self, h: usize, s: usize, a: usize) -> usize {
        (h * self.num_states + s) * (self.num_actions + 1) + a
    }

    pub fn record(&mut self, h: usize, s: usize, a_m: usize, next: usize, reward: f64) {
        let i = self.index(h, s, a_m);
        self.counts[i] += 1;
        self.reward_sums[i] += reward;
        let row = &mut self.transitions[i];
        match row.iter_mut().find(|(t, _)| *t == next) {
            Some((_, c)) => *c += 1,
            None => row.push((next, 1)),
        }
    }

    pub fn update(&mut self, traj: &Trajectory) {
        for (h, step) in traj.steps.iter().enumerate() {
            self.record(
                h,
                step.state,
                step.machine_action,
                step.next_state,
                step.reward,
            );
        }
    }

    pub fn count(&self, h: usize, s: usize, a: usize) -> u64 {
        self.counts[self.index(h, s, a)]
    }

    pub fn transition_count(&self, h: usize, s: usize, a: usize, next: usize) -> u64 {
        self.transitions[self.index(h, s, a)]
            .iter()
            .find(|(t, _)| *t == next)
            .map_or(0, |&(_, c)| c)
    }

    /// `r̂`, or 0 where unvisited.
    pub fn reward_mean(&self, h: usize, s: usize, a: usize) -> f64 {
        let i = self.index(h, s, a);
        if self.counts[i] == 0 {
            0.0
        } else {
            self.reward_sums[i] / self.counts[i] as f64
        }
    }

    pub fn total_visits(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical machine MDP with `p̂` (uniform where unvisited) and `r̂`.
    pub fn machine_mdp(&self) -> Result<MachineMdp> {
        let reward = (0..self.counts.len())
            .map(|i| {
                if self.counts[i] == 0 {
                    0.0
                } else {
                    (self.reward_sums[i] / self.counts[i] as f64).clamp(0.0, 1.0)
                }
            })
            .collect();
        self.machine_mdp_with_rewards(reward)
    }

    /// Empirical `p̂` with a caller-supplied reward table over `(h, s, ā)`.
    pub fn machine_mdp_with_rewards(&self, reward: Vec<f64>) -> Result<MachineMdp> {
        let mut b = KernelBuilder::new(self.horizon, self.num_states, self.num_actions + 1);
        for (i, row) in self.transitions.iter().enumerate() {
            let n = self.counts[i];
            if n == 0 {
                b.push_uniform();
            } else {
                let nf = n as f64;
                b.push_row(row.iter().map(|&(t, c)| (t, c as f64 / nf)))?;
            }
        }
        MachineMdp::new(
            self.num_actions,
            Arc::new(b.finish()?),
            reward,
            self.initial_state,
        )
    }
}

/// `φ(n) = 6 log(c·H·S·Ā/(εδ)) + S log(8e(n+1))` with `c = constant`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiParams {
    pub num_states: usize,
    /// Size of the action set the model is indexed by (`A + 1` for the machine).
    pub num_actions: usize,
    pub horizon: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub constant: f64,
}

impl PhiParams {
    pub fn eval(&self, n: u64) -> f64 {
        let (s, a, h) = (
            self.num_states as f64,
            self.num_actions as f64,
            self.horizon as f64,
        );
        6.0 * (self.constant * h * s * a / (self.epsilon * self.delta)).ln()
            + s * (8.0 * std::f64::consts::E * (n as f64 + 1.0)).ln()
    }
}

pub fn phi(
    n: u64,
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    epsilon: f64,
    delta: f64,
) -> f64 {
    PhiParams {
        num_states,
        num_actions,
        horizon,
        epsilon,
        delta,
        constant: 4.0,
    }
    .eval(n)
}

/// `W[h][s][ā]` for `h ∈ 0..=H`; the last layer is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WTable {
    num_states: usize,
    num_machine_actions: usize,
    values: Vec<f64>,
}

impl WTable {
    pub fn horizon(&self) -> usize {
        self.values.len() / (self.num_states * self.num_machine_actions) - 1
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_machine_actions(&self) -> usize {
        self.num_machine_actions
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize, a: usize) -> f64 {
        self.values[(h * self.num_states + s) * self.num_machine_actions + a]
    }

    #[inline]
    pub fn row(&self, h: usize, s: usize) -> &[f64] {
        let i = (h * self.num_states + s) * self.num_machine_actions;
        &self.values[i..i + self.num_machine_actions]
    }

    /// Builds a table from explicit entries for `h ∈ 0..H`; layer `H` is zero.
    pub fn from_values(
        horizon: usize,
        num_states: usize,
        num_machine_actions: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let len = horizon * num_states * num_machine_actions;
        if values.len() != len {
            return Err(Error::dimension("W table", len, values.len()));
        }
        let mut values = values;
        values.resize(len + num_states * num_machine_actions, 0.0);
        Ok(WTable {
            num_states,
            num_machine_actions,
            values,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// `ε/H`: near-optimal for every penalty β at once.
    Beta,
    /// `ε/2`: near-optimal for the unpenalized problem.
    Advice,
    /// An explicit threshold.
    Custom(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Multiplies the `16H²φ(n)/n` bonus.
    pub bonus_scale: f64,
    pub threshold_mode: ThresholdMode,
    pub max_episodes: u64,
    /// Episodes between recomputations of `W` (and, in advice runs, of the
    /// logged policy).
    pub replan_every: u64,
    /// The constant inside the first logarithm of `φ`.
    pub phi_constant: f64,
    /// Advice runs plan with the true reward instead of `r̂`.
    pub known_reward: bool,
}

impl Default for RfeConfig {
    fn default() -> Self {
        RfeConfig {
            epsilon: 0.1,
            delta: 0.1,
            bonus_scale: 1.0,
            threshold_mode: ThresholdMode::Beta,
            max_episodes: 1_000_000,
            replan_every: 1,
            phi_constant: 4.0,
            known_reward: false,
        }
    }
}

impl RfeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::config(
                "epsilon",
                format!("{} outside (0, 1]", self.epsilon),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(
                "delta",
                format!("{} outside (0, 1)", self.delta),
            ));
        }
        if self.bonus_scale.is_nan() || self.bonus_scale <= 0.0 {
            return Err(Error::config("bonus_scale", "must be positive"));
        }
        if self.phi_constant.is_nan() || self.phi_constant <= 0.0 {
            return Err(Error::config("phi_constant", "must be positive"));
        }
        if self.replan_every == 0 {
            return Err(Error::config("replan_every", "must be at least 1"));
        }
        if let ThresholdMode::Custom(t) = self.threshold_mode {
            if t.is_nan() || t < 0.0 {
                return Err(Error::config("threshold", "must be nonnegative"));
            }
        }
        Ok(())
    }

    pub fn threshold(&self, horizon: usize) -> f64 {
        match self.threshold_mode {
            ThresholdMode::Beta => self.epsilon / horizon as f64,
            ThresholdMode::Advice => self.epsilon / 2.0,
            ThresholdMode::Custom(t) => t,
        }
    }

    pub fn phi_params(&self, emp: &EmpiricalModel) -> PhiParams {
        PhiParams {
            num_states: emp.num_states(),
            num_actions: emp.num_actions() + 1,
            horizon: emp.horizon(),
            epsilon: self.epsilon,
            delta: self.delta,
            constant: self.phi_constant,
        }
    }
}

/// `W_h(s,ā) = min(H, scale·16H²φ(n)/n + (1 + 1/H)·Σ p̂(s') max W_{h+1}(s',·))`,
/// with `W = H` where `n = 0`.
pub fn compute_w(emp: &EmpiricalModel, cfg: &RfeConfig) -> WTable {
    let (horizon, num_states, num_m) = (emp.horizon, emp.num_states, emp.num_actions + 1);
    let hf = horizon as f64;
    let params = cfg.phi_params(emp);
    let coef = cfg.bonus_scale * 16.0 * hf * hf;
    let growth = 1.0 + 1.0 / hf;
    let mut w = WTable {
        num_states,
        num_machine_actions: num_m,
        values: vec![0.0; (horizon + 1) * num_states * num_m],
    };
    let mut next_max = vec![0.0; num_states];
    for h in (0..horizon).rev() {
        for (s, m) in next_max.iter_mut().enumerate() {
            *m = w
                .row(h + 1, s)
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
        }
        for s in 0..num_states {
            for a in 0..num_m {
                let i = emp.index(h, s, a);
                let n = emp.counts[i];
                let value = if n == 0 {
                    hf
                } else {
                    let nf = n as f64;
                    let future: f64 = emp.transitions[i]
                        .iter()
                        .map(|&(t, c)| c as f64 / nf * next_max[t])
                        .sum();
                    (coef * params.eval(n) / nf + growth * future).min(hf)
                };
                w.values[(h * num_states + s) * num_m + a] = value;
            }
        }
    }
    w
}

/// Greedy exploration policy; the argmax includes defer.
pub fn w_greedy_policy(w: &WTable) -> DeterministicPolicy {
    let (horizon, num_states) = (w.horizon(), w.num_states);
    let act = (0..horizon)
        .flat_map(|h| (0..num_states).map(move |s| (h, s)))
        .map(|(h, s)| argmax(w.row(h, s)))
        .collect();
    DeterministicPolicy::new(horizon, num_states, w.num_machine_actions - 1, act)
        .expect("argmax is a machine action")
}

/// True when `W + 4e√W ≤ threshold` at the root action of `pol`.
pub fn stopping_check(
    w: &WTable,
    pol: &DeterministicPolicy,
    initial_state: usize,
    threshold: f64,
) -> bool {
    stopping_statistic(w.get(0, initial_state, pol.action(0, initial_state))) <= threshold
}

/// `W + 4e√W`.
pub fn stopping_statistic(w_root: f64) -> f64 {
    w_root + 4.0 * std::f64::consts::E * w_root.sqrt()
}

/// Stage-1 state: the empirical model, its `W` table and greedy policy.
#[derive(Debug, Clone)]
pub struct Explorer<'a> {
    mdp: &'a TabularMdp,
    pi: &'a HumanPolicy,
    theta: &'a AdherenceModel,
    cfg: RfeConfig,
    seed: u64,
    model: EmpiricalModel,
    w: WTable,
    policy: DeterministicPolicy,
    episodes: u64,
}

impl<'a> Explorer<'a> {
    pub fn new(
        mdp: &'a TabularMdp,
        pi: &'a HumanPolicy,
        theta: &'a AdherenceModel,
        cfg: &RfeConfig,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        check_compatible(mdp, pi, theta)?;
        let model = EmpiricalModel::for_mdp(mdp);
        let w = compute_w(&model, cfg);
        let policy = w_greedy_policy(&w);
        Ok(Explorer {
            mdp,
            pi,
            theta,
            cfg: cfg.clone(),
            seed,
            model,
            w,
            policy,
            episodes: 0,
        })
    }

    pub fn model(&self) -> &EmpiricalModel {
        &self.model
    }

    pub fn w(&self) -> &WTable {
        &self.w
    }

    pub fn policy(&self) -> &DeterministicPolicy {
        &self.policy
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn w_root(&self) -> f64 {
        let s1 = self.mdp.initial_state();
        self.w.get(0, s1, self.policy.action(0, s1))
    }

    pub fn should_stop(&self) -> bool {
        stopping_check(
            &self.w,
            &self.policy,
            self.mdp.initial_state(),
            self.cfg.threshold(self.mdp.horizon()),
        )
    }

    /// Plays `n` episodes with the current policy, then recomputes `W`.
    pub fn run_batch(&mut self, n: u64) {
        for _ in 0..n {
            let mut rng = episode_rng(self.seed, self.episodes);
            let traj = rollout_episode(self.mdp, self.pi, self.theta, &self.policy, &mut rng);
            self.model.update(&traj);
            self.episodes += 1;
        }
        self.w = compute_w(&self.model, &self.cfg);
        self.policy = w_greedy_policy(&self.w);
    }

    pub fn into_model(self) -> EmpiricalModel {
        self.model
    }
}

#[derive(Debug, Clone)]
pub struct Exploration {
    pub model: EmpiricalModel,
    /// Episodes used (τ).
    pub episodes: u64,
    /// False when the episode cap was reached first.
    pub converged: bool,
    pub w_root: f64,
}

pub fn explore(
    mdp: &TabularMdp,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
    cfg: &RfeConfig,
    seed: u64,
) -> Result<Exploration> {
    let mut ex = Explorer::new(mdp, pi, theta, cfg, seed)?;
    let converged = loop {
        if ex.should_stop() {
            break true;
        }
        if ex.episodes() >= cfg.max_episodes {
            break false;
        }
        ex.run_batch(cfg.replan_every.min(cfg.max_episodes - ex.episodes()));
    };
    Ok(Exploration {
        episodes: ex.episodes(),
        w_root: ex.w_root(),
        model: ex.into_model(),
        converged,
    })
}

/// Penalized optima of the empirical model, one per β.
pub fn plan_stage2_beta(emp: &EmpiricalModel, betas: &[f64]) -> Result<BetaSweepResult> {
    beta_sweep(&emp.machine_mdp()?, betas)
}

/// Budgeted optimum of the empirical model. Budgets of at least `H` never
/// bind and return the unconstrained optimum.
pub fn plan_stage2_cmdp(emp: &EmpiricalModel, budget: f64) -> Result<CmdpSolution> {
    solve_budgeted(&emp.machine_mdp()?, budget)
}

pub(crate) fn solve_budgeted(m: &MachineMdp, budget: f64) -> Result<CmdpSolution> {
    if budget >= m.horizon() as f64 {
        let plan = backward_induction(m);
        let advice_count = expected_advice_count(m, &plan.policy)?;
        return Ok(CmdpSolution {
            value: plan.root_value(m),
            advice_count,
            policy: MixturePolicy::pure(plan.policy),
            beta_lo: 0.0,
            beta_hi: 0.0,
            iterations: 0,
        });
    }
    solve_cmdp_dual(m, &BudgetConfig::new(budget, m.horizon())?)
}

pub fn rfe_advice_run(
    mdp: &TabularMdp,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
    cfg: &RfeConfig,
    seed: u64,
) -> Result<MetricsLog> {
    let mut recorder = Recorder::new();
    rfe_advice_record(mdp, pi, theta, cfg, seed, &mut recorder)?;
    recorder.finish()
}

/// Explores with the `ε/2` threshold; at every `W` recomputation plans β = 0
/// on the current model and logs that policy's true value gap.
pub fn rfe_advice_record(
    mdp: &TabularMdp,
    pi: &HumanPolicy,
    theta: &AdherenceModel,
    cfg: &RfeConfig,
    seed: u64,
    recorder: &mut Recorder,
) -> Result<EmpiricalModel> {
    let cfg = RfeConfig {
        threshold_mode: ThresholdMode::Advice,
        ..cfg.clone()
    };
    let truth = build_machine_mdp(mdp, pi, theta)?;
    let optimal = backward_induction(&truth).root_value(&truth);
    let s1 = mdp.initial_state();
    let mut ex = Explorer::new(mdp, pi, theta, &cfg, seed)?;
    let mut updates = 0u64;
    loop {
        let empirical = if cfg.known_reward {
            ex.model()
                .machine_mdp_with_rewards(truth.rewards().to_vec())?
        } else {
            ex.model().machine_mdp()?
        };
        let policy = backward_induction(&empirical).policy;
        updates += 1;
        let gap = optimal - policy_evaluation(&truth, &policy)?.get(0, s1);
        let advice = expected_advice_count(&truth, &policy)?;
        let stopped = ex.should_stop();
        recorder.record(
            ex.episodes(),
            gap,
            advice,
            updates,
            Some(ex.w_root()),
            Some(stopped),
        )?;
        if stopped || ex.episodes() >= cfg.max_episodes {
            return Ok(ex.into_model());
        }
        ex.run_batch(cfg.replan_every.min(cfg.max_episodes - ex.episodes()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_at_zero_and_monotone() {
        let v = phi(0, 3, 3, 4, 0.1, 0.1);
        let expected =
            6.0 * (4.0 * 4.0 * 3.0 * 3.0 / 0.01f64).ln() + 3.0 * (8.0 * std::f64::consts::E).ln();
        assert!((v - expected).abs() < 1e-12);
        for n in 0..100 {
            assert!(phi(n + 1, 3, 3, 4, 0.1, 0.1) > phi(n, 3, 3, 4, 0.1, 0.1));
        }
    }

    #[test]
    fn phi_with_unit_log_argument() {
        // 4HSA/(εδ) = e with S = A = H = 1
        let delta = 4.0 / std::f64::consts::E;
        let v = phi(5, 1, 1, 1, 1.0, delta);
        assert!((v - (6.0 + (8.0 * std::f64::consts::E * 6.0).ln())).abs() < 1e-12);
    }

    #[test]
    fn empty_model_gives_w_equal_h() {
        let emp = EmpiricalModel::new(3, 2, 2, 0);
        let w = compute_w(&emp, &RfeConfig::default());
        for h in 0..3 {
            for s in 0..2 {
                assert!(w.row(h, s).iter().all(|&x| x == 3.0));
            }
        }
        assert!(w.row(3, 0).iter().all(|&x| x == 0.0));
        assert_eq!(w_greedy_policy(&w).actions(), &[0; 6]);
    }

    #[test]
    fn single_cell_w_by_hand() {
        let mut emp = EmpiricalModel::new(1, 1, 1, 0);
        for _ in 0..4 {
            emp.record(0, 0, 0, 0, 0.5);
        }
        let cfg = RfeConfig {
            epsilon: 0.5,
            delta: 0.5,
            ..RfeConfig::default()
        };
        let w = compute_w(&emp, &cfg);
        let expected = (16.0 * phi(4, 1, 2, 1, 0.5, 0.5) / 4.0).min(1.0);
        assert_eq!(w.get(0, 0, 0), expected);
    }

    #[test]
    fn terminal_layer_is_the_bonus() {
        let mut emp = EmpiricalModel::new(1, 1, 1, 0);
        let n = 1_000_000u64;
        for _ in 0..n {
            emp.record(0, 0, 1, 0, 0.0);
        }
        let cfg = RfeConfig::default();
        let w = compute_w(&emp, &cfg);
        let bonus = 16.0 * phi(n, 1, 2, 1, cfg.epsilon, cfg.delta) / n as f64;
        assert!(bonus < 1.0);
        assert_eq!(w.get(0, 0, 1), bonus);
        assert_eq!(w.get(0, 0, 0), 1.0);
    }

    #[test]
    fn stopping_boundaries() {
        let zero = WTable::from_values(1, 1, 2, vec![0.0, 0.0]).unwrap();
        let pol = w_greedy_policy(&zero);
        assert!(stopping_check(&zero, &pol, 0, 0.0));
        let full = WTable::from_values(1, 1, 2, vec![1.0, 1.0]).unwrap();
        assert!(!stopping_check(&full, &w_greedy_policy(&full), 0, 0.05));
        // √W = 1/8 gives W + 4e√W = 1/64 + e/2 exactly at the boundary
        let root = 0.015625;
        let t = stopping_statistic(root);
        assert_eq!(t, 0.015625 + 0.5 * std::f64::consts::E);
        let edge = WTable::from_values(1, 1, 2, vec![root, 0.0]).unwrap();
        assert!(stopping_check(&edge, &w_greedy_policy(&edge), 0, t));
        assert!(!stopping_check(
            &edge,
            &w_greedy_policy(&edge),
            0,
            t - 1e-12
        ));
    }

    #[test]
    fn empirical_rows_and_uniform_fallback() {
        let mut emp = EmpiricalModel::new(1, 3, 1, 0);
        emp.record(0, 0, 0, 1, 1.0);
        emp.record(0, 0, 0, 2, 0.0);
        emp.record(0, 0, 0, 1, 1.0);
        emp.record(0, 0, 0, 1, 0.0);
        assert_eq!(emp.count(0, 0, 0), 4);
        assert_eq!(emp.transition_count(0, 0, 0, 1), 3);
        assert_eq!(emp.reward_mean(0, 0, 0), 0.5);
        let m = emp.machine_mdp().unwrap();
        assert_eq!(m.kernel().dense_row(0, 0, 0), vec![0.0, 0.75, 0.25]);
        assert_eq!(m.kernel().dense_row(0, 1, 1), vec![1.0 / 3.0; 3]);
        assert_eq!(m.reward(0, 1, 1), 0.0);
    }

    #[test]
    fn budget_at_horizon_is_unconstrained() {
        let mut emp = EmpiricalModel::new(2, 1, 1, 0);
        for h in 0..2 {
            emp.record(h, 0, 0, 0, 1.0);
            emp.record(h, 0, 1, 0, 0.2);
        }
        let sol = plan_stage2_cmdp(&emp, 2.0).unwrap();
        assert_eq!(sol.policy.q(), 1.0);
        assert_eq!(sol.value, 2.0);
        assert_eq!(sol.advice_count, 2.0);
    }
}
