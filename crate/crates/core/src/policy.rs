//! Advice policies and the tables produced by planning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic Markov advice policy `act[h][s] ∈ 0..=A` (`A` = defer).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicPolicy {
    num_states: usize,
    num_actions: usize,
    act: Vec<usize>,
}

impl DeterministicPolicy {
    pub fn new(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        act: Vec<usize>,
    ) -> Result<Self> {
        if act.len() != horizon * num_states {
            return Err(Error::dimension(
                "policy table",
                horizon * num_states,
                act.len(),
            ));
        }
        if let Some(i) = act.iter().position(|&a| a > num_actions) {
            return Err(Error::invalid(
                "policy action",
                format!("(h={}, s={})", i / num_states, i % num_states),
                format!("{} exceeds defer index {num_actions}", act[i]),
            ));
        }
        Ok(DeterministicPolicy {
            num_states,
            num_actions,
            act,
        })
    }

    /// Defers at every step and state; its value is the human's unassisted value.
    pub fn always_defer(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        DeterministicPolicy {
            num_states,
            num_actions,
            act: vec![num_actions; horizon * num_states],
        }
    }

    pub fn constant(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        action: usize,
    ) -> Result<Self> {
        Self::new(
            horizon,
            num_states,
            num_actions,
            vec![action; horizon * num_states],
        )
    }

    pub fn horizon(&self) -> usize {
        self.act.len() / self.num_states
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn defer(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn action(&self, h: usize, s: usize) -> usize {
        self.act[h * self.num_states + s]
    }

    #[inline]
    pub fn advises(&self, h: usize, s: usize) -> bool {
        self.action(h, s) != self.num_actions
    }

    pub fn actions(&self) -> &[usize] {
        &self.act
    }

    /// Number of `(h, s)` cells where the policy advises.
    pub fn num_advised_cells(&self) -> usize {
        self.act.iter().filter(|&&a| a != self.num_actions).count()
    }

    pub fn to_file(&self) -> PolicyFile {
        PolicyFile {
            num_actions: self.num_actions,
            act: self
                .act
                .chunks(self.num_states)
                .map(<[usize]>::to_vec)
                .collect(),
            mixture: None,
        }
    }
}

/// Plays `first` for the whole episode with probability `q`, else `second`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePolicy {
    pub first: DeterministicPolicy,
    pub second: DeterministicPolicy,
    q: f64,
}

impl MixturePolicy {
    pub fn new(first: DeterministicPolicy, second: DeterministicPolicy, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid(
                "mixing weight",
                "q",
                format!("{q} outside [0, 1]"),
            ));
        }
        if first.act.len() != second.act.len() || first.num_actions != second.num_actions {
            return Err(Error::dimension(
                "mixture components",
                format!("{}x{}", first.act.len(), first.num_actions),
                format!("{}x{}", second.act.len(), second.num_actions),
            ));
        }
        Ok(MixturePolicy { first, second, q })
    }

    pub fn pure(policy: DeterministicPolicy) -> Self {
        MixturePolicy {
            second: policy.clone(),
            first: policy,
            q: 1.0,
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn to_file(&self) -> PolicyFile {
        let first = self.first.to_file();
        PolicyFile {
            num_actions: first.num_actions,
            act: first.act,
            mixture: Some(MixtureFile {
                q: self.q,
                second: self.second.to_file().act,
            }),
        }
    }
}

/// Either kind of advice policy.
#[derive(Debug, Clone, PartialEq)]
pub enum AdvicePolicy {
    Deterministic(DeterministicPolicy),
    Mixture(MixturePolicy),
}

impl AdvicePolicy {
    pub fn to_file(&self) -> PolicyFile {
        match self {
            AdvicePolicy::Deterministic(p) => p.to_file(),
            AdvicePolicy::Mixture(m) => m.to_file(),
        }
    }

    pub fn from_file(file: &PolicyFile) -> Result<Self> {
        let table = |rows: &[Vec<usize>]| -> Result<DeterministicPolicy> {
            let num_states = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != num_states) {
                return Err(Error::Parse {
                    context: "policy file".into(),
                    message: "ragged act table".into(),
                });
            }
            DeterministicPolicy::new(rows.len(), num_states, file.num_actions, rows.concat())
        };
        let first = table(&file.act)?;
        match &file.mixture {
            None => Ok(AdvicePolicy::Deterministic(first)),
            Some(m) => Ok(AdvicePolicy::Mixture(MixturePolicy::new(
                first,
                table(&m.second)?,
                m.q,
            )?)),
        }
    }
}

/// JSON form of a policy: `act[h][s]`, plus the mixing data for mixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    /// Number of advisable actions; `act` entries equal to this value defer.
    pub num_actions: usize,
    pub act: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<MixtureFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureFile {
    /// Probability of playing `act` (the first component) for a whole episode.
    pub q: f64,
    pub second: Vec<Vec<usize>>,
}

/// `V[h][s]` for `h ∈ 0..=H`; the last layer is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    num_states: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn zeros(horizon: usize, num_states: usize) -> Self {
        ValueTable {
            num_states,
            values: vec![0.0; (horizon + 1) * num_states],
        }
    }

    pub fn horizon(&self) -> usize {
        self.values.len() / self.num_states - 1
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize) -> f64 {
        self.values[h * self.num_states + s]
    }

    #[inline]
    pub fn layer(&self, h: usize) -> &[f64] {
        &self.values[h * self.num_states..(h + 1) * self.num_states]
    }

    #[inline]
    pub(crate) fn layer_mut(&mut self, h: usize) -> &mut [f64] {
        &mut self.values[h * self.num_states..(h + 1) * self.num_states]
    }

    /// `q·a + (1 − q)·b`, entrywise.
    pub fn mix(a: &ValueTable, b: &ValueTable, q: f64) -> ValueTable {
        ValueTable {
            num_states: a.num_states,
            values: a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| q * x + (1.0 - q) * y)
                .collect(),
        }
    }
}

/// `Q[h][s][a]` for `h ∈ 0..=H`, machine actions `0..=A`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    num_states: usize,
    num_machine_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn zeros(horizon: usize, num_states: usize, num_machine_actions: usize) -> Self {
        QTable {
            num_states,
            num_machine_actions,
            values: vec![0.0; (horizon + 1) * num_states * num_machine_actions],
        }
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

    #[inline]
    pub(crate) fn row_mut(&mut self, h: usize, s: usize) -> &mut [f64] {
        let i = (h * self.num_states + s) * self.num_machine_actions;
        &mut self.values[i..i + self.num_machine_actions]
    }
}

/// Per-step occupancy `mu[h][s][a]` of machine state-action pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMeasure {
    num_states: usize,
    num_machine_actions: usize,
    mass: Vec<f64>,
}

impl OccupancyMeasure {
    pub(crate) fn zeros(horizon: usize, num_states: usize, num_machine_actions: usize) -> Self {
        OccupancyMeasure {
            num_states,
            num_machine_actions,
            mass: vec![0.0; horizon * num_states * num_machine_actions],
        }
    }

    pub fn horizon(&self) -> usize {
        self.mass.len() / (self.num_states * self.num_machine_actions)
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize, a: usize) -> f64 {
        self.mass[(h * self.num_states + s) * self.num_machine_actions + a]
    }

    #[inline]
    pub(crate) fn add(&mut self, h: usize, s: usize, a: usize, m: f64) {
        self.mass[(h * self.num_states + s) * self.num_machine_actions + a] += m;
    }

    pub fn step_mass(&self, h: usize) -> f64 {
        let n = self.num_states * self.num_machine_actions;
        self.mass[h * n..(h + 1) * n].iter().sum()
    }

    /// Mass on advising (non-defer) actions at step `h`, summed over states.
    pub fn advice_mass(&self, h: usize) -> f64 {
        let defer = self.num_machine_actions - 1;
        (0..self.num_states)
            .flat_map(|s| (0..defer).map(move |a| (s, a)))
            .map(|(s, a)| self.get(h, s, a))
            .sum()
    }
}
