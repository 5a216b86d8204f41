//! Car driving on a road of parallel lanes that scrolls one row per step.
//!
//! The state is the car's lane and the cell types of the next two rows. The
//! car moves Left, Straight or Right into the next row and collects the
//! landing cell's reward; landing on another car, or steering off the road,
//! destroys it. A fresh row of i.i.d. cells then enters the window.

use serde::{Deserialize, Serialize};

use super::Instance;
use crate::error::{Error, Result};
use crate::kernel::KernelBuilder;
use crate::model::{AdherenceModel, HumanPolicy, TabularMdp};

pub const LEFT: usize = 0;
pub const STRAIGHT: usize = 1;
pub const RIGHT: usize = 2;
pub const NUM_ACTIONS: usize = 3;

pub const EMPTY: usize = 0;
pub const STONE: usize = 1;
pub const CAR: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarConfig {
    pub lanes: usize,
    pub horizon: usize,
    /// Probabilities of empty, stone and car for each new cell.
    pub cell_probs: [f64; 3],
    /// Rewards for landing on empty, stone and car cells.
    pub cell_rewards: [f64; 3],
    pub straight_adherence: f64,
    pub turn_adherence: f64,
}

impl Default for CarConfig {
    fn default() -> Self {
        CarConfig {
            lanes: 3,
            horizon: 10,
            cell_probs: [0.4, 0.3, 0.3],
            cell_rewards: [1.0, 0.5, 0.0],
            straight_adherence: 0.9,
            turn_adherence: 0.7,
        }
    }
}

impl CarConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.lanes) {
            return Err(Error::config(
                "lanes",
                format!("{} outside 1..=4", self.lanes),
            ));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be positive"));
        }
        let sum: f64 = self.cell_probs.iter().sum();
        if self.cell_probs.iter().any(|p| p.is_nan() || *p < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::config(
                "cell_probs",
                format!("{:?} is not a distribution", self.cell_probs),
            ));
        }
        if self.cell_rewards.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::config("cell_rewards", "entries must lie in [0, 1]"));
        }
        for (field, v) in [
            ("straight_adherence", self.straight_adherence),
            ("turn_adherence", self.turn_adherence),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(field, format!("{v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> CarLayout {
        CarLayout { lanes: self.lanes }
    }
}

/// State indexing: `lane · 9^lanes + row1 · 3^lanes + row2`, where a row
/// code is `Σ_l type_l · 3^l`; the last index is the crash state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CarLayout {
    pub lanes: usize,
}

impl CarLayout {
    /// Number of distinct rows, `3^lanes`.
    pub fn num_rows(&self) -> usize {
        3usize.pow(self.lanes as u32)
    }

    pub fn num_states(&self) -> usize {
        self.lanes * self.num_rows() * self.num_rows() + 1
    }

    pub fn crashed(&self) -> usize {
        self.num_states() - 1
    }

    pub fn encode(&self, lane: usize, row1: usize, row2: usize) -> usize {
        (lane * self.num_rows() + row1) * self.num_rows() + row2
    }

    /// `(lane, row1, row2)`, or `None` for the crash state.
    pub fn decode(&self, s: usize) -> Option<(usize, usize, usize)> {
        let n = self.num_rows();
        (s < self.crashed()).then(|| (s / (n * n), (s / n) % n, s % n))
    }

    /// Type of the cell in `lane` of a row code.
    pub fn cell(&self, row: usize, lane: usize) -> usize {
        (row / 3usize.pow(lane as u32)) % 3
    }

    /// Lane reached by `action`, if it stays on the road.
    pub fn target_lane(&self, lane: usize, action: usize) -> Option<usize> {
        (lane + action).checked_sub(1).filter(|&l| l < self.lanes)
    }
}

pub fn build_car(cfg: &CarConfig) -> Result<Instance> {
    cfg.validate()?;
    let layout = cfg.layout();
    let num_states = layout.num_states();
    let crashed = layout.crashed();
    let row_probs: Vec<f64> = (0..layout.num_rows())
        .map(|row| {
            (0..cfg.lanes)
                .map(|l| cfg.cell_probs[layout.cell(row, l)])
                .product()
        })
        .collect();

    let mut b = KernelBuilder::stationary(cfg.horizon, num_states, NUM_ACTIONS);
    let mut layer = Vec::with_capacity(num_states * NUM_ACTIONS);
    for s in 0..num_states {
        for a in 0..NUM_ACTIONS {
            let landing = layout.decode(s).and_then(|(lane, row1, row2)| {
                layout
                    .target_lane(lane, a)
                    .map(|nl| (nl, layout.cell(row1, nl), row2))
            });
            match landing {
                Some((nl, kind, row2)) if kind != CAR => {
                    let entries = row_probs
                        .iter()
                        .enumerate()
                        .map(|(fresh, &p)| (layout.encode(nl, row2, fresh), p));
                    b.push_row(entries)?;
                    layer.push(cfg.cell_rewards[kind]);
                }
                Some(_) => {
                    b.push_row([(crashed, 1.0)])?;
                    layer.push(cfg.cell_rewards[CAR]);
                }
                None => {
                    b.push_row([(crashed, 1.0)])?;
                    layer.push(0.0);
                }
            }
        }
    }
    let reward = layer.repeat(cfg.horizon);
    let s1 = layout.encode(cfg.lanes / 2, 0, 0);
    let mdp = TabularMdp::new(b.finish()?, reward, s1)?;

    let pi = HumanPolicy::from_fn(cfg.horizon, num_states, NUM_ACTIONS, |_, s| {
        human_row(&layout, s)
    })?;
    let theta = (0..num_states)
        .flat_map(|_| {
            [
                cfg.turn_adherence,
                cfg.straight_adherence,
                cfg.turn_adherence,
            ]
        })
        .collect();
    Instance::new(
        mdp,
        pi,
        AdherenceModel::new(num_states, NUM_ACTIONS, theta)?,
    )
}

/// A driver who only sees cars in the next row: uniform over on-road moves
/// that avoid them, or over all on-road moves if none does.
fn human_row(layout: &CarLayout, s: usize) -> Vec<f64> {
    let Some((lane, row1, _)) = layout.decode(s) else {
        return vec![1.0 / NUM_ACTIONS as f64; NUM_ACTIONS];
    };
    let on_road: Vec<usize> = (0..NUM_ACTIONS)
        .filter(|&a| layout.target_lane(lane, a).is_some())
        .collect();
    let safe: Vec<usize> = on_road
        .iter()
        .copied()
        .filter(|&a| layout.cell(row1, layout.target_lane(lane, a).unwrap()) != CAR)
        .collect();
    let chosen = if safe.is_empty() { on_road } else { safe };
    let mut row = vec![0.0; NUM_ACTIONS];
    for &a in &chosen {
        row[a] = 1.0 / chosen.len() as f64;
    }
    row
}
