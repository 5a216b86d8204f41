//! Flappy Bird on a grid of empty, star and wall cells.
//!
//! The bird starts in the leftmost column and moves one column right per
//! step, rising by one (Up) or two (Up-Up) rows or dropping by one (Down).
//! Entering a star pays 1. Hitting a wall or leaving the band of rows ends
//! the episode, as does flying past the last column; both lead to one
//! absorbing zero-reward state.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{HumanPolicyKind, Instance};
use crate::error::{Error, Result};
use crate::kernel::KernelBuilder;
use crate::model::{AdherenceModel, HumanPolicy, TabularMdp};

const DEFAULT_MAP: &str = include_str!("../../assets/flappy_default.txt");
const SMALL_MAP: &str = include_str!("../../assets/flappy_small.txt");

pub const UP: usize = 0;
pub const UP_UP: usize = 1;
pub const DOWN: usize = 2;
pub const NUM_ACTIONS: usize = 3;
const LIFT: [i64; NUM_ACTIONS] = [1, 2, -1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Empty,
    Star,
    Wall,
}

/// Grid of cells; `y = 0` is the bottom row, which is the last line of the
/// text form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl GridMap {
    /// Parses one text line per row, top row first, using `.` `*` `#`.
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim_end)
            .filter(|l| !l.is_empty())
            .collect();
        let err = |message: String| Error::Parse {
            context: "flappy map".into(),
            message,
        };
        let height = lines.len();
        if height == 0 {
            return Err(err("empty map".into()));
        }
        let width = lines[0].chars().count();
        let mut cells = vec![Cell::Empty; width * height];
        for (line_no, line) in lines.iter().enumerate() {
            if line.chars().count() != width {
                return Err(err(format!(
                    "line {} has {} cells, expected {width}",
                    line_no + 1,
                    line.chars().count()
                )));
            }
            let y = height - 1 - line_no;
            for (x, c) in line.chars().enumerate() {
                cells[x * height + y] = match c {
                    '.' => Cell::Empty,
                    '*' => Cell::Star,
                    '#' => Cell::Wall,
                    other => {
                        return Err(err(format!(
                            "line {}, column {}: unknown glyph `{other}`",
                            line_no + 1,
                            x + 1
                        )))
                    }
                };
            }
        }
        Ok(GridMap {
            width,
            height,
            cells,
        })
    }

    /// Parses and checks the declared dimensions.
    pub fn parse_with_size(text: &str, width: usize, height: usize) -> Result<Self> {
        let map = Self::parse(text)?;
        if (map.width, map.height) != (width, height) {
            return Err(Error::dimension(
                "flappy map (width, height)",
                format!("({width}, {height})"),
                format!("({}, {})", map.width, map.height),
            ));
        }
        Ok(map)
    }

    /// The shipped 7×20 map: a star-rich first phase, then two phases of walls.
    pub fn default_map() -> Self {
        Self::parse_with_size(DEFAULT_MAP, 20, 7).expect("shipped map is valid")
    }

    /// A reduced 7×8 map.
    pub fn small_map() -> Self {
        Self::parse_with_size(SMALL_MAP, 8, 7).expect("shipped map is valid")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Cell {
        self.cells[x * self.height + y]
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in (0..self.height).rev() {
            for x in 0..self.width {
                out.push(match self.get(x, y) {
                    Cell::Empty => '.',
                    Cell::Star => '*',
                    Cell::Wall => '#',
                });
            }
            out.push('\n');
        }
        out
    }

    /// Number of states: every cell plus the absorbing state.
    pub fn num_states(&self) -> usize {
        self.width * self.height + 1
    }

    /// Index of the absorbing state.
    pub fn absorbing(&self) -> usize {
        self.width * self.height
    }

    pub fn state(&self, x: usize, y: usize) -> usize {
        x * self.height + y
    }

    pub fn position(&self, s: usize) -> Option<(usize, usize)> {
        (s < self.absorbing()).then(|| (s / self.height, s % self.height))
    }

    /// Where `action` from `(x, y)` leads, and the reward for entering it.
    pub fn step(&self, x: usize, y: usize, action: usize) -> Move {
        let ny = y as i64 + LIFT[action];
        if x + 1 >= self.width {
            return Move::Finish;
        }
        if ny < 0 || ny >= self.height as i64 {
            return Move::Crash;
        }
        let ny = ny as usize;
        match self.get(x + 1, ny) {
            Cell::Wall => Move::Crash,
            Cell::Star => Move::Fly {
                x: x + 1,
                y: ny,
                star: true,
            },
            Cell::Empty => Move::Fly {
                x: x + 1,
                y: ny,
                star: false,
            },
        }
    }
}

impl FromStr for GridMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Fly {
        x: usize,
        y: usize,
        star: bool,
    },
    Crash,
    /// Past the last column.
    Finish,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlappyConfig {
    #[serde(with = "map_text")]
    pub map: GridMap,
    /// `(x, y)` of the first state.
    pub start: (usize, usize),
    pub human_policy: HumanPolicyKind,
    /// Adherence to Up and Down.
    pub adherence: f64,
    pub up_up_adherence: f64,
}

mod map_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::GridMap;

    pub fn serialize<S: Serializer>(map: &GridMap, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&map.to_text())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GridMap, D::Error> {
        GridMap::parse(&String::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl FlappyConfig {
    /// Starts in the leftmost column at mid height.
    pub fn new(map: GridMap, human_policy: HumanPolicyKind) -> Self {
        let start = (0, map.height() / 2);
        FlappyConfig {
            map,
            start,
            human_policy,
            adherence: 0.9,
            up_up_adherence: 0.7,
        }
    }
}

pub fn build_flappy(cfg: &FlappyConfig) -> Result<Instance> {
    let map = &cfg.map;
    let (sx, sy) = cfg.start;
    if sx >= map.width() || sy >= map.height() || map.get(sx, sy) == Cell::Wall {
        return Err(Error::config(
            "start",
            format!("({sx}, {sy}) is not an open cell"),
        ));
    }
    for (field, v) in [
        ("adherence", cfg.adherence),
        ("up_up_adherence", cfg.up_up_adherence),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::config(field, format!("{v} outside [0, 1]")));
        }
    }
    let horizon = map.width();
    let num_states = map.num_states();
    let dead = map.absorbing();

    let mut b = KernelBuilder::stationary(horizon, num_states, NUM_ACTIONS);
    let mut layer = Vec::with_capacity(num_states * NUM_ACTIONS);
    for s in 0..num_states {
        for a in 0..NUM_ACTIONS {
            let (next, r) = match map.position(s) {
                None => (dead, 0.0),
                Some((x, y)) => match map.step(x, y, a) {
                    Move::Fly { x, y, star } => (map.state(x, y), if star { 1.0 } else { 0.0 }),
                    Move::Crash | Move::Finish => (dead, 0.0),
                },
            };
            b.push_row([(next, 1.0)])?;
            layer.push(r);
        }
    }
    let reward = layer.repeat(horizon);
    let mdp = TabularMdp::new(b.finish()?, reward, map.state(sx, sy))?;

    let pi = match cfg.human_policy {
        HumanPolicyKind::Greedy => policy_greedy(map)?,
        HumanPolicyKind::Safe => policy_safe(map)?,
    };
    let theta = (0..num_states)
        .flat_map(|_| [cfg.adherence, cfg.up_up_adherence, cfg.adherence])
        .collect();
    Instance::new(
        mdp,
        pi,
        AdherenceModel::new(num_states, NUM_ACTIONS, theta)?,
    )
}

/// Up on even 0-based steps, Down on odd ones.
fn zig_zag(h: usize) -> Vec<f64> {
    let mut row = vec![0.0; NUM_ACTIONS];
    row[if h.is_multiple_of(2) { UP } else { DOWN }] = 1.0;
    row
}

fn uniform_over(actions: &[usize]) -> Vec<f64> {
    let mut row = vec![0.0; NUM_ACTIONS];
    for &a in actions {
        row[a] = 1.0 / actions.len() as f64;
    }
    row
}

fn preference_policy(map: &GridMap, prefer: impl Fn(Move) -> bool) -> Result<HumanPolicy> {
    HumanPolicy::from_fn(
        map.width(),
        map.num_states(),
        NUM_ACTIONS,
        |h, s| match map.position(s) {
            None => uniform_over(&[UP, UP_UP, DOWN]),
            Some((x, y)) => {
                let preferred: Vec<usize> = (0..NUM_ACTIONS)
                    .filter(|&a| prefer(map.step(x, y, a)))
                    .collect();
                if preferred.is_empty() {
                    zig_zag(h)
                } else {
                    uniform_over(&preferred)
                }
            }
        },
    )
}

/// Uniform over the moves that land on a star; zig-zag when there are none.
pub fn policy_greedy(map: &GridMap) -> Result<HumanPolicy> {
    preference_policy(map, |m| matches!(m, Move::Fly { star: true, .. }))
}

/// Uniform over the moves that do not crash; zig-zag when there are none.
pub fn policy_safe(map: &GridMap) -> Result<HumanPolicy> {
    preference_policy(map, |m| m != Move::Crash)
}
