//! Sparse, time-indexed transition kernels.
//!
//! Rows are stored in compressed form, indexed by `(h, s, a)` in row-major
//! order. A row is either an explicit list of `(next_state, probability)`
//! pairs or the uniform distribution over all states; the latter keeps
//! empirical models with many unvisited pairs from materializing `S`
//! entries per row. A stationary kernel stores a single layer shared by
//! every step.

use crate::error::{Error, Result};

/// Probability-sum tolerance used for every row check.
pub const ROW_SUM_TOL: f64 = 1e-10;

/// One transition row.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Sparse {
        targets: &'a [usize],
        probs: &'a [f64],
    },
    Uniform {
        num_states: usize,
    },
}

impl Row<'_> {
    /// `Σ_{s'} p(s') · values[s']`, with `uniform_mean` the precomputed mean of `values`.
    #[inline]
    pub fn expect_with_mean(&self, values: &[f64], uniform_mean: f64) -> f64 {
        match *self {
            Row::Sparse { targets, probs } => targets
                .iter()
                .zip(probs)
                .map(|(&t, &p)| p * values[t])
                .sum(),
            Row::Uniform { .. } => uniform_mean,
        }
    }

    #[inline]
    pub fn expect(&self, values: &[f64]) -> f64 {
        match *self {
            Row::Sparse { .. } => self.expect_with_mean(values, 0.0),
            Row::Uniform { num_states } => values.iter().sum::<f64>() / num_states as f64,
        }
    }

    pub fn to_dense(&self, num_states: usize) -> Vec<f64> {
        match *self {
            Row::Sparse { targets, probs } => {
                let mut out = vec![0.0; num_states];
                for (&t, &p) in targets.iter().zip(probs) {
                    out[t] += p;
                }
                out
            }
            Row::Uniform { num_states } => vec![1.0 / num_states as f64; num_states],
        }
    }

    /// Inverse-CDF sample given `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> usize {
        match *self {
            Row::Sparse { targets, probs } => {
                let mut acc = 0.0;
                for (&t, &p) in targets.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return t;
                    }
                }
                // rounding: fall back to the last positive entry
                targets
                    .iter()
                    .zip(probs)
                    .rev()
                    .find(|(_, &p)| p > 0.0)
                    .map(|(&t, _)| t)
                    .unwrap_or(targets[0])
            }
            Row::Uniform { num_states } => ((u * num_states as f64) as usize).min(num_states - 1),
        }
    }
}

/// Transition kernel `p[h][s][a] → Δ(S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    num_states: usize,
    num_actions: usize,
    horizon: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    probs: Vec<f64>,
    uniform: Vec<bool>,
    stationary: bool,
}

impl Kernel {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// True when every step shares one layer of rows.
    pub fn is_stationary(&self) -> bool {
        self.stationary
    }

    /// Number of distinct stored layers (1 when stationary).
    pub fn num_layers(&self) -> usize {
        if self.stationary {
            1
        } else {
            self.horizon
        }
    }

    #[inline]
    fn index(&self, h: usize, s: usize, a: usize) -> usize {
        debug_assert!(h < self.horizon && s < self.num_states && a < self.num_actions);
        let h = if self.stationary { 0 } else { h };
        (h * self.num_states + s) * self.num_actions + a
    }

    #[inline]
    pub fn row(&self, h: usize, s: usize, a: usize) -> Row<'_> {
        let i = self.index(h, s, a);
        if self.uniform[i] {
            Row::Uniform {
                num_states: self.num_states,
            }
        } else {
            let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
            Row::Sparse {
                targets: &self.targets[lo..hi],
                probs: &self.probs[lo..hi],
            }
        }
    }

    /// Checks nonnegativity and unit row sums; reports the first bad `(h, s, a)`.
    pub fn validate(&self) -> Result<()> {
        for h in 0..self.num_layers() {
            for s in 0..self.num_states {
                for a in 0..self.num_actions {
                    if let Row::Sparse { targets, probs } = self.row(h, s, a) {
                        if let Some((&t, &p)) = targets
                            .iter()
                            .zip(probs)
                            .find(|(_, p)| p.is_nan() || **p < 0.0)
                        {
                            return Err(Error::invalid(
                                "transition probability",
                                format!("(h={h}, s={s}, a={a}, s'={t})"),
                                format!("negative or non-finite entry {p}"),
                            ));
                        }
                        let sum: f64 = probs.iter().sum();
                        if (sum - 1.0).abs() > ROW_SUM_TOL {
                            return Err(Error::invalid(
                                "transition row",
                                format!("(h={h}, s={s}, a={a})"),
                                format!("row sums to {sum}"),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Dense copy of the row, for serialization and tests.
    pub fn dense_row(&self, h: usize, s: usize, a: usize) -> Vec<f64> {
        self.row(h, s, a).to_dense(self.num_states)
    }
}

/// Appends rows in `(h, s, a)` order (or `(s, a)` order when stationary).
#[derive(Debug)]
pub struct KernelBuilder {
    kernel: Kernel,
    scratch: Vec<(usize, f64)>,
}

impl KernelBuilder {
    pub fn new(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        Self::with_layers(horizon, num_states, num_actions, false)
    }

    /// A kernel whose `S·A` rows apply at every step.
    pub fn stationary(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        Self::with_layers(horizon, num_states, num_actions, true)
    }

    fn with_layers(
        horizon: usize,
        num_states: usize,
        num_actions: usize,
        stationary: bool,
    ) -> Self {
        let layers = if stationary { 1 } else { horizon };
        let rows = layers * num_states * num_actions;
        let mut offsets = Vec::with_capacity(rows + 1);
        offsets.push(0);
        KernelBuilder {
            kernel: Kernel {
                num_states,
                num_actions,
                horizon,
                offsets,
                targets: Vec::new(),
                probs: Vec::new(),
                uniform: Vec::with_capacity(rows),
                stationary,
            },
            scratch: Vec::new(),
        }
    }

    /// Pushes a row given as `(next_state, probability)` pairs. Duplicate
    /// targets are merged and zero entries dropped.
    pub fn push_row<I: IntoIterator<Item = (usize, f64)>>(&mut self, entries: I) -> Result<()> {
        self.scratch.clear();
        for (t, p) in entries {
            if t >= self.kernel.num_states {
                return Err(Error::invalid(
                    "transition target",
                    format!("row {}", self.kernel.uniform.len()),
                    format!("state {t} out of range"),
                ));
            }
            if p != 0.0 {
                self.scratch.push((t, p));
            }
        }
        self.scratch.sort_by_key(|&(t, _)| t);
        let k = &mut self.kernel;
        let mut last: Option<usize> = None;
        for &(t, p) in &self.scratch {
            if last == Some(t) {
                *k.probs.last_mut().unwrap() += p;
            } else {
                k.targets.push(t);
                k.probs.push(p);
                last = Some(t);
            }
        }
        k.offsets.push(k.targets.len());
        k.uniform.push(false);
        Ok(())
    }

    pub fn push_dense(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.kernel.num_states {
            return Err(Error::dimension(
                "transition row",
                self.kernel.num_states,
                row.len(),
            ));
        }
        self.push_row(row.iter().copied().enumerate())
    }

    pub fn push_uniform(&mut self) {
        let k = &mut self.kernel;
        k.offsets.push(k.targets.len());
        k.uniform.push(true);
    }

    pub fn finish(self) -> Result<Kernel> {
        let k = self.kernel;
        let expected = k.num_layers() * k.num_states * k.num_actions;
        if k.uniform.len() != expected {
            return Err(Error::dimension("kernel rows", expected, k.uniform.len()));
        }
        Ok(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_duplicates_and_drops_zeros() {
        let mut b = KernelBuilder::new(1, 3, 1);
        b.push_row([(2, 0.25), (0, 0.0), (2, 0.25), (1, 0.5)])
            .unwrap();
        b.push_uniform();
        b.push_uniform();
        let k = b.finish().unwrap();
        match k.row(0, 0, 0) {
            Row::Sparse { targets, probs } => {
                assert_eq!(targets, &[1, 2]);
                assert_eq!(probs, &[0.5, 0.5]);
            }
            Row::Uniform { .. } => panic!("expected sparse"),
        }
        k.validate().unwrap();
    }

    #[test]
    fn uniform_row_expectation_and_density() {
        let mut b = KernelBuilder::new(1, 4, 1);
        for _ in 0..4 {
            b.push_uniform();
        }
        let k = b.finish().unwrap();
        let v = [1.0, 2.0, 3.0, 6.0];
        assert_eq!(k.row(0, 0, 0).expect(&v), 3.0);
        assert_eq!(k.dense_row(0, 0, 0), vec![0.25; 4]);
    }

    #[test]
    fn validate_rejects_bad_sum_and_negative() {
        let mut b = KernelBuilder::new(1, 2, 1);
        b.push_dense(&[0.7, 0.7]).unwrap();
        b.push_uniform();
        let err = b.finish().unwrap().validate().unwrap_err().to_string();
        assert!(err.contains("(h=0, s=0, a=0)"), "{err}");

        let mut b = KernelBuilder::new(1, 2, 1);
        b.push_dense(&[1.5, -0.5]).unwrap();
        b.push_uniform();
        let err = b.finish().unwrap().validate().unwrap_err().to_string();
        assert!(err.contains("s'=1"), "{err}");
    }

    #[test]
    fn incomplete_builder_errors() {
        let b = KernelBuilder::new(2, 2, 1);
        assert!(b.finish().is_err());
    }

    #[test]
    fn stationary_rows_repeat_over_steps() {
        let mut b = KernelBuilder::stationary(5, 2, 1);
        b.push_dense(&[0.25, 0.75]).unwrap();
        b.push_uniform();
        let k = b.finish().unwrap();
        k.validate().unwrap();
        assert!(k.is_stationary());
        assert_eq!(k.dense_row(4, 0, 0), vec![0.25, 0.75]);
        assert_eq!(k.dense_row(3, 1, 0), vec![0.5, 0.5]);
    }

    #[test]
    fn sample_follows_cdf() {
        let mut b = KernelBuilder::new(1, 3, 1);
        b.push_dense(&[0.2, 0.0, 0.8]).unwrap();
        b.push_uniform();
        b.push_uniform();
        let k = b.finish().unwrap();
        let row = k.row(0, 0, 0);
        assert_eq!(row.sample(0.0), 0);
        assert_eq!(row.sample(0.19), 0);
        assert_eq!(row.sample(0.2), 2);
        assert_eq!(row.sample(0.999_999), 2);
    }
}
