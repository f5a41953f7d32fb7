//! Equal-width discretization of bounded losses.
//!
//! A loss `q` in `[0, B]` is mapped to the interval
//! `I_j = [jB/m, (j+1)B/m)` that contains it and replaced by that
//! interval's midpoint `(2j+1)B/(2m)`. Losses equal to (or above) `B` land in
//! the last interval, so the final interval is effectively closed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalGrid {
    m: usize,
    bound: f64,
}

impl IntervalGrid {
    pub fn new(m: usize, bound: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::config("number of intervals must be at least 1"));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::config(format!("loss bound must be positive, got {bound}")));
        }
        Ok(IntervalGrid { m, bound })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn width(&self) -> f64 {
        self.bound / self.m as f64
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        (2 * j + 1) as f64 * self.bound / (2 * self.m) as f64
    }

    /// Interval index of `q`; negative losses count as 0 and losses at or
    /// above the bound are clamped into the top interval.
    pub fn locate(&self, q: f64) -> usize {
        if !(q > 0.0) {
            return 0;
        }
        let j = (q * self.m as f64 / self.bound).floor();
        if j >= (self.m - 1) as f64 {
            self.m - 1
        } else {
            j as usize
        }
    }
}

pub fn discretize_loss(q: f64, g: &IntervalGrid) -> (usize, f64) {
    let j = g.locate(q);
    (j, g.midpoint(j))
}

/// Per-interval empirical risks `n_j * midpoint_j / n` of one loss sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRisks {
    pub per_interval: Vec<f64>,
    pub counts: Vec<usize>,
    pub n: usize,
    pub grid: IntervalGrid,
}

impl IntervalRisks {
    /// Sum of the per-interval risks: the discretized mean loss.
    pub fn total(&self) -> f64 {
        self.per_interval.iter().sum()
    }
}

pub fn interval_risks(losses: &[f64], g: &IntervalGrid) -> Result<IntervalRisks> {
    if losses.is_empty() {
        return Err(Error::Empty("loss vector"));
    }
    let mut counts = vec![0usize; g.m];
    for &q in losses {
        counts[g.locate(q)] += 1;
    }
    let n = losses.len();
    let per_interval = counts
        .iter()
        .enumerate()
        .map(|(j, &c)| c as f64 * g.midpoint(j) / n as f64)
        .collect();
    Ok(IntervalRisks {
        per_interval,
        counts,
        n,
        grid: *g,
    })
}

/// Per-interval absolute differences `|r1_j - r2_j|`.
pub fn gap(r1: &IntervalRisks, r2: &IntervalRisks) -> Result<Vec<f64>> {
    if r1.grid != r2.grid {
        return Err(Error::GridMismatch(r1.grid.m, r2.grid.m, r1.grid.bound, r2.grid.bound));
    }
    Ok(r1
        .per_interval
        .iter()
        .zip(&r2.per_interval)
        .map(|(a, b)| (a - b).abs())
        .collect())
}
