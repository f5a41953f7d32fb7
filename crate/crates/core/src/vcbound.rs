//! Bound functions and the grid searches that turn a loss-gap curve into an
//! estimate of the VC dimension.
//!
//! The primary bound is `phi(h, n, c) = c * sqrt((h / n) * ln(2 n e / h))`.
//! The constant `c` is calibrated first, at the VC dimension the conjectured
//! model is known to have; `h` is then searched with `c` held fixed. Both
//! searches minimize `sum_l (xi(n_l) - phi(h, n_l, c))^2` over a grid and
//! break ties toward the smallest value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::xi::XiCurve;

/// Constants of the original bound with the table-free interpolation.
pub const LEGACY_A: f64 = 0.16;
pub const LEGACY_B: f64 = 1.2;
pub const LEGACY_K: f64 = 0.14927;

pub fn phi(h: usize, n: usize, c: f64) -> Result<f64> {
    if h == 0 || n == 0 {
        return Err(Error::Domain(format!("phi needs positive h and n (h={h}, n={n})")));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("phi needs a nonnegative constant, got {c}")));
    }
    let (h, n) = (h as f64, n as f64);
    let ratio = 2.0 * n * std::f64::consts::E / h;
    if ratio <= 1.0 {
        return Err(Error::Domain(format!("2ne/h = {ratio} must exceed 1 (h={h}, n={n})")));
    }
    Ok(c * ((h / n) * ratio.ln()).sqrt())
}

/// Second branch of the original bound as a function of `t = n / h`.
pub fn legacy_second_branch(t: f64) -> f64 {
    let log_term = (2.0 * t).ln() + 1.0;
    let shifted = t - LEGACY_K;
    LEGACY_A * (log_term / shifted) * ((1.0 + LEGACY_B * shifted / log_term).sqrt() + 1.0)
}

/// The original bound: 1 when `n / h <= 0.5`, the interpolating second
/// branch otherwise.
pub fn phi_vapnik_legacy(h: usize, n: usize) -> f64 {
    let t = n as f64 / h as f64;
    if t <= 0.5 {
        1.0
    } else {
        legacy_second_branch(t)
    }
}

pub fn objective(curve: &XiCurve, h: usize, c: f64) -> Result<f64> {
    curve.points.iter().try_fold(0.0, |acc, p| {
        let r = p.xi - phi(h, p.n, c)?;
        Ok(acc + r * r)
    })
}

pub fn objective_legacy(curve: &XiCurve, h: usize) -> f64 {
    curve
        .points
        .iter()
        .map(|p| (p.xi - phi_vapnik_legacy(h, p.n)).powi(2))
        .sum()
}

/// Evenly spaced candidate values for `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for CGrid {
    fn default() -> Self {
        CGrid {
            lo: 0.01,
            hi: 100.0,
            step: 0.01,
        }
    }
}

impl CGrid {
    pub fn len(&self) -> usize {
        if !(self.step > 0.0) || self.hi < self.lo || !self.lo.is_finite() || !self.hi.is_finite() {
            return 0;
        }
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.value(i))
    }
}

/// How the candidate values of `h` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HGridMode {
    /// `1..=max(design points)`, cut where `2 n e / h > 1` stops holding at
    /// the smallest design point.
    #[default]
    Full,
    /// `1..=min(design points)`.
    CappedAtMinDesign,
    /// An explicit inclusive range.
    Range { lo: usize, hi: usize },
}

pub fn h_grid(mode: HGridMode, design_points: &[usize]) -> Result<Vec<usize>> {
    let (Some(&n_min), Some(&n_max)) = (design_points.iter().min(), design_points.iter().max()) else {
        return Err(Error::Empty("design points"));
    };
    let in_domain = |h: usize| phi(h, n_min, 1.0).is_ok();
    let grid: Vec<usize> = match mode {
        HGridMode::Full => (1..=n_max).take_while(|&h| in_domain(h)).collect(),
        HGridMode::CappedAtMinDesign => (1..=n_min).collect(),
        HGridMode::Range { lo, hi } => {
            if lo == 0 || hi < lo {
                return Err(Error::config(format!("invalid h range {lo}..={hi}")));
            }
            (lo..=hi).collect()
        }
    };
    if grid.is_empty() {
        return Err(Error::Empty("h grid"));
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcFit {
    pub h_hat: usize,
    /// Calibrated constant; `None` for the legacy bound, which has none.
    pub c_hat: Option<f64>,
    pub objective_at_h: Vec<(usize, f64)>,
    /// `xi(n_l) - bound(h_hat, n_l)` per design point.
    pub residuals: Vec<f64>,
}

impl VcFit {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("h,objective\n");
        for (h, f) in &self.objective_at_h {
            out.push_str(&format!("{h},{f}\n"));
        }
        out
    }
}

/// Index of the first minimum.
fn argmin(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    values.enumerate().fold(None, |best, (i, v)| match best {
        Some((_, b)) if v >= b => best,
        _ => Some((i, v)),
    })
}

/// The `c` on the grid minimizing the objective at `h_known`.
pub fn calibrate_c(curve: &XiCurve, h_known: usize, grid: &CGrid) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Empty("c grid"));
    }
    if grid.lo < 0.0 {
        return Err(Error::config("c grid must be nonnegative"));
    }
    let shapes = curve
        .points
        .iter()
        .map(|p| phi(h_known, p.n, 1.0).map(|s| (p.xi, s)))
        .collect::<Result<Vec<_>>>()?;
    let (i, _) = argmin(grid.values().map(|c| {
        shapes
            .iter()
            .map(|&(xi, s)| (xi - c * s).powi(2))
            .sum::<f64>()
    }))
    .expect("nonempty grid");
    Ok(grid.value(i))
}

pub fn estimate_h(curve: &XiCurve, c_hat: f64, h_grid: &[usize]) -> Result<VcFit> {
    if h_grid.is_empty() {
        return Err(Error::Empty("h grid"));
    }
    let objective_at_h = h_grid
        .iter()
        .map(|&h| objective(curve, h, c_hat).map(|f| (h, f)))
        .collect::<Result<Vec<_>>>()?;
    let (i, _) = argmin(objective_at_h.iter().map(|&(_, f)| f)).expect("nonempty grid");
    let h_hat = h_grid[i];
    let residuals = curve
        .points
        .iter()
        .map(|p| phi(h_hat, p.n, c_hat).map(|v| p.xi - v))
        .collect::<Result<Vec<_>>>()?;
    Ok(VcFit {
        h_hat,
        c_hat: Some(c_hat),
        objective_at_h,
        residuals,
    })
}

pub fn estimate_h_legacy(curve: &XiCurve, h_grid: &[usize]) -> Result<VcFit> {
    if h_grid.is_empty() {
        return Err(Error::Empty("h grid"));
    }
    let objective_at_h: Vec<(usize, f64)> = h_grid.iter().map(|&h| (h, objective_legacy(curve, h))).collect();
    let (i, _) = argmin(objective_at_h.iter().map(|&(_, f)| f)).expect("nonempty grid");
    let h_hat = h_grid[i];
    Ok(VcFit {
        h_hat,
        c_hat: None,
        objective_at_h,
        residuals: curve
            .points
            .iter()
            .map(|p| p.xi - phi_vapnik_legacy(h_hat, p.n))
            .collect(),
    })
}

/// Calibrates `c` at `h_known`, then searches `h` with that `c`.
pub fn fit_curve(curve: &XiCurve, h_known: usize, c_grid: &CGrid, h_grid: &[usize]) -> Result<VcFit> {
    let c_hat = calibrate_c(curve, h_known, c_grid)?;
    estimate_h(curve, c_hat, h_grid)
}
