//! Ordinary least squares for a subset of covariates, with squared losses
//! and BIC.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Relative size below which a triangular pivot or singular value is
/// treated as zero.
const RANK_TOL: f64 = 1e-10;

/// Floor applied to the residual sum of squares inside [`bic`].
pub const BIC_RSS_FLOOR: f64 = 1e-12;

/// How the VC dimension of a linear model is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VcdConvention {
    /// Number of fitted parameters, intercept included.
    #[default]
    Params,
    /// Number of covariate terms.
    Covariates,
}

/// An ordered subset of covariates (by covariate index) plus an optional
/// intercept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    term_indices: Vec<usize>,
    include_intercept: bool,
}

impl ModelSpec {
    pub fn new(term_indices: Vec<usize>, include_intercept: bool) -> Result<Self> {
        let mut sorted = term_indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("model terms must be distinct"));
        }
        if term_indices.is_empty() && !include_intercept {
            return Err(Error::config("model has no parameters"));
        }
        Ok(ModelSpec {
            term_indices,
            include_intercept,
        })
    }

    /// Intercept plus the first `k` covariates.
    pub fn prefix(k: usize) -> Self {
        ModelSpec {
            term_indices: (0..k).collect(),
            include_intercept: true,
        }
    }

    pub fn term_indices(&self) -> &[usize] {
        &self.term_indices
    }

    pub fn include_intercept(&self) -> bool {
        self.include_intercept
    }

    pub fn n_terms(&self) -> usize {
        self.term_indices.len()
    }

    /// VC dimension of the linear class: parameter count including intercept.
    pub fn known_vcd(&self) -> usize {
        self.term_indices.len() + usize::from(self.include_intercept)
    }

    pub fn vcd(&self, convention: VcdConvention) -> usize {
        match convention {
            VcdConvention::Params => self.known_vcd(),
            VcdConvention::Covariates => self.n_terms(),
        }
    }

    pub fn validate_for(&self, d: &Dataset) -> Result<()> {
        match self.term_indices.iter().find(|&&i| i >= d.n_covariates()) {
            Some(i) => Err(Error::config(format!(
                "term index {i} out of range for {} covariates",
                d.n_covariates()
            ))),
            None => Ok(()),
        }
    }
}

/// Borrowed column view of the covariates a spec uses, for repeated fits on
/// row subsets.
#[derive(Debug, Clone)]
pub(crate) struct Design<'a> {
    columns: Vec<&'a [f64]>,
    response: &'a [f64],
    intercept: bool,
}

impl<'a> Design<'a> {
    pub(crate) fn new(d: &'a Dataset, spec: &ModelSpec) -> Result<Self> {
        spec.validate_for(d)?;
        let columns = spec
            .term_indices
            .iter()
            .map(|&i| d.covariate(i).expect("validated index"))
            .collect();
        Ok(Design {
            columns,
            response: d.response(),
            intercept: spec.include_intercept,
        })
    }

    pub(crate) fn n_params(&self) -> usize {
        self.columns.len() + usize::from(self.intercept)
    }

    pub(crate) fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub(crate) fn matrix(&self, rows: &[usize]) -> DMatrix<f64> {
        let offset = usize::from(self.intercept);
        DMatrix::from_fn(rows.len(), self.n_params(), |i, j| {
            if j < offset {
                1.0
            } else {
                self.columns[j - offset][rows[i]]
            }
        })
    }

    pub(crate) fn response(&self, rows: &[usize]) -> DVector<f64> {
        DVector::from_iterator(rows.len(), rows.iter().map(|&r| self.response[r]))
    }

    pub(crate) fn response_at(&self, row: usize) -> f64 {
        self.response[row]
    }

    pub(crate) fn predict_row(&self, coef: &DVector<f64>, row: usize) -> f64 {
        let offset = usize::from(self.intercept);
        let base = if self.intercept { coef[0] } else { 0.0 };
        self.columns
            .iter()
            .enumerate()
            .fold(base, |acc, (j, col)| acc + coef[j + offset] * col[row])
    }
}

/// Least-squares coefficients for `x b ≈ y`.
///
/// Uses Householder QR when the design has full column rank and falls back
/// to the SVD pseudo-inverse otherwise, which yields the minimum-norm
/// solution.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let (rows, cols) = x.shape();
    if cols == 0 {
        return DVector::zeros(0);
    }
    if rows >= cols {
        let qr = x.clone().qr();
        let r = qr.r();
        let diag_max = r.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let full_rank =
            diag_max > 0.0 && r.diagonal().iter().all(|v| v.abs() > RANK_TOL * diag_max);
        if full_rank {
            let mut qty = y.clone();
            qr.q_tr_mul(&mut qty);
            let head = qty.rows(0, cols).into_owned();
            if let Some(b) = r.solve_upper_triangular(&head) {
                return b;
            }
        }
    }
    minimum_norm(x, y)
}

fn minimum_norm(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, v| m.max(*v));
    if smax == 0.0 {
        return DVector::zeros(x.ncols());
    }
    svd.solve(y, RANK_TOL * smax)
        .expect("U and V were requested")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    /// Intercept first when the model has one, then one per term.
    pub coefficients: Vec<f64>,
    pub spec: ModelSpec,
    /// Covariate names the coefficients refer to, in term order.
    pub term_names: Vec<String>,
    pub training_rss: f64,
}

impl FittedModel {
    pub fn intercept(&self) -> Option<f64> {
        self.spec.include_intercept.then(|| self.coefficients[0])
    }
}

pub fn fit(d: &Dataset, spec: &ModelSpec) -> Result<FittedModel> {
    let design = Design::new(d, spec)?;
    let rows: Vec<usize> = (0..d.n_rows()).collect();
    let coef = least_squares(&design.matrix(&rows), &design.response(&rows));
    let training_rss = rows
        .iter()
        .map(|&i| {
            let r = design.response_at(i) - design.predict_row(&coef, i);
            r * r
        })
        .sum();
    let names = d.covariate_names();
    Ok(FittedModel {
        coefficients: coef.iter().copied().collect(),
        spec: spec.clone(),
        term_names: spec
            .term_indices
            .iter()
            .map(|&i| names[i].to_string())
            .collect(),
        training_rss,
    })
}

/// Predictions on `d`, matching covariates by name.
pub fn predict(m: &FittedModel, d: &Dataset) -> Result<Vec<f64>> {
    let cols = m
        .term_names
        .iter()
        .map(|name| d.column(name).ok_or_else(|| Error::MissingColumn(name.clone())))
        .collect::<Result<Vec<_>>>()?;
    let offset = usize::from(m.spec.include_intercept);
    let base = m.intercept().unwrap_or(0.0);
    Ok((0..d.n_rows())
        .map(|i| {
            cols.iter()
                .zip(&m.coefficients[offset..])
                .fold(base, |acc, (col, b)| acc + b * col[i])
        })
        .collect())
}

pub fn squared_losses(m: &FittedModel, d: &Dataset) -> Result<Vec<f64>> {
    let yhat = predict(m, d)?;
    Ok(yhat
        .iter()
        .zip(d.response())
        .map(|(p, y)| (p - y) * (p - y))
        .collect())
}

/// Gaussian profile BIC, `n ln(rss / n) + k ln(n)`, with the residual sum of
/// squares floored at [`BIC_RSS_FLOOR`].
pub fn bic_value(rss: f64, n: usize, k: usize) -> f64 {
    let n = n as f64;
    n * (rss.max(BIC_RSS_FLOOR) / n).ln() + k as f64 * n.ln()
}

pub fn bic(m: &FittedModel, n: usize) -> f64 {
    bic_value(m.training_rss, n, m.spec.known_vcd())
}
