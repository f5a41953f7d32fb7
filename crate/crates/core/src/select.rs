//! Candidate model lists, the per-model pipeline and the four selectors.
//!
//! For each model the pipeline estimates the loss-gap curve, calibrates `c`
//! at the model's own VC dimension, searches `h` with that `c`, and computes
//! the empirical risk, both ERM bounds and BIC. The `h`-based selector keeps
//! the smallest model whose estimate lies within `t` of its VC dimension.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{expand_terms, Dataset, Term, TermSet};
use crate::error::{Error, Result};
use crate::linear_model::{bic_value, fit, least_squares, Design, ModelSpec, VcdConvention};
use crate::risk::{erm1, erm2, EmpiricalRisk, RiskConfig};
use crate::vcbound::{calibrate_c, estimate_h, estimate_h_legacy, h_grid, CGrid, HGridMode, VcFit};
use crate::xi::{estimate, Estimator, XiConfig, XiCurve};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub label: String,
    pub spec: ModelSpec,
}

/// Ordered candidate models over the covariates of one dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelList {
    entries: Vec<ModelEntry>,
    /// Terms left out because they have no variance.
    excluded: Vec<String>,
}

impl ModelList {
    pub fn new(entries: Vec<ModelEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("model list"));
        }
        Ok(ModelList {
            entries,
            excluded: Vec::new(),
        })
    }

    /// Intercept plus the first `k` covariates of `order`, for `k = 1..=len`.
    /// Labels are the covariate names joined with `+`.
    pub fn nested(d: &Dataset, order: &[usize]) -> Result<Self> {
        let names = d.covariate_names();
        let mut entries = Vec::with_capacity(order.len());
        for k in 1..=order.len() {
            let spec = ModelSpec::new(order[..k].to_vec(), true)?;
            spec.validate_for(d)?;
            let label = order[..k].iter().map(|&i| names[i]).collect::<Vec<_>>().join("+");
            entries.push(ModelEntry { label, spec });
        }
        Self::new(entries)
    }

    /// Nested prefixes of the covariates in column order, restricted to the
    /// given model sizes.
    pub fn prefixes(d: &Dataset, sizes: &[usize]) -> Result<Self> {
        let names = d.covariate_names();
        let entries = sizes
            .iter()
            .map(|&k| {
                if k == 0 || k > d.n_covariates() {
                    return Err(Error::config(format!(
                        "model size {k} outside 1..={}",
                        d.n_covariates()
                    )));
                }
                Ok(ModelEntry {
                    label: format!("{}..{}", names[0], names[k - 1]),
                    spec: ModelSpec::prefix(k),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[ModelEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn excluded(&self) -> &[String] {
        &self.excluded
    }

    /// True when every model's terms extend the previous model's terms.
    pub fn is_nested(&self) -> bool {
        self.entries.windows(2).all(|w| {
            let (a, b) = (w[0].spec.term_indices(), w[1].spec.term_indices());
            b.len() > a.len() && b.starts_with(a)
        })
    }
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (u, v) = (a - mx, b - my);
        sxy += u * v;
        sxx += u * u;
        syy += v * v;
    }
    let scale = 1e-24 * n * (1.0 + mx * mx);
    (sxx > scale && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Expands `t` on `d` and orders the terms by decreasing absolute
/// correlation with the response, ties kept in input order. Terms without
/// variance are dropped and reported in [`ModelList::excluded`].
///
/// Returns the expanded dataset, whose covariates the list indexes.
pub fn order_by_correlation(d: &Dataset, t: &TermSet) -> Result<(Dataset, ModelList)> {
    let expanded = expand_terms(d, t)?;
    let y = expanded.response();
    let names = expanded.covariate_names();
    let mut scored = Vec::new();
    let mut excluded = Vec::new();
    for (i, name) in names.iter().enumerate() {
        match pearson(expanded.covariate(i).expect("in range"), y) {
            Some(r) => scored.push((i, r.abs())),
            None => excluded.push(name.to_string()),
        }
    }
    for name in &excluded {
        eprintln!("warning: term {name} has zero variance and is excluded");
    }
    // Stable sort keeps input order among equal correlations.
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let order: Vec<usize> = scored.iter().map(|&(i, _)| i).collect();
    let mut list = ModelList::nested(&expanded, &order)?;
    list.excluded = excluded;
    Ok((expanded, list))
}

/// Expands `t` and nests the terms in the order given by `names`, which must
/// each be one of the terms (matched by display form).
pub fn order_from_names(d: &Dataset, t: &TermSet, names: &[String]) -> Result<(Dataset, ModelList)> {
    let expanded = expand_terms(d, t)?;
    let order = names
        .iter()
        .map(|name| {
            let key = name.parse::<Term>()?.to_string();
            expanded
                .covariate_index(&key)
                .ok_or_else(|| Error::UnknownTerm(name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let list = ModelList::nested(&expanded, &order)?;
    Ok((expanded, list))
}

/// Reads an ordering file with one term per line; blank lines and lines
/// starting with `#` are skipped.
pub fn read_order_file(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// Index of the selected row under the thresholded rule.
///
/// `rows` holds `(size, h_hat)` pairs. Among rows with
/// `|h_hat - vcd_of(size)| <= t` the one with the smallest size wins;
/// without any such row, the smallest discrepancy wins. Remaining ties go to
/// the smaller size, then the earlier row.
pub fn select_by_h(rows: &[(usize, usize)], vcd_of: impl Fn(usize) -> usize, t: usize) -> Result<usize> {
    if rows.is_empty() {
        return Err(Error::Empty("report rows"));
    }
    let sizes: Vec<usize> = rows.iter().map(|r| r.0).collect();
    let disc: Vec<usize> = rows.iter().map(|&(s, h)| h.abs_diff(vcd_of(s))).collect();
    Ok(thresholded(&sizes, &disc, t))
}

fn thresholded(sizes: &[usize], disc: &[usize], t: usize) -> usize {
    let within = (0..sizes.len()).filter(|&i| disc[i] <= t).min_by_key(|&i| (sizes[i], i));
    within.unwrap_or_else(|| {
        (0..sizes.len())
            .min_by_key(|&i| (disc[i], sizes[i], i))
            .expect("nonempty rows")
    })
}

/// Index of the first minimum of finite values.
fn argmin_index(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub xi: XiConfig,
    pub risk: RiskConfig,
    pub threshold: usize,
    pub estimator: Estimator,
    pub h_grid: HGridMode,
    pub c_grid: CGrid,
    pub vcd_convention: VcdConvention,
}

impl PipelineConfig {
    pub fn new(xi: XiConfig) -> Self {
        PipelineConfig {
            xi,
            risk: RiskConfig::default(),
            threshold: 2,
            estimator: Estimator::Primary,
            h_grid: HGridMode::Full,
            c_grid: CGrid::default(),
            vcd_convention: VcdConvention::Params,
        }
    }

    pub fn validate(&self, available: usize) -> Result<()> {
        self.xi.validate(available)?;
        self.risk.validate()?;
        if self.c_grid.is_empty() || self.c_grid.lo < 0.0 {
            return Err(Error::config("c grid is empty or negative"));
        }
        Ok(())
    }
}

/// Calibration, when needed, and the `h` search for one curve.
pub fn fit_vc(curve: &XiCurve, h_known: usize, cfg: &PipelineConfig) -> Result<VcFit> {
    let grid = h_grid(cfg.h_grid, &curve.design_points())?;
    match cfg.estimator {
        Estimator::Primary => {
            if h_known == 0 {
                return Err(Error::config("the known VC dimension must be positive"));
            }
            let c_hat = calibrate_c(curve, h_known, &cfg.c_grid)?;
            estimate_h(curve, c_hat, &grid)
        }
        Estimator::Legacy { .. } => estimate_h_legacy(curve, &grid),
    }
}

/// Mean squared error used as the empirical risk.
pub fn empirical_risk(d: &Dataset, spec: &ModelSpec, mode: EmpiricalRisk) -> Result<f64> {
    let n = d.n_rows();
    match mode {
        EmpiricalRisk::Training => Ok(fit(d, spec)?.training_rss / n as f64),
        EmpiricalRisk::CrossValidated { folds } => {
            if folds < 2 || folds > n {
                return Err(Error::config(format!("cannot split {n} rows into {folds} folds")));
            }
            let design = Design::new(d, spec)?;
            let mut sse = 0.0;
            for f in 0..folds {
                let (lo, hi) = (f * n / folds, (f + 1) * n / folds);
                let train: Vec<usize> = (0..lo).chain(hi..n).collect();
                let coef = least_squares(&design.matrix(&train), &design.response(&train));
                sse += (lo..hi)
                    .map(|r| (design.response_at(r) - design.predict_row(&coef, r)).powi(2))
                    .sum::<f64>();
            }
            Ok(sse / n as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    /// Number of covariate terms.
    pub size: usize,
    pub vcd: usize,
    pub h_hat: usize,
    pub c_hat: Option<f64>,
    pub r_emp: f64,
    pub erm1: f64,
    pub erm2: f64,
    pub bic: f64,
    pub curve: XiCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub rows: Vec<ReportRow>,
    pub selected_by_h: usize,
    pub selected_by_erm1: usize,
    pub selected_by_erm2: usize,
    pub selected_by_bic: usize,
    pub threshold_t: usize,
    pub config: PipelineConfig,
}

impl RiskReport {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("label,size,vcd,h_hat,c_hat,r_emp,erm1,erm2,bic\n");
        for r in &self.rows {
            let c = r.c_hat.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                csv_field(&r.label),
                r.size,
                r.vcd,
                r.h_hat,
                c,
                r.r_emp,
                r.erm1,
                r.erm2,
                r.bic
            ));
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs the full pipeline on every model of `list` and applies the four
/// selectors. `d` is used as given; standardize it beforehand if wanted.
pub fn run_pipeline(d: &Dataset, list: &ModelList, cfg: &PipelineConfig) -> Result<RiskReport> {
    cfg.validate(d.n_rows())?;
    let n = d.n_rows();
    let rows = list
        .entries()
        .iter()
        .map(|entry| {
            let spec = &entry.spec;
            let vcd = spec.vcd(cfg.vcd_convention);
            let curve = estimate(d, spec, &cfg.xi, cfg.estimator)?;
            let vc = fit_vc(&curve, vcd, cfg)?;
            let r_emp = empirical_risk(d, spec, cfg.risk.empirical)?;
            let rss = fit(d, spec)?.training_rss;
            Ok(ReportRow {
                label: entry.label.clone(),
                size: spec.n_terms(),
                vcd,
                h_hat: vc.h_hat,
                c_hat: vc.c_hat,
                r_emp,
                erm1: erm1(r_emp, cfg.risk.m, n, cfg.risk.eta, vc.h_hat)?,
                erm2: erm2(r_emp, cfg.risk.m, n, cfg.risk.eta, vc.h_hat)?,
                bic: bic_value(rss, n, spec.known_vcd()),
                curve,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // The VCD is taken per row, so lists with repeated sizes work too.
    let sizes: Vec<usize> = rows.iter().map(|r| r.size).collect();
    let disc: Vec<usize> = rows.iter().map(|r| r.h_hat.abs_diff(r.vcd)).collect();
    let selected_by_h = thresholded(&sizes, &disc, cfg.threshold);
    Ok(RiskReport {
        selected_by_h,
        selected_by_erm1: argmin_index(rows.iter().map(|r| r.erm1)),
        selected_by_erm2: argmin_index(rows.iter().map(|r| r.erm2)),
        selected_by_bic: argmin_index(rows.iter().map(|r| r.bic)),
        threshold_t: cfg.threshold,
        config: cfg.clone(),
        rows,
    })
}
