//! Data ingestion, standardization, term expansion and the synthetic
//! generator used by the simulation studies.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

/// Columns whose sample standard deviation falls below this (relative to
/// their magnitude) are treated as constant by [`standardize`].
const CONSTANT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// A numeric table with one designated response column.
///
/// All other columns are covariates; covariate indices used elsewhere in the
/// crate count only the non-response columns, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    response: usize,
    n_rows: usize,
    standardized: bool,
    constant_columns: Vec<String>,
}

impl Dataset {
    pub fn new(columns: Vec<(String, Vec<f64>)>, response: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        for (name, _) in &columns {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        let response_idx = columns
            .iter()
            .position(|(name, _)| name == response)
            .ok_or_else(|| Error::MissingColumn(response.to_string()))?;
        let n_rows = columns[response_idx].1.len();
        if n_rows == 0 {
            return Err(Error::Empty("dataset has no rows"));
        }
        if let Some((name, values)) = columns.iter().find(|(_, v)| v.len() != n_rows) {
            return Err(Error::config(format!(
                "column {name:?} has {} rows, expected {n_rows}",
                values.len()
            )));
        }
        Ok(Dataset {
            columns: columns
                .into_iter()
                .map(|(name, values)| Column { name, values })
                .collect(),
            response: response_idx,
            n_rows,
            standardized: false,
            constant_columns: Vec::new(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn response_name(&self) -> &str {
        &self.columns[self.response].name
    }

    pub fn response(&self) -> &[f64] {
        &self.columns[self.response].values
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    /// Columns that [`standardize`] found to be constant and set to zero.
    pub fn constant_columns(&self) -> &[String] {
        &self.constant_columns
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    fn covariate_columns(&self) -> impl Iterator<Item = &Column> {
        let response = self.response;
        self.columns
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i != response)
            .map(|(_, c)| c)
    }

    pub fn n_covariates(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn covariate_names(&self) -> Vec<&str> {
        self.covariate_columns().map(|c| c.name.as_str()).collect()
    }

    /// The `i`-th covariate (non-response column).
    pub fn covariate(&self, i: usize) -> Option<&[f64]> {
        self.covariate_columns().nth(i).map(|c| c.values.as_slice())
    }

    pub fn covariate_index(&self, name: &str) -> Option<usize> {
        self.covariate_columns().position(|c| c.name == name)
    }

    /// Returns a copy with the covariates reordered (or subset) by index.
    /// The response is kept as the last column.
    pub fn select_covariates(&self, order: &[usize]) -> Result<Dataset> {
        let mut cols = Vec::with_capacity(order.len() + 1);
        for &i in order {
            let col = self
                .covariate_columns()
                .nth(i)
                .ok_or_else(|| Error::config(format!("covariate index {i} out of range")))?;
            cols.push((col.name.clone(), col.values.clone()));
        }
        let resp = &self.columns[self.response];
        cols.push((resp.name.clone(), resp.values.clone()));
        let mut out = Dataset::new(cols, &resp.name)?;
        out.standardized = self.standardized;
        Ok(out)
    }

    /// Comma-separated rendering with a header row, in column order.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for i in 0..self.n_rows {
            let row: Vec<String> = self.columns.iter().map(|c| c.values[i].to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Reads a comma-separated file with a header row.
///
/// Every column must hold finite reals with `.` as the decimal point.
pub fn load_csv(path: impl AsRef<Path>, response: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, response)
}

pub fn read_csv<R: std::io::Read>(reader: R, response: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(Error::DuplicateColumn(h.clone()));
        }
    }
    if !headers.iter().any(|h| h == response) {
        return Err(Error::MissingColumn(response.to_string()));
    }

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for (j, cell) in record.iter().enumerate() {
            let v = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row: line,
                    column: headers[j].clone(),
                    value: cell.to_string(),
                })?;
            values[j].push(v);
        }
    }
    let n = values[0].len();
    if n < 2 {
        return Err(Error::TooFewRows { got: n, need: 2 });
    }
    Dataset::new(headers.into_iter().zip(values).collect(), response)
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Centers and scales every column (covariates and response) to sample mean
/// 0 and `(n-1)`-denominator standard deviation 1.
///
/// Constant columns become all zeros and are listed in
/// [`Dataset::constant_columns`].
pub fn standardize(d: &Dataset) -> Dataset {
    let mut out = d.clone();
    out.constant_columns.clear();
    if d.n_rows < 2 {
        return out;
    }
    for col in &mut out.columns {
        let (mean, sd) = mean_sd(&col.values);
        if sd <= CONSTANT_TOL * (1.0 + mean.abs()) {
            col.values.iter_mut().for_each(|v| *v = 0.0);
            out.constant_columns.push(col.name.clone());
        } else {
            col.values.iter_mut().for_each(|v| *v = (*v - mean) / sd);
        }
    }
    out.standardized = true;
    out
}

/// A covariate term built from the raw columns of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Raw(String),
    Square(String),
    Product(String, String),
}

impl Term {
    fn key(&self) -> Term {
        match self {
            Term::Product(a, b) if b < a => Term::Product(b.clone(), a.clone()),
            t => t.clone(),
        }
    }

    fn names(&self) -> Vec<&str> {
        match self {
            Term::Raw(a) | Term::Square(a) => vec![a],
            Term::Product(a, b) => vec![a, b],
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Raw(a) => write!(f, "{a}"),
            Term::Square(a) => write!(f, "{a}^2"),
            Term::Product(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

impl FromStr for Term {
    type Err = Error;

    /// Accepts `name`, `name^2` and `a:b`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config(format!("cannot parse term {s:?}"));
        if let Some(base) = s.strip_suffix("^2") {
            if base.is_empty() {
                return Err(bad());
            }
            return Ok(Term::Square(base.to_string()));
        }
        if let Some((a, b)) = s.split_once(':') {
            if a.is_empty() || b.is_empty() || b.contains(':') {
                return Err(bad());
            }
            return Ok(Term::Product(a.to_string(), b.to_string()));
        }
        if s.is_empty() {
            return Err(bad());
        }
        Ok(Term::Raw(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSet {
    terms: Vec<Term>,
}

impl TermSet {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &terms {
            if !seen.insert(t.key()) {
                return Err(Error::DuplicateTerm(t.to_string()));
            }
        }
        Ok(TermSet { terms })
    }

    /// Parses a comma-separated list such as `Y,D,Y^2,Y:D`.
    pub fn parse(list: &str) -> Result<Self> {
        let terms = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(Term::from_str)
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    /// One raw term per covariate of `d`, in column order.
    pub fn raw_covariates(d: &Dataset) -> Self {
        TermSet {
            terms: d
                .covariate_names()
                .into_iter()
                .map(|n| Term::Raw(n.to_string()))
                .collect(),
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Evaluates each term on the covariates of `d`. The result holds one column
/// per term (named by the term's display form) followed by the response, and
/// is not standardized.
pub fn expand_terms(d: &Dataset, t: &TermSet) -> Result<Dataset> {
    let lookup = |name: &str| -> Result<&[f64]> {
        if name == d.response_name() {
            return Err(Error::UnknownTerm(name.to_string()));
        }
        d.column(name)
            .ok_or_else(|| Error::UnknownTerm(name.to_string()))
    };
    let mut cols = Vec::with_capacity(t.len() + 1);
    for term in t.terms() {
        for name in term.names() {
            lookup(name)?;
        }
        let values: Vec<f64> = match term {
            Term::Raw(a) => lookup(a)?.to_vec(),
            Term::Square(a) => lookup(a)?.iter().map(|v| v * v).collect(),
            Term::Product(a, b) => {
                let (xa, xb) = (lookup(a)?, lookup(b)?);
                xa.iter().zip(xb).map(|(u, v)| u * v).collect()
            }
        };
        cols.push((term.to_string(), values));
    }
    if cols.iter().any(|(name, _)| name == d.response_name()) {
        return Err(Error::DuplicateColumn(d.response_name().to_string()));
    }
    cols.push((d.response_name().to_string(), d.response().to_vec()));
    Dataset::new(cols, d.response_name())
}

/// Settings for the linear-Gaussian generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// Number of covariates with nonzero coefficients.
    pub p: usize,
    pub n: usize,
    pub sigma_eps: f64,
    pub sigma_beta: f64,
    pub mu_beta: f64,
    pub sigma_x: f64,
    pub mu_x: f64,
    pub seed: u64,
    /// Extra covariates with coefficient zero, appended after the true ones.
    #[serde(default)]
    pub decoys: usize,
}

impl SyntheticConfig {
    pub fn new(p: usize, n: usize, seed: u64) -> Self {
        SyntheticConfig {
            p,
            n,
            sigma_eps: 0.4,
            sigma_beta: 3.0,
            mu_beta: 5.0,
            sigma_x: 2.0,
            mu_x: 5.0,
            seed,
            decoys: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n == 0 {
            return Err(Error::config("p and n must be positive"));
        }
        for (name, v) in [
            ("sigma_eps", self.sigma_eps),
            ("sigma_beta", self.sigma_beta),
            ("sigma_x", self.sigma_x),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.mu_beta.is_finite() || !self.mu_x.is_finite() {
            return Err(Error::config("means must be finite"));
        }
        if (self.p + self.decoys) as u64 > rng::MAX_MAJOR {
            return Err(Error::config("too many covariates"));
        }
        Ok(())
    }
}

/// Draws `y = b0 + sum_j b_j x_j + eps` with every `b_j ~ N(mu_beta, sigma_beta^2)`
/// (including the intercept), `x_ij ~ N(mu_x, sigma_x^2)` and
/// `eps ~ N(0, sigma_eps^2)`.
///
/// Coefficients, each covariate column and the noise come from separate
/// substreams of `seed`, so column `j` is identical whatever `p` or the
/// number of decoys. Columns are `x1..x{p+decoys}` then `y`; unstandardized.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Dataset> {
    cfg.validate()?;
    let n_cov = cfg.p + cfg.decoys;
    let beta_law = Normal::new(cfg.mu_beta, cfg.sigma_beta).map_err(|e| Error::config(e.to_string()))?;
    let x_law = Normal::new(cfg.mu_x, cfg.sigma_x).map_err(|e| Error::config(e.to_string()))?;
    let eps_law = Normal::new(0.0, cfg.sigma_eps).map_err(|e| Error::config(e.to_string()))?;

    let mut beta_rng = rng::substream(cfg.seed, Purpose::Coefficients, 0, 0, 0);
    let beta: Vec<f64> = (0..=cfg.p).map(|_| beta_law.sample(&mut beta_rng)).collect();

    let mut cols: Vec<(String, Vec<f64>)> = (1..=n_cov)
        .map(|j| {
            let mut r = rng::substream(cfg.seed, Purpose::Covariate, j as u64, 0, 0);
            let values = (0..cfg.n).map(|_| x_law.sample(&mut r)).collect();
            (format!("x{j}"), values)
        })
        .collect();

    let mut noise_rng = rng::substream(cfg.seed, Purpose::Noise, 0, 0, 0);
    let y: Vec<f64> = (0..cfg.n)
        .map(|i| {
            let signal = cols[..cfg.p]
                .iter()
                .zip(&beta[1..])
                .fold(beta[0], |acc, ((_, x), b)| acc + b * x[i]);
            signal + eps_law.sample(&mut noise_rng)
        })
        .collect();
    cols.push(("y".to_string(), y));
    Dataset::new(cols, "y")
}
