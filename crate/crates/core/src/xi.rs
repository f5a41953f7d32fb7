//! Bootstrap estimates of the expected gap between two empirical losses.
//!
//! [`estimate_xi`] is the cross-validated double bootstrap: for each design
//! point `n`, `b2` outer replicates each average `b1` inner replicates of
//!
//! 1. draw `2n` rows with replacement and split them at random into halves
//!    `G1`, `G2` of size `n`;
//! 2. fit the model on each half;
//! 3. score the `G1` model on `G2` and the `G2` model on `G1`;
//! 4. discretize both loss vectors on a common grid and take per-interval
//!    absolute differences of the empirical risks.
//!
//! The inner mean of the per-interval differences is summed over intervals
//! to give one outer value; the estimate is the mean of the outer values.
//!
//! [`estimate_xi_legacy`] is the label-flip procedure adapted to regression:
//! the second half's response is reflected about its mean, a single model is
//! fitted to the merged sample, and the estimate is the mean absolute
//! difference of the two halves' training errors under the original
//! responses.
//!
//! Replicate `(design point l, outer o, inner i)` always draws from its own
//! substream of the configured seed, so results do not depend on the number
//! of worker threads.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::discretize::{gap, interval_risks, IntervalGrid};
use crate::error::{Error, Result};
use crate::linear_model::{least_squares, Design, ModelSpec};
use crate::rng::{self, Purpose};

/// Source of the loss range `B` used to build the interval grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossBound {
    /// Largest cross-validated loss of the two halves in each replicate.
    PerReplicate,
    /// One bound shared by all replicates; larger losses are clamped into
    /// the top interval. See [`pilot_loss_bound`].
    Fixed(f64),
}

/// Which procedure produces the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Cross-validated double bootstrap with discretized losses.
    Primary,
    /// Merged fit with the second half's response reflected (`flip`) or left
    /// as is.
    Legacy { flip: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiConfig {
    pub design_points: Vec<usize>,
    /// Inner bootstrap count.
    pub b1: usize,
    /// Outer bootstrap count.
    pub b2: usize,
    /// Number of loss intervals.
    pub m: usize,
    pub seed: u64,
    pub loss_bound: LossBound,
}

impl XiConfig {
    pub fn new(design_points: Vec<usize>, seed: u64) -> Self {
        XiConfig {
            design_points,
            b1: 50,
            b2: 50,
            m: 10,
            seed,
            loss_bound: LossBound::PerReplicate,
        }
    }

    /// Checks the configuration against a dataset of `available` rows.
    pub fn validate(&self, available: usize) -> Result<()> {
        if self.design_points.is_empty() {
            return Err(Error::config("no design points"));
        }
        if self.design_points[0] == 0 || self.design_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("design points must be positive and strictly increasing"));
        }
        if self.design_points.len() as u64 > rng::MAX_MAJOR {
            return Err(Error::config("too many design points"));
        }
        let largest = *self.design_points.last().unwrap();
        if largest > available {
            return Err(Error::config(format!(
                "design point {largest} exceeds the {available} available rows"
            )));
        }
        if self.b1 == 0 || self.b2 == 0 {
            return Err(Error::config("b1 and b2 must be at least 1"));
        }
        if self.b1 as u64 > rng::MAX_MINOR || self.b2 as u64 > rng::MAX_MINOR {
            return Err(Error::config("b1 and b2 must be below 2^20"));
        }
        if self.m == 0 {
            return Err(Error::config("m must be at least 1"));
        }
        if let LossBound::Fixed(b) = self.loss_bound {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::config(format!("fixed loss bound must be positive, got {b}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiPoint {
    pub n: usize,
    pub xi: f64,
    /// Largest loss bound used across this design point's replicates (0 for
    /// the legacy procedure, which does not discretize).
    #[serde(default)]
    pub max_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiCurve {
    pub points: Vec<XiPoint>,
}

impl XiCurve {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        XiCurve {
            points: pairs
                .into_iter()
                .map(|(n, xi)| XiPoint { n, xi, max_bound: 0.0 })
                .collect(),
        }
    }

    pub fn design_points(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.n).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.xi).collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("n_l,xi\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.n, p.xi));
        }
        out
    }

    /// Reads the `n_l,xi` CSV form.
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Csv(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        };
        let (ni, xi) = (col("n_l")?, col("xi")?);
        let mut pairs = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Csv(e.to_string()))?;
            let row = record.position().map_or(0, |p| p.line() as usize);
            let bad = |column: &str, value: &str| Error::Parse {
                row,
                column: column.to_string(),
                value: value.to_string(),
            };
            let n: usize = record[ni].parse().map_err(|_| bad("n_l", &record[ni]))?;
            let v: f64 = record[xi]
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| bad("xi", &record[xi]))?;
            pairs.push((n, v));
        }
        if pairs.is_empty() {
            return Err(Error::Empty("xi curve"));
        }
        Ok(XiCurve::from_pairs(pairs))
    }
}

/// The generator for replicate `(l, outer, inner)` of the primary procedure.
pub fn replicate_rng(seed: u64, l: usize, outer: usize, inner: usize) -> ChaCha8Rng {
    rng::substream(seed, Purpose::XiReplicate, l as u64, outer as u64, inner as u64)
}

/// The generator for replicate `(l, outer, inner)` of the legacy procedure.
pub fn legacy_replicate_rng(seed: u64, l: usize, outer: usize, inner: usize) -> ChaCha8Rng {
    rng::substream(seed, Purpose::LegacyReplicate, l as u64, outer as u64, inner as u64)
}

/// Draws `2n` row indices with replacement from `0..available`, shuffles
/// them, and returns them; the first `n` form `G1`, the rest `G2`.
pub fn draw_halves<R: Rng>(rng: &mut R, available: usize, n: usize) -> Vec<usize> {
    let mut draws: Vec<usize> = (0..2 * n).map(|_| rng.random_range(0..available)).collect();
    draws.shuffle(rng);
    draws
}

fn check_inputs(d: &Dataset, spec: &ModelSpec, cfg: &XiConfig) -> Result<()> {
    if d.n_rows() == 0 {
        return Err(Error::Empty("dataset"));
    }
    spec.validate_for(d)?;
    cfg.validate(d.n_rows())
}

/// Cross-validated squared losses of one replicate: the `G1` model scored on
/// `G2`, and the `G2` model scored on `G1`.
fn cross_losses(design: &Design, g1: &[usize], g2: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let coef1 = least_squares(&design.matrix(g1), &design.response(g1));
    let coef2 = least_squares(&design.matrix(g2), &design.response(g2));
    let score = |coef: &DVector<f64>, rows: &[usize]| -> Vec<f64> {
        rows.iter()
            .map(|&r| {
                let e = design.predict_row(coef, r) - design.response_at(r);
                e * e
            })
            .collect()
    };
    (score(&coef1, g2), score(&coef2, g1))
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, &v| m.max(v))
}

/// One outer replicate: `sum_j mean_inner |nu1_j - nu2_j|` and the largest
/// bound used.
fn primary_outer(design: &Design, cfg: &XiConfig, l: usize, outer: usize) -> (f64, f64) {
    let n = cfg.design_points[l];
    let mut acc = vec![0.0; cfg.m];
    let mut max_bound = 0.0_f64;
    for inner in 0..cfg.b1 {
        let mut rng = replicate_rng(cfg.seed, l, outer, inner);
        let draws = draw_halves(&mut rng, design.n_rows(), n);
        let (g1, g2) = draws.split_at(n);
        let (loss1, loss2) = cross_losses(design, g1, g2);
        let bound = match cfg.loss_bound {
            LossBound::PerReplicate => max_of(&loss1).max(max_of(&loss2)),
            LossBound::Fixed(b) => b,
        };
        max_bound = max_bound.max(bound);
        if bound <= 0.0 || !bound.is_finite() {
            // Both halves fit perfectly: the gap is zero.
            continue;
        }
        let grid = IntervalGrid::new(cfg.m, bound).expect("positive bound");
        let r1 = interval_risks(&loss1, &grid).expect("nonempty");
        let r2 = interval_risks(&loss2, &grid).expect("nonempty");
        for (a, g) in acc.iter_mut().zip(gap(&r1, &r2).expect("same grid")) {
            *a += g;
        }
    }
    let xi_i = acc.iter().map(|a| a / cfg.b1 as f64).sum();
    (xi_i, max_bound)
}

/// Absolute difference of the two halves' training errors for the merged
/// fit on `draws` (first `n` rows are `G1`).
pub(crate) fn legacy_gap(design: &Design, draws: &[usize], n: usize, flip: bool) -> f64 {
    let mut y = design.response(draws);
    if flip {
        let centre = y.rows(n, n).mean();
        for v in y.rows_mut(n, n).iter_mut() {
            *v = 2.0 * centre - *v;
        }
    }
    let coef = least_squares(&design.matrix(draws), &y);
    let training_mse = |rows: &[usize]| -> f64 {
        rows.iter()
            .map(|&r| (design.response_at(r) - design.predict_row(&coef, r)).powi(2))
            .sum::<f64>()
            / rows.len() as f64
    };
    let (g1, g2) = draws.split_at(n);
    (training_mse(g1) - training_mse(g2)).abs()
}

fn legacy_outer(design: &Design, cfg: &XiConfig, flip: bool, l: usize, outer: usize) -> (f64, f64) {
    let n = cfg.design_points[l];
    let sum = (0..cfg.b1)
        .map(|inner| {
            let mut rng = legacy_replicate_rng(cfg.seed, l, outer, inner);
            let draws = draw_halves(&mut rng, design.n_rows(), n);
            legacy_gap(design, &draws, n, flip)
        })
        .sum();
    (sum, 0.0)
}

fn run_replicates<F>(cfg: &XiConfig, outer_fn: F) -> Vec<Vec<(f64, f64)>>
where
    F: Fn(usize, usize) -> (f64, f64) + Sync,
{
    let tasks: Vec<(usize, usize)> = (0..cfg.design_points.len())
        .flat_map(|l| (0..cfg.b2).map(move |o| (l, o)))
        .collect();
    let results: Vec<(f64, f64)> = tasks.par_iter().map(|&(l, o)| outer_fn(l, o)).collect();
    results.chunks(cfg.b2).map(<[_]>::to_vec).collect()
}

/// Cross-validated double-bootstrap estimate at every design point.
pub fn estimate_xi(d: &Dataset, spec: &ModelSpec, cfg: &XiConfig) -> Result<XiCurve> {
    check_inputs(d, spec, cfg)?;
    let design = Design::new(d, spec)?;
    let per_point = run_replicates(cfg, |l, o| primary_outer(&design, cfg, l, o));
    Ok(XiCurve {
        points: cfg
            .design_points
            .iter()
            .zip(per_point)
            .map(|(&n, outs)| XiPoint {
                n,
                xi: outs.iter().map(|o| o.0).sum::<f64>() / cfg.b2 as f64,
                max_bound: outs.iter().fold(0.0, |m, o| m.max(o.1)),
            })
            .collect(),
    })
}

/// Label-flip estimate with `b1 * b2` replicates per design point.
pub fn estimate_xi_legacy(d: &Dataset, spec: &ModelSpec, cfg: &XiConfig, flip: bool) -> Result<XiCurve> {
    check_inputs(d, spec, cfg)?;
    let design = Design::new(d, spec)?;
    let per_point = run_replicates(cfg, |l, o| legacy_outer(&design, cfg, flip, l, o));
    let w = (cfg.b1 * cfg.b2) as f64;
    Ok(XiCurve {
        points: cfg
            .design_points
            .iter()
            .zip(per_point)
            .map(|(&n, outs)| XiPoint {
                n,
                xi: outs.iter().map(|o| o.0).sum::<f64>() / w,
                max_bound: 0.0,
            })
            .collect(),
    })
}

pub fn estimate(d: &Dataset, spec: &ModelSpec, cfg: &XiConfig, estimator: Estimator) -> Result<XiCurve> {
    match estimator {
        Estimator::Primary => estimate_xi(d, spec, cfg),
        Estimator::Legacy { flip } => estimate_xi_legacy(d, spec, cfg, flip),
    }
}

/// Largest cross-validated loss seen in a pilot pass of `b1` replicates per
/// design point, for use as a [`LossBound::Fixed`] shared by all replicates.
pub fn pilot_loss_bound(d: &Dataset, spec: &ModelSpec, cfg: &XiConfig) -> Result<f64> {
    check_inputs(d, spec, cfg)?;
    let design = Design::new(d, spec)?;
    let mut bound = 0.0_f64;
    for (l, &n) in cfg.design_points.iter().enumerate() {
        for inner in 0..cfg.b1 {
            let mut rng = rng::substream(cfg.seed, Purpose::PilotBound, l as u64, 0, inner as u64);
            let draws = draw_halves(&mut rng, design.n_rows(), n);
            let (g1, g2) = draws.split_at(n);
            let (a, b) = cross_losses(&design, g1, g2);
            bound = bound.max(max_of(&a)).max(max_of(&b));
        }
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, standardize, SyntheticConfig};

    fn small_data() -> Dataset {
        standardize(&generate_synthetic(&SyntheticConfig::new(3, 60, 17)).unwrap())
    }

    #[test]
    fn config_validation() {
        let d = small_data();
        let spec = ModelSpec::prefix(3);
        let bad = |dp: Vec<usize>| estimate_xi(&d, &spec, &XiConfig { b1: 2, b2: 2, ..XiConfig::new(dp, 1) });
        assert!(bad(vec![]).is_err());
        assert!(bad(vec![20, 10]).is_err());
        assert!(bad(vec![10, 10]).is_err());
        assert!(bad(vec![0, 10]).is_err());
        assert!(bad(vec![10, 61]).is_err());
        assert!(bad(vec![10, 60]).is_ok());
        let zero_b = XiConfig { b1: 0, ..XiConfig::new(vec![10], 1) };
        assert!(estimate_xi(&d, &spec, &zero_b).is_err());
        let fixed = XiConfig { loss_bound: LossBound::Fixed(-1.0), ..XiConfig::new(vec![10], 1) };
        assert!(estimate_xi(&d, &spec, &fixed).is_err());
    }

    #[test]
    fn draw_halves_shape() {
        let mut rng = replicate_rng(3, 0, 0, 0);
        let draws = draw_halves(&mut rng, 7, 5);
        assert_eq!(draws.len(), 10);
        assert!(draws.iter().all(|&r| r < 7));
    }

    #[test]
    fn curve_is_nonnegative_and_bounded() {
        let d = small_data();
        let cfg = XiConfig { b1: 5, b2: 4, ..XiConfig::new(vec![15, 30, 60], 9) };
        let curve = estimate_xi(&d, &ModelSpec::prefix(2), &cfg).unwrap();
        assert_eq!(curve.design_points(), vec![15, 30, 60]);
        for p in &curve.points {
            assert!(p.xi >= 0.0 && p.xi.is_finite());
            assert!(p.xi <= p.max_bound);
        }
    }

    #[test]
    fn fixed_bound_from_pilot() {
        let d = small_data();
        let spec = ModelSpec::prefix(2);
        let cfg = XiConfig { b1: 4, b2: 3, ..XiConfig::new(vec![20, 40], 2) };
        let b = pilot_loss_bound(&d, &spec, &cfg).unwrap();
        assert!(b > 0.0);
        let fixed = XiConfig { loss_bound: LossBound::Fixed(b), ..cfg };
        let curve = estimate_xi(&d, &spec, &fixed).unwrap();
        for p in &curve.points {
            assert_eq!(p.max_bound, b);
            assert!(p.xi >= 0.0 && p.xi <= b);
        }
    }

    #[test]
    fn legacy_copied_halves_have_zero_gap() {
        let d = Dataset::new(
            vec![("x".into(), vec![0.3, -1.2, 2.0, 0.7]), ("y".into(), vec![1.0, -0.5, 2.5, 0.1])],
            "y",
        )
        .unwrap();
        let spec = ModelSpec::prefix(1);
        let design = Design::new(&d, &spec).unwrap();
        let draws = [0, 1, 2, 3, 0, 1, 2, 3];
        for flip in [true, false] {
            assert!(legacy_gap(&design, &draws, 4, flip) < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let c = XiCurve::from_pairs([(50, 0.25), (100, 0.125)]);
        let s = c.to_csv_string();
        assert!(s.starts_with("n_l,xi\n"));
        assert_eq!(XiCurve::read_csv(s.as_bytes()).unwrap(), c);
        assert!(XiCurve::read_csv("n_l,xi\n5,-1\n".as_bytes()).is_err());
        assert!(XiCurve::read_csv("n,xi\n5,1\n".as_bytes()).is_err());
    }
}
