//! Simulation sweeps over conjectured model sizes around a known truth, and
//! seed-replication studies at the true model.
//!
//! Each seed generates `p` true covariates plus enough zero-coefficient
//! decoys to cover the largest size, optionally standardizes, and runs the pipeline on
//! the nested prefixes `x1..xs` for every requested size `s`. The bootstrap
//! for a seed uses that same seed; the generator and the bootstrap draw from
//! disjoint substreams.

use serde::{Deserialize, Serialize};

use crate::dataset::{generate_synthetic, standardize, SyntheticConfig};
use crate::error::{Error, Result};
use crate::select::{run_pipeline, ModelList, PipelineConfig, RiskReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Generator settings; `seed` and `decoys` are set per run.
    pub synthetic: SyntheticConfig,
    /// Conjectured model sizes as covariate counts.
    pub sizes: Vec<usize>,
    pub pipeline: PipelineConfig,
    pub seeds: Vec<u64>,
    pub standardize: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::config("no model sizes"));
        }
        if self.sizes.contains(&0) {
            return Err(Error::config("model sizes must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("no seeds"));
        }
        self.synthetic.validate()?;
        self.pipeline.validate(self.synthetic.n)
    }

    fn decoys(&self) -> usize {
        self.sizes.iter().max().map_or(0, |&s| s.saturating_sub(self.synthetic.p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    pub size: usize,
    pub h_hat: usize,
    pub c_hat: Option<f64>,
    pub erm1: f64,
    pub erm2: f64,
    pub bic: f64,
}

/// Sizes chosen by each selector for one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSelection {
    pub seed: u64,
    pub by_h: usize,
    pub by_erm1: usize,
    pub by_erm2: usize,
    pub by_bic: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub p: usize,
    pub rows: Vec<SweepRow>,
    pub selections: Vec<SeedSelection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub p: usize,
    pub seeds: usize,
    /// Fraction of seeds on which each selector picked size `p`.
    pub hit_rate_h: f64,
    pub hit_rate_erm1: f64,
    pub hit_rate_erm2: f64,
    pub hit_rate_bic: f64,
    pub selections: Vec<SeedSelection>,
}

impl SweepResult {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("seed,size,h_hat,c_hat,erm1,erm2,bic\n");
        for r in &self.rows {
            let c = r.c_hat.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{},{},{}\n", r.seed, r.size, r.h_hat, c, r.erm1, r.erm2, r.bic));
        }
        out
    }

    pub fn summary(&self) -> SweepSummary {
        let k = self.selections.len().max(1) as f64;
        let rate = |f: fn(&SeedSelection) -> usize| self.selections.iter().filter(|s| f(s) == self.p).count() as f64 / k;
        SweepSummary {
            p: self.p,
            seeds: self.selections.len(),
            hit_rate_h: rate(|s| s.by_h),
            hit_rate_erm1: rate(|s| s.by_erm1),
            hit_rate_erm2: rate(|s| s.by_erm2),
            hit_rate_bic: rate(|s| s.by_bic),
            selections: self.selections.clone(),
        }
    }

    /// `h_hat` for `(seed, size)`, if that pair was run.
    pub fn h_hat(&self, seed: u64, size: usize) -> Option<usize> {
        self.rows.iter().find(|r| r.seed == seed && r.size == size).map(|r| r.h_hat)
    }
}

/// The full pipeline for one seed of a sweep.
pub fn run_seed(cfg: &SweepConfig, seed: u64) -> Result<RiskReport> {
    let synthetic = SyntheticConfig {
        seed,
        decoys: cfg.decoys(),
        ..cfg.synthetic.clone()
    };
    let raw = generate_synthetic(&synthetic)?;
    let d = if cfg.standardize { standardize(&raw) } else { raw };
    let list = ModelList::prefixes(&d, &cfg.sizes)?;
    let mut pipeline = cfg.pipeline.clone();
    pipeline.xi.seed = seed;
    run_pipeline(&d, &list, &pipeline)
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.seeds.len() * cfg.sizes.len());
    let mut selections = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let report = run_seed(cfg, seed)?;
        rows.extend(report.rows.iter().map(|r| SweepRow {
            seed,
            size: r.size,
            h_hat: r.h_hat,
            c_hat: r.c_hat,
            erm1: r.erm1,
            erm2: r.erm2,
            bic: r.bic,
        }));
        let size_at = |i: usize| report.rows[i].size;
        selections.push(SeedSelection {
            seed,
            by_h: size_at(report.selected_by_h),
            by_erm1: size_at(report.selected_by_erm1),
            by_erm2: size_at(report.selected_by_erm2),
            by_bic: size_at(report.selected_by_bic),
        });
    }
    Ok(SweepResult {
        p: cfg.synthetic.p,
        rows,
        selections,
    })
}

/// Sample mean and `(n - 1)`-denominator standard deviation.
pub fn mean_sd(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::config("need at least two values for a standard deviation"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedStudy {
    pub h_hats: Vec<(u64, usize)>,
    pub mean: f64,
    pub sd: f64,
}

/// Runs the true model (size `p`) once per seed and summarizes `h_hat`.
/// The configured sizes are ignored.
pub fn seed_study(cfg: &SweepConfig) -> Result<SeedStudy> {
    if cfg.seeds.len() < 2 {
        return Err(Error::config("a seed study needs at least two seeds"));
    }
    let at_truth = SweepConfig {
        sizes: vec![cfg.synthetic.p],
        ..cfg.clone()
    };
    let result = run_sweep(&at_truth)?;
    let h_hats: Vec<(u64, usize)> = result.rows.iter().map(|r| (r.seed, r.h_hat)).collect();
    let values: Vec<f64> = h_hats.iter().map(|&(_, h)| h as f64).collect();
    let (mean, sd) = mean_sd(&values)?;
    Ok(SeedStudy { h_hats, mean, sd })
}

/// Sample size and design points used by default for `p` true covariates.
pub fn default_design(p: usize) -> Result<(usize, Vec<usize>)> {
    match p {
        1..=30 => Ok((400, (1..=8).map(|i| 50 * i).collect())),
        40..=60 => Ok((600, (1..=8).map(|i| 75 * i).collect())),
        _ => Err(Error::config(format!(
            "no default design for p = {p}; pass the sample size and design points explicitly"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xi::XiConfig;

    fn small_cfg(seeds: Vec<u64>, sizes: Vec<usize>) -> SweepConfig {
        let xi = XiConfig { b1: 3, b2: 3, ..XiConfig::new(vec![20, 40, 60], 0) };
        SweepConfig {
            synthetic: SyntheticConfig::new(3, 60, 0),
            sizes,
            pipeline: PipelineConfig::new(xi),
            seeds,
            standardize: false,
        }
    }

    #[test]
    fn mean_sd_examples() {
        let (m, s) = mean_sd(&[29.0, 31.0]).unwrap();
        assert_eq!(m, 30.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_sd(&[5.0, 5.0, 5.0]).unwrap().1, 0.0);
        assert!(mean_sd(&[1.0]).is_err());
    }

    #[test]
    fn default_designs() {
        let (n, dp) = default_design(15).unwrap();
        assert_eq!(n, 400);
        assert_eq!(dp, vec![50, 100, 150, 200, 250, 300, 350, 400]);
        let (n, dp) = default_design(50).unwrap();
        assert_eq!((n, dp[0], *dp.last().unwrap()), (600, 75, 600));
        assert!(default_design(35).is_err());
    }

    #[test]
    fn row_count_and_single_run_equivalence() {
        let cfg = small_cfg(vec![1, 2], vec![2, 3, 5]);
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.rows.len(), 6);
        assert_eq!(res.to_csv_string().lines().count(), 7);
        assert_eq!(res.selections.len(), 2);

        let one = small_cfg(vec![2], vec![3]);
        let single = run_sweep(&one).unwrap();
        let report = run_seed(&one, 2).unwrap();
        assert_eq!(single.rows[0].h_hat, report.rows[0].h_hat);
        assert_eq!(single.rows[0].bic, report.rows[0].bic);
    }

    #[test]
    fn identical_seeds_give_zero_sd() {
        let cfg = small_cfg(vec![4, 4, 4], vec![9]);
        let study = seed_study(&cfg).unwrap();
        assert_eq!(study.sd, 0.0);
        assert_eq!(study.h_hats.len(), 3);
        assert!(seed_study(&small_cfg(vec![4], vec![3])).is_err());
    }

    #[test]
    fn invalid_sweeps_are_rejected() {
        assert!(run_sweep(&small_cfg(vec![], vec![3])).is_err());
        assert!(run_sweep(&small_cfg(vec![1], vec![])).is_err());
        assert!(run_sweep(&small_cfg(vec![1], vec![0])).is_err());
    }
}
