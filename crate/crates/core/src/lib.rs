//! Empirical Vapnik–Chervonenkis dimension estimation for regression models.
//!
//! The crate estimates the expected gap between two cross-validated empirical
//! losses at a set of sample sizes (design points) with a double bootstrap,
//! fits the resulting curve against the bound
//! `c * sqrt((h / n) * ln(2 n e / h))` by grid search to obtain an estimate of
//! the VC dimension `h`, and uses those estimates to select among candidate
//! linear models. Additive and multiplicative ERM risk bounds and BIC are
//! reported alongside as comparators.
//!
//! Module map:
//!
//! - [`dataset`]: CSV ingestion, standardization, term expansion, synthetic data.
//! - [`linear_model`]: least-squares fitting, prediction, losses and BIC.
//! - [`discretize`]: equal-width loss intervals and per-interval risks.
//! - [`xi`]: the double-bootstrap loss-gap estimator and the label-flip variant.
//! - [`vcbound`]: bound functions, calibration of `c` and grid search for `h`.
//! - [`risk`]: ERM upper bounds on the true risk.
//! - [`select`]: model lists, the full pipeline and the selectors.
//! - [`experiment`]: simulation sweeps and seed-replication studies.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod dataset;
pub mod discretize;
pub mod error;
pub mod experiment;
pub mod linear_model;
pub mod risk;
pub mod rng;
pub mod select;
pub mod vcbound;
pub mod xi;

pub use dataset::{Dataset, SyntheticConfig, Term, TermSet};
pub use discretize::{IntervalGrid, IntervalRisks};
pub use error::{Error, Result};
pub use linear_model::{FittedModel, ModelSpec, VcdConvention};
pub use risk::RiskConfig;
pub use select::{ModelList, PipelineConfig, RiskReport};
pub use vcbound::{CGrid, HGridMode, VcFit};
pub use xi::{Estimator, LossBound, XiConfig, XiCurve};
