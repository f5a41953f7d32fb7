//! Command-line front end.
//!
//! Exit statuses: 0 on success, 1 for usage and validation errors, 2 when a
//! module reports an error, 3 when reading or writing a file fails.
//!
//! `--config FILE` supplies defaults as `key=value` lines, where `key` is a
//! long flag name of the chosen subcommand; flags given on the command line
//! win. Boolean flags take `true` or `false`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::dataset::{expand_terms, generate_synthetic, load_csv, standardize, Dataset, SyntheticConfig, TermSet};
use crate::error::Error;
use crate::experiment::{default_design, run_sweep, SweepConfig};
use crate::linear_model::{ModelSpec, VcdConvention};
use crate::risk::{EmpiricalRisk, RiskConfig};
use crate::select::{fit_vc, order_by_correlation, order_from_names, read_order_file, run_pipeline, PipelineConfig};
use crate::vcbound::{CGrid, HGridMode};
use crate::xi::{estimate, Estimator, LossBound, XiConfig, XiCurve};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MODULE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Module(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Module(Error::Io { .. }) => EXIT_IO,
            CliError::Module(_) => EXIT_MODULE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Module(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Module(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(name = "vcdim", version, about = "Empirical VC-dimension estimation and model selection")]
pub struct RunConfig {
    /// Worker threads: a positive integer or `auto`. Defaults to
    /// VCDIM_THREADS, then to one per core.
    #[arg(long, global = true, value_parser = parse_threads)]
    pub threads: Option<Threads>,

    /// File of key=value defaults for the subcommand's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Count(usize),
}

fn parse_threads(s: &str) -> std::result::Result<Threads, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Threads::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Threads::Count(n)),
        _ => Err(format!("expected a positive integer or `auto`, got {s:?}")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic linear-Gaussian dataset.
    Simulate(SimulateArgs),
    /// Estimate the loss-gap curve of one model.
    Xi(XiArgs),
    /// Fit the VC dimension to a loss-gap curve.
    FitH(FitHArgs),
    /// Run the pipeline over a nested model list and apply the selectors.
    Select(SelectArgs),
    /// Simulation sweep over conjectured model sizes.
    Sweep(SweepArgs),
    /// Simulation sweep with the label-flip estimator and its bound.
    LegacySweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Params,
    Covariates,
}

impl From<Convention> for VcdConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Params => VcdConvention::Params,
            Convention::Covariates => VcdConvention::Covariates,
        }
    }
}

/// A list of unsigned integers: comma-separated items, each `n`, `a..b`
/// (inclusive) or `a:b:step`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UintList(pub Vec<u64>);

impl FromStr for UintList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("not an unsigned integer: {t:?}"));
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if let Some((a, b)) = item.split_once("..") {
                let (a, b) = (num(a)?, num(b)?);
                if b < a {
                    return Err(format!("empty range {item:?}"));
                }
                out.extend(a..=b);
            } else if item.contains(':') {
                let parts: Vec<&str> = item.split(':').collect();
                let [a, b, step] = parts[..] else {
                    return Err(format!("expected start:end:step, got {item:?}"));
                };
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if step == 0 || b < a {
                    return Err(format!("invalid range {item:?}"));
                }
                out.extend((a..=b).step_by(step as usize));
            } else {
                out.push(num(item)?);
            }
        }
        if out.is_empty() {
            return Err("empty list".into());
        }
        Ok(UintList(out))
    }
}

impl UintList {
    fn usizes(&self) -> Vec<usize> {
        self.0.iter().map(|&v| v as usize).collect()
    }
}

fn parse_h_grid(s: &str) -> std::result::Result<HGridMode, String> {
    match s {
        "full" => Ok(HGridMode::Full),
        "min-design" => Ok(HGridMode::CappedAtMinDesign),
        _ => {
            let (a, b) = s
                .split_once("..")
                .ok_or_else(|| format!("expected full, min-design or lo..hi, got {s:?}"))?;
            let lo = a.parse().map_err(|_| format!("bad lower bound {a:?}"))?;
            let hi = b.parse().map_err(|_| format!("bad upper bound {b:?}"))?;
            if lo == 0 || hi < lo {
                return Err(format!("invalid range {s:?}"));
            }
            Ok(HGridMode::Range { lo, hi })
        }
    }
}

fn parse_loss_bound(s: &str) -> std::result::Result<LossBound, String> {
    if s == "per-replicate" {
        return Ok(LossBound::PerReplicate);
    }
    match s.parse::<f64>() {
        Ok(b) if b > 0.0 && b.is_finite() => Ok(LossBound::Fixed(b)),
        _ => Err(format!("expected per-replicate or a positive number, got {s:?}")),
    }
}

fn parse_eta(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(format!("eta must lie in (0, 1), got {s:?}")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long, requires = "response")]
    pub data: Option<PathBuf>,
    /// Name of the response column.
    #[arg(long, requires = "data")]
    pub response: Option<String>,
    /// Comma-separated terms such as `Y,D,Y^2,Y:D`; all covariates if absent.
    #[arg(long)]
    pub terms: Option<String>,
    /// Use the data as read instead of centring and scaling every column.
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BootArgs {
    /// Design points, e.g. `50,100,150` or `50:400:50`.
    #[arg(long)]
    pub design_points: Option<UintList>,
    /// Inner bootstrap count.
    #[arg(long, default_value_t = 50)]
    pub b1: usize,
    /// Outer bootstrap count.
    #[arg(long, default_value_t = 50)]
    pub b2: usize,
    /// Number of loss intervals; also used by the ERM bounds.
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the label-flip estimator and its bound.
    #[arg(long)]
    pub legacy: bool,
    /// Reflect the second half's response in the label-flip estimator.
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub legacy_flip: Switch,
    /// `per-replicate` (largest loss of each replicate) or a fixed positive bound.
    #[arg(long, value_parser = parse_loss_bound, default_value = "per-replicate")]
    pub loss_bound: LossBound,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// `full`, `min-design` or `lo..hi`. Defaults to `full`, or `min-design`
    /// with the label-flip estimator.
    #[arg(long, value_parser = parse_h_grid)]
    pub h_grid: Option<HGridMode>,
    #[arg(long, default_value_t = 0.01)]
    pub c_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub c_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub c_step: f64,
    /// How a model's VC dimension is counted.
    #[arg(long, value_enum, default_value_t = Convention::Params)]
    pub vcd_convention: Convention,
}

#[derive(Debug, Clone, Args)]
pub struct RiskArgs {
    /// Confidence parameter of the ERM bounds.
    #[arg(long, value_parser = parse_eta, default_value = "0.05")]
    pub eta: f64,
    /// Tolerance of the h-based selector.
    #[arg(long, default_value_t = 2)]
    pub threshold: usize,
    /// Measure the empirical risk by k-fold cross-validation instead of on
    /// the training data.
    #[arg(long)]
    pub cv_folds: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Number of covariates with nonzero coefficients.
    #[arg(long)]
    pub p: usize,
    /// Sample size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.4)]
    pub sigma_eps: f64,
    #[arg(long, default_value_t = 3.0)]
    pub sigma_beta: f64,
    #[arg(long, default_value_t = 5.0)]
    pub mu_beta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub sigma_x: f64,
    #[arg(long, default_value_t = 5.0)]
    pub mu_x: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Extra covariates with zero coefficients.
    #[arg(long, default_value_t = 0)]
    pub decoys: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct XiArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub boot: BootArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FitHArgs {
    /// A curve written by the `xi` command; otherwise the curve is estimated
    /// from --data.
    #[arg(long, conflicts_with = "data")]
    pub xi: Option<PathBuf>,
    /// VC dimension used to calibrate c; defaults to the model's own.
    #[arg(long)]
    pub h_known: Option<usize>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub boot: BootArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// `correlation` or `file:<path>` with one term per line.
    #[arg(long, default_value = "correlation")]
    pub order: String,
    #[command(flatten)]
    pub boot: BootArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub risk: RiskArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Conjectured model sizes as covariate counts, e.g. `9..23`.
    #[arg(long)]
    pub sizes: UintList,
    /// Seeds; each generates its own dataset.
    #[arg(long, default_value = "1")]
    pub seeds: UintList,
    /// Centre and scale the generated data. Off by default: on the unit
    /// scale the loss gaps of well-specified models fall below the c grid.
    #[arg(long)]
    pub standardize: bool,
    /// Also write a JSON summary with selector hit rates here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub boot: BootArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    #[command(flatten)]
    pub risk: RiskArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn atomic_write(path: &Path, contents: &str) -> crate::error::Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Subcommand name and explicitly given long flags, found by a plain scan so
/// that required flags may come from the config file.
fn scan_argv(argv: &[OsString]) -> (Option<String>, Vec<String>) {
    let names: Vec<String> = RunConfig::command()
        .get_subcommands()
        .map(|c| c.get_name().to_string())
        .collect();
    let mut sub = None;
    let mut longs = Vec::new();
    let mut skip_value = false;
    for arg in argv.iter().skip(1) {
        let s = arg.to_string_lossy();
        if skip_value {
            skip_value = false;
            continue;
        }
        if let Some(long) = s.strip_prefix("--") {
            let (key, has_value) = match long.split_once('=') {
                Some((k, _)) => (k, true),
                None => (long, false),
            };
            if sub.is_none() && !has_value && (key == "threads" || key == "config") {
                skip_value = true;
            }
            longs.push(key.to_string());
        } else if sub.is_none() && names.iter().any(|n| n == s.as_ref()) {
            sub = Some(s.into_owned());
        }
    }
    (sub, longs)
}

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Appends `--key=value` for every config entry not given on the command line.
fn merge_config(argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Module(Error::io(&path, e)))?;
    let (sub, given) = scan_argv(&argv);
    let sub = sub.ok_or_else(|| usage("a subcommand is required"))?;
    let cmd = RunConfig::command();
    let subcmd = cmd.find_subcommand(&sub).expect("scanned name");
    let mut out = argv;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if given.contains(&key) {
            continue;
        }
        let arg = subcmd
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| usage(format!("{}: unknown key {key:?} for `{sub}`", path.display())))?;
        if key == "config" {
            return Err(usage("a config file cannot name another config file"));
        }
        if arg.get_action().takes_values() {
            out.push(format!("--{key}={value}").into());
        } else {
            match value {
                "true" => out.push(format!("--{key}").into()),
                "false" => {}
                _ => return Err(usage(format!("{key} expects true or false, got {value:?}"))),
            }
        }
    }
    Ok(out)
}

/// Parses and validates a command line (program name first).
pub fn parse_args<I, T>(argv: I) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = merge_config(argv)?;
    let cfg = RunConfig::try_parse_from(argv).map_err(|e| usage(e.to_string()))?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> CliResult<()> {
    let check_boot = |b: &BootArgs| -> CliResult<()> {
        if b.b1 == 0 || b.b2 == 0 {
            return Err(usage("--b1 and --b2 must be positive"));
        }
        if b.m == 0 {
            return Err(usage("--m must be positive"));
        }
        Ok(())
    };
    let check_fit = |f: &FitArgs| -> CliResult<()> {
        let g = CGrid { lo: f.c_min, hi: f.c_max, step: f.c_step };
        if g.is_empty() || f.c_min < 0.0 {
            return Err(usage("the c grid is empty or negative"));
        }
        Ok(())
    };
    let check_cv = |r: &RiskArgs| -> CliResult<()> {
        match r.cv_folds {
            Some(k) if k < 2 => Err(usage("--cv-folds must be at least 2")),
            _ => Ok(()),
        }
    };
    match &cfg.command {
        Command::Simulate(a) => {
            if a.synth.n.is_none() {
                return Err(usage("simulate needs --n"));
            }
        }
        Command::Xi(a) => {
            check_boot(&a.boot)?;
            require_data(&a.data)?;
            if a.boot.design_points.is_none() {
                return Err(usage("xi needs --design-points"));
            }
        }
        Command::FitH(a) => {
            check_fit(&a.fit)?;
            match (&a.xi, &a.data.data) {
                (None, None) => return Err(usage("fit-h needs --xi or --data")),
                (Some(_), _) if a.h_known.is_none() && !a.boot.legacy => {
                    return Err(usage("fit-h with --xi needs --h-known"))
                }
                (None, Some(_)) => {
                    check_boot(&a.boot)?;
                    if a.boot.design_points.is_none() {
                        return Err(usage("fit-h with --data needs --design-points"));
                    }
                }
                _ => {}
            }
            if a.h_known == Some(0) {
                return Err(usage("--h-known must be positive"));
            }
        }
        Command::Select(a) => {
            check_boot(&a.boot)?;
            check_fit(&a.fit)?;
            check_cv(&a.risk)?;
            require_data(&a.data)?;
            if a.boot.design_points.is_none() {
                return Err(usage("select needs --design-points"));
            }
            if a.order != "correlation" && !a.order.starts_with("file:") {
                return Err(usage("--order must be `correlation` or `file:<path>`"));
            }
        }
        Command::Sweep(a) | Command::LegacySweep(a) => {
            check_boot(&a.boot)?;
            check_fit(&a.fit)?;
            check_cv(&a.risk)?;
            if a.sizes.0.contains(&0) {
                return Err(usage("--sizes must be positive"));
            }
        }
    }
    Ok(())
}

fn require_data(d: &DataArgs) -> CliResult<()> {
    if d.data.is_none() {
        return Err(usage("--data and --response are required"));
    }
    Ok(())
}

fn threads_from_env() -> CliResult<Threads> {
    match std::env::var("VCDIM_THREADS") {
        Ok(v) if !v.trim().is_empty() => {
            parse_threads(v.trim()).map_err(|e| usage(format!("VCDIM_THREADS: {e}")))
        }
        _ => Ok(Threads::Auto),
    }
}

/// Parses, runs, reports, and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    // Help and version requests are not errors.
    if let Err(e) = RunConfig::try_parse_from(&argv) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            print!("{e}");
            return 0;
        }
    }
    match parse_args(argv).and_then(|cfg| execute(&cfg)) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed configuration and returns the one-line summary.
pub fn execute(cfg: &RunConfig) -> CliResult<String> {
    let threads = match cfg.threads {
        Some(t) => t,
        None => threads_from_env()?,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Threads::Count(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| usage(format!("cannot start worker threads: {e}")))?;
    pool.install(|| dispatch(&cfg.command))
}

fn dispatch(cmd: &Command) -> CliResult<String> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Xi(a) => cmd_xi(a),
        Command::FitH(a) => cmd_fit_h(a),
        Command::Select(a) => cmd_select(a),
        Command::Sweep(a) => cmd_sweep(a, false),
        Command::LegacySweep(a) => cmd_sweep(a, true),
    }
}

fn synthetic_config(s: &SynthArgs, n: usize, seed: u64, decoys: usize) -> SyntheticConfig {
    SyntheticConfig {
        p: s.p,
        n,
        sigma_eps: s.sigma_eps,
        sigma_beta: s.sigma_beta,
        mu_beta: s.mu_beta,
        sigma_x: s.sigma_x,
        mu_x: s.mu_x,
        seed,
        decoys,
    }
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<String> {
    let cfg = synthetic_config(&a.synth, a.synth.n.expect("validated"), a.seed, a.decoys);
    let d = generate_synthetic(&cfg)?;
    atomic_write(&a.out, &d.to_csv_string())?;
    Ok(format!(
        "simulated {} rows with {} covariates to {}",
        d.n_rows(),
        d.n_covariates(),
        a.out.display()
    ))
}

/// Loads the data, expands the requested terms and standardizes unless told
/// not to.
fn load_model_data(a: &DataArgs) -> CliResult<Dataset> {
    let path = a.data.as_ref().expect("validated");
    let raw = load_csv(path, a.response.as_deref().expect("validated"))?;
    let d = match &a.terms {
        Some(t) => expand_terms(&raw, &TermSet::parse(t)?)?,
        None => raw,
    };
    Ok(if a.no_standardize { d } else { standardize(&d) })
}

fn xi_config(b: &BootArgs, design_points: Vec<usize>) -> XiConfig {
    XiConfig {
        design_points,
        b1: b.b1,
        b2: b.b2,
        m: b.m,
        seed: b.seed,
        loss_bound: b.loss_bound,
    }
}

fn estimator(b: &BootArgs) -> Estimator {
    if b.legacy {
        Estimator::Legacy { flip: b.legacy_flip == Switch::On }
    } else {
        Estimator::Primary
    }
}

fn pipeline_config(b: &BootArgs, f: &FitArgs, r: Option<&RiskArgs>, design_points: Vec<usize>) -> PipelineConfig {
    let est = estimator(b);
    let default_grid = match est {
        Estimator::Primary => HGridMode::Full,
        Estimator::Legacy { .. } => HGridMode::CappedAtMinDesign,
    };
    let mut cfg = PipelineConfig::new(xi_config(b, design_points));
    cfg.estimator = est;
    cfg.h_grid = f.h_grid.unwrap_or(default_grid);
    cfg.c_grid = CGrid { lo: f.c_min, hi: f.c_max, step: f.c_step };
    cfg.vcd_convention = f.vcd_convention.into();
    cfg.risk = RiskConfig { m: b.m, ..RiskConfig::default() };
    if let Some(r) = r {
        cfg.risk.eta = r.eta;
        cfg.threshold = r.threshold;
        if let Some(folds) = r.cv_folds {
            cfg.risk.empirical = EmpiricalRisk::CrossValidated { folds };
        }
    }
    cfg
}

fn all_terms(d: &Dataset) -> ModelSpec {
    ModelSpec::prefix(d.n_covariates())
}

fn render<T: serde::Serialize>(format: Format, csv: impl FnOnce() -> String, value: &T) -> String {
    match format {
        Format::Csv => csv(),
        Format::Json => serde_json::to_string_pretty(value).expect("serializable") + "\n",
    }
}

fn cmd_xi(a: &XiArgs) -> CliResult<String> {
    let d = load_model_data(&a.data)?;
    let dp = a.boot.design_points.as_ref().expect("validated").usizes();
    let curve = estimate(&d, &all_terms(&d), &xi_config(&a.boot, dp), estimator(&a.boot))?;
    atomic_write(&a.out.out, &render(a.out.format, || curve.to_csv_string(), &curve))?;
    let shown: Vec<String> = curve.points.iter().map(|p| format!("{}:{:.6}", p.n, p.xi)).collect();
    Ok(format!("xi {} -> {}", shown.join(" "), a.out.out.display()))
}

fn cmd_fit_h(a: &FitHArgs) -> CliResult<String> {
    let (curve, dp, model_vcd) = match &a.xi {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
            let curve = XiCurve::read_csv(file)?;
            let dp = curve.design_points();
            (curve, dp, None)
        }
        None => {
            let d = load_model_data(&a.data)?;
            let spec = all_terms(&d);
            let dp = a.boot.design_points.as_ref().expect("validated").usizes();
            let cfg = xi_config(&a.boot, dp.clone());
            let curve = estimate(&d, &spec, &cfg, estimator(&a.boot))?;
            (curve, dp, Some(spec.vcd(a.fit.vcd_convention.into())))
        }
    };
    let cfg = pipeline_config(&a.boot, &a.fit, None, dp);
    let h_known = a.h_known.or(model_vcd).unwrap_or(0);
    let fit = fit_vc(&curve, h_known, &cfg)?;
    atomic_write(&a.out.out, &render(a.out.format, || fit.to_csv_string(), &fit))?;
    let c = fit.c_hat.map_or("n/a".to_string(), |c| format!("{c:.2}"));
    Ok(format!("h_hat={} c_hat={c}", fit.h_hat))
}

fn cmd_select(a: &SelectArgs) -> CliResult<String> {
    let path = a.data.data.as_ref().expect("validated");
    let raw = load_csv(path, a.data.response.as_deref().expect("validated"))?;
    let terms = match &a.data.terms {
        Some(t) => TermSet::parse(t)?,
        None => TermSet::raw_covariates(&raw),
    };
    let (expanded, list) = match a.order.strip_prefix("file:") {
        Some(file) => order_from_names(&raw, &terms, &read_order_file(file)?)?,
        None => order_by_correlation(&raw, &terms)?,
    };
    let d = if a.data.no_standardize { expanded } else { standardize(&expanded) };
    let dp = a.boot.design_points.as_ref().expect("validated").usizes();
    let cfg = pipeline_config(&a.boot, &a.fit, Some(&a.risk), dp);
    let report = run_pipeline(&d, &list, &cfg)?;
    let body = match a.out.format {
        Format::Csv => report.to_csv_string(),
        Format::Json => report.to_json_string() + "\n",
    };
    atomic_write(&a.out.out, &body)?;
    let row = &report.rows[report.selected_by_h];
    let c = row.c_hat.map_or("n/a".to_string(), |c| format!("{c:.2}"));
    Ok(format!("selected {} (size {}) h_hat={} c_hat={c}", row.label, row.size, row.h_hat))
}

fn cmd_sweep(a: &SweepArgs, legacy: bool) -> CliResult<String> {
    let defaults = default_design(a.synth.p);
    let n = match (a.synth.n, &defaults) {
        (Some(n), _) => n,
        (None, Ok((n, _))) => *n,
        (None, Err(e)) => return Err(usage(format!("{e}; pass --n"))),
    };
    let dp = match (&a.boot.design_points, &defaults) {
        (Some(dp), _) => dp.usizes(),
        (None, Ok((_, dp))) if a.synth.n.is_none() => dp.clone(),
        _ => return Err(usage("pass --design-points")),
    };
    let mut boot = a.boot.clone();
    boot.legacy |= legacy;
    let cfg = SweepConfig {
        synthetic: synthetic_config(&a.synth, n, 0, 0),
        sizes: a.sizes.usizes(),
        pipeline: pipeline_config(&boot, &a.fit, Some(&a.risk), dp),
        seeds: a.seeds.0.clone(),
        standardize: a.standardize,
    };
    let result = run_sweep(&cfg)?;
    atomic_write(&a.out.out, &render(a.out.format, || result.to_csv_string(), &result))?;
    let summary = result.summary();
    if let Some(path) = &a.summary {
        atomic_write(path, &(serde_json::to_string_pretty(&summary).expect("serializable") + "\n"))?;
    }
    Ok(format!(
        "sweep {} seeds x {} sizes; h selector picked size {} on {:.0}% of seeds",
        cfg.seeds.len(),
        cfg.sizes.len(),
        summary.p,
        100.0 * summary.hit_rate_h
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &str) -> CliResult<RunConfig> {
        parse_args(std::iter::once("vcdim").chain(args.split_whitespace()))
    }

    #[test]
    fn uint_lists() {
        assert_eq!("50,100,150".parse::<UintList>().unwrap().0, vec![50, 100, 150]);
        assert_eq!("9..12".parse::<UintList>().unwrap().0, vec![9, 10, 11, 12]);
        assert_eq!("50:200:50".parse::<UintList>().unwrap().0, vec![50, 100, 150, 200]);
        assert_eq!("1,5..6".parse::<UintList>().unwrap().0, vec![1, 5, 6]);
        for bad in ["", "a", "5..3", "1:5:0", "1:5", "-3"] {
            assert!(bad.parse::<UintList>().is_err(), "{bad}");
        }
    }

    #[test]
    fn select_example_parses() {
        let cfg = parse("select --data d.csv --response y --order correlation --design-points 50,100,150 --seed 7 --out r.csv").unwrap();
        let Command::Select(a) = cfg.command else { panic!("wrong command") };
        assert_eq!(a.boot.seed, 7);
        assert_eq!(a.risk.threshold, 2);
        assert_eq!(a.boot.design_points.unwrap().0, vec![50, 100, 150]);
    }

    #[test]
    fn usage_errors() {
        for bad in [
            "select --data d.csv --design-points 50 --out r.csv",
            "select --data d.csv --response y --design-points 50 --threshold -1 --out r.csv",
            "select --data d.csv --response y --design-points 50 --out r.csv --bogus",
            "select --data d.csv --response y --out r.csv",
            "select --data d.csv --response y --design-points 50 --order magic --out r.csv",
            "fit-h --xi c.csv --out f.csv",
            "fit-h --xi c.csv --data d.csv --response y --h-known 3 --out f.csv",
            "xi --data d.csv --response y --design-points 10 --b1 0 --out x.csv",
            "sweep --p 15 --sizes 9..10 --eta 1.5 --out s.csv",
            "sweep --p 15 --sizes 9..10 --threads 0 --out s.csv",
            "simulate --p 3 --out s.csv",
        ] {
            let err = parse(bad).unwrap_err();
            assert_eq!(err.exit_code(), EXIT_USAGE, "{bad}: {err}");
        }
    }

    #[test]
    fn h_grid_and_bounds_parse() {
        assert_eq!(parse_h_grid("min-design").unwrap(), HGridMode::CappedAtMinDesign);
        assert_eq!(parse_h_grid("3..9").unwrap(), HGridMode::Range { lo: 3, hi: 9 });
        assert!(parse_h_grid("9..3").is_err());
        assert_eq!(parse_loss_bound("2.5").unwrap(), LossBound::Fixed(2.5));
        assert!(parse_loss_bound("-1").is_err());
    }

    #[test]
    fn exit_codes_partition_errors() {
        let io = CliError::Module(Error::io("x", std::io::Error::other("boom")));
        assert_eq!(io.exit_code(), EXIT_IO);
        assert_eq!(CliError::Module(Error::Empty("x")).exit_code(), EXIT_MODULE);
        assert_eq!(usage("x").exit_code(), EXIT_USAGE);
    }
}
