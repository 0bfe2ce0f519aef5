//! Command-line front end: `fit`, `select-delta`, `synth` and `bf`.
//!
//! Every command writes a JSON report carrying `schema_version` and the
//! [`RunConfig`] it ran with; benchmark commands also write a long-format CSV.
//! Exit codes: 0 on success, 2 for usage, parse and validation errors, 3 for
//! numerical failures.

pub mod input;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::distributions::Calibration;
use crate::error::{Error, Result};
use crate::gibbs::{run_chain, SamplerSettings};
use crate::model::{PriorConfig, PriorMode, RegressionData};
use crate::posterior::{
    select_delta, DeltaSweep, PosteriorReport, DEFAULT_DELTA_GRID, DEFAULT_MSE_THRESHOLD,
};
use crate::report::{to_json, SCHEMA_VERSION};
use crate::synth::{
    summarize_bf, summarize_selection, BfExperiment, BfRow, BfSummary, Regime,
    SelectionExperiment, SelectionRow, SelectionSummary,
};
use input::{log_transform_response, read_table, standardize, Standardization};

#[derive(Debug, Parser)]
#[command(name = "spikeslab", version, about = "Bayesian variable selection with disjunct-support spike-and-slab priors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one threshold and report inclusion probabilities and top models.
    Fit(FitArgs),
    /// Sweep a threshold grid and pick the sparsest model within an MSE budget.
    SelectDelta(SelectArgs),
    /// Regenerate F1 and model-size tables on synthetic data.
    Synth(SynthArgs),
    /// Bayes factor growth of the true model with the sample size.
    Bf(BfArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Disjunct,
    Full,
}

impl From<ModeArg> for PriorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Disjunct => PriorMode::DisjunctSupport,
            ModeArg::Full => PriorMode::FullSupport,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Low,
    High,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Low => Regime::LowDim,
            RegimeArg::High => Regime::HighDim,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SamplerArgs {
    /// Total Gibbs sweeps, burn-in included.
    #[arg(long, default_value_t = 10_000)]
    pub iterations: usize,
    /// Fraction of sweeps discarded as burn-in.
    #[arg(long = "burn-in", default_value_t = 0.1)]
    pub burn_in: f64,
    #[arg(long, default_value_t = 1)]
    pub thinning: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for independent chains (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Report path; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Disjunct)]
    pub mode: ModeArg,
    #[arg(long = "nu-r", default_value_t = PriorConfig::DEFAULT_NU_R)]
    pub nu_r: f64,
    #[arg(long = "eta-r-sq", default_value_t = PriorConfig::DEFAULT_ETA_R_SQ)]
    pub eta_r_sq: f64,
    #[arg(long = "nu-1", default_value_t = PriorConfig::DEFAULT_NU_1)]
    pub nu_1: f64,
    #[arg(long = "eta-1-sq", default_value_t = PriorConfig::DEFAULT_ETA_1_SQ)]
    pub eta_1_sq: f64,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Response column name (default: last column).
    #[arg(long)]
    pub response: Option<String>,
    /// Take the logarithm of the response before normalizing.
    #[arg(long = "log-response")]
    pub log_response: bool,
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pub normalize: Toggle,
    /// Target variance of the normalized response.
    #[arg(long = "response-variance", default_value_t = 30.0)]
    pub response_variance: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Number of top models to report.
    #[arg(long = "top-k", default_value_t = 10)]
    pub top_k: usize,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long = "delta-grid", value_delimiter = ',', default_values_t = DEFAULT_DELTA_GRID)]
    pub delta_grid: Vec<f64>,
    /// Largest accepted expected MSE increase.
    #[arg(long, default_value_t = DEFAULT_MSE_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value_t = RegimeArg::Low)]
    pub regime: RegimeArg,
    #[arg(long = "n-grid", value_delimiter = ',', default_values_t = [100usize, 1000])]
    pub n_grid: Vec<usize>,
    #[arg(long = "eta-grid", value_delimiter = ',', default_values_t = [0.0, 0.5])]
    pub eta_grid: Vec<f64>,
    #[arg(long = "delta-grid", value_delimiter = ',', default_values_t = DEFAULT_DELTA_GRID)]
    pub delta_grid: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Disjunct)]
    pub mode: ModeArg,
    /// Fixed coefficient noise at η = 0.5 (scaled linearly for other η) instead of random draws.
    #[arg(long = "coefficient-noise", value_delimiter = ',', allow_negative_numbers = true)]
    pub coefficient_noise: Option<Vec<f64>>,
    /// Long-format CSV path (default: the report path with a `.csv` extension).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BfArgs {
    #[arg(long, value_enum, default_value_t = RegimeArg::Low)]
    pub regime: RegimeArg,
    #[arg(long = "n-grid", value_delimiter = ',', default_values_t = [10usize, 50, 100, 1000])]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [ModeArg::Disjunct, ModeArg::Full])]
    pub modes: Vec<ModeArg>,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Report posterior odds without dividing by the prior odds.
    #[arg(long = "no-prior-odds-correction")]
    pub no_prior_odds_correction: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub sampler: SamplerArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub nu_r: f64,
    pub eta_r_sq: f64,
    pub nu_1: f64,
    pub eta_1_sq: f64,
}

/// Everything that determines a run's output. Output paths and the worker
/// count are left out because they do not change results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub response: Option<String>,
    pub log_response: bool,
    pub normalize: bool,
    pub response_variance: f64,
    pub deltas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold: Option<f64>,
    pub modes: Vec<PriorMode>,
    pub hyperparameters: Hyperparameters,
    pub sampler: SamplerSettings,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub top_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub regime: Option<Regime>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub n_grid: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub eta_grid: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub repetitions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub correct_prior_odds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coefficient_noise: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n: usize,
    pub d: usize,
    pub response: String,
    pub covariates: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub standardization: Option<Standardization>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedProbability {
    pub covariate: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub data: DataSummary,
    /// Absent for the Dirac spike.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub calibration: Option<Calibration>,
    /// Covariates sorted by decreasing inclusion probability.
    pub ranking: Vec<NamedProbability>,
    pub posterior: PosteriorReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub data: DataSummary,
    pub sweep: DeltaSweep,
    pub selected_covariates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub summaries: Vec<SelectionSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub summaries: Vec<BfSummary>,
}

impl SamplerArgs {
    fn settings(&self) -> Result<SamplerSettings> {
        let s = SamplerSettings {
            iterations: self.iterations,
            burn_in_fraction: self.burn_in,
            seed: self.seed,
            thinning: self.thinning,
            ..SamplerSettings::default()
        };
        s.validate()?;
        Ok(s)
    }
}

impl PriorArgs {
    fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            nu_r: self.nu_r,
            eta_r_sq: self.eta_r_sq,
            nu_1: self.nu_1,
            eta_1_sq: self.eta_1_sq,
        }
    }

    fn config(&self, delta: f64) -> Result<(PriorConfig, Option<Calibration>)> {
        PriorConfig::calibrated(delta, self.nu_r, self.eta_r_sq, self.nu_1, self.eta_1_sq, self.mode.into())
    }
}

fn base_config(command: &str, sampler: SamplerSettings, hyper: Hyperparameters) -> RunConfig {
    RunConfig {
        command: command.into(),
        input: None,
        response: None,
        log_response: false,
        normalize: false,
        response_variance: 30.0,
        deltas: Vec::new(),
        threshold: None,
        modes: Vec::new(),
        hyperparameters: hyper,
        sampler,
        top_k: None,
        regime: None,
        n_grid: Vec::new(),
        eta_grid: Vec::new(),
        repetitions: None,
        correct_prior_odds: None,
        coefficient_noise: None,
    }
}

fn default_hyperparameters() -> Hyperparameters {
    Hyperparameters {
        nu_r: PriorConfig::DEFAULT_NU_R,
        eta_r_sq: PriorConfig::DEFAULT_ETA_R_SQ,
        nu_1: PriorConfig::DEFAULT_NU_1,
        eta_1_sq: PriorConfig::DEFAULT_ETA_1_SQ,
    }
}

fn load(args: &InputArgs, cfg: &mut RunConfig) -> Result<(RegressionData, DataSummary)> {
    let file = File::open(&args.input)
        .map_err(|e| Error::Io(format!("cannot open {}: {e}", args.input.display())))?;
    let mut table = read_table(std::io::BufReader::new(file), args.response.as_deref())?;
    if args.log_response {
        log_transform_response(&mut table)?;
    }
    let standardization = match args.normalize {
        Toggle::On => Some(standardize(&mut table, args.response_variance)?),
        Toggle::Off => None,
    };
    cfg.input = Some(args.input.display().to_string());
    cfg.response = Some(table.response.clone());
    cfg.log_response = args.log_response;
    cfg.normalize = args.normalize == Toggle::On;
    cfg.response_variance = args.response_variance;
    let summary = DataSummary {
        n: table.y.len(),
        d: table.covariates.len(),
        response: table.response.clone(),
        covariates: table.covariates.clone(),
        standardization,
    };
    Ok((table.into_data()?, summary))
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(0) => Err(Error::invalid("--jobs must be at least 1")),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?
            .install(f),
    }
}

fn emit(output: Option<&Path>, json: &str) -> Result<()> {
    match output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)
                .map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?);
            w.write_all(json.as_bytes())?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(json.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn csv_target(explicit: Option<&PathBuf>, output: Option<&PathBuf>) -> Option<PathBuf> {
    explicit
        .cloned()
        .or_else(|| output.map(|p| p.with_extension("csv")))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn fit(args: &FitArgs) -> Result<FitReport> {
    let settings = args.sampler.settings()?;
    let mut config = base_config("fit", settings, args.prior.hyperparameters());
    let (data, summary) = load(&args.input, &mut config)?;
    let (prior, calibration) = args.prior.config(args.delta)?;
    config.deltas = vec![args.delta];
    config.modes = vec![prior.mode];
    config.top_k = Some(args.top_k);
    let store = run_chain(&data, &prior, &settings)?;
    let posterior = PosteriorReport::from_store(&store, args.top_k)?;
    let mut ranking: Vec<NamedProbability> = summary
        .covariates
        .iter()
        .zip(&posterior.inclusion_probabilities)
        .map(|(c, &p)| NamedProbability {
            covariate: c.clone(),
            probability: p,
        })
        .collect();
    ranking.sort_by(|a, b| b.probability.total_cmp(&a.probability));
    Ok(FitReport {
        schema_version: SCHEMA_VERSION,
        config,
        data: summary,
        calibration,
        ranking,
        posterior,
    })
}

pub fn select(args: &SelectArgs) -> Result<SelectReport> {
    let settings = args.sampler.settings()?;
    let mut config = base_config("select-delta", settings, args.prior.hyperparameters());
    let (data, summary) = load(&args.input, &mut config)?;
    let (template, _) = args.prior.config(0.0)?;
    config.deltas = args.delta_grid.clone();
    config.threshold = Some(args.threshold);
    config.modes = vec![template.mode];
    let sweep = with_pool(args.sampler.jobs, || {
        select_delta(&data, &args.delta_grid, &template, &settings, args.threshold)
    })?;
    let selected_covariates = sweep
        .selection
        .model
        .iter()
        .map(|&j| summary.covariates[j - 1].clone())
        .collect();
    Ok(SelectReport {
        schema_version: SCHEMA_VERSION,
        config,
        data: summary,
        sweep,
        selected_covariates,
    })
}

pub fn synth(args: &SynthArgs) -> Result<(SynthReport, Vec<SelectionRow>)> {
    let settings = args.sampler.settings()?;
    let mut config = base_config("synth", settings, default_hyperparameters());
    let experiment = SelectionExperiment {
        regime: args.regime.into(),
        n_grid: args.n_grid.clone(),
        eta_grid: args.eta_grid.clone(),
        delta_grid: args.delta_grid.clone(),
        repetitions: args.repetitions,
        mode: args.mode.into(),
        settings: SamplerSettings {
            store_coefficients: false,
            ..settings
        },
        master_seed: settings.seed,
        coefficient_noise: args.coefficient_noise.clone(),
    };
    config.deltas = args.delta_grid.clone();
    config.coefficient_noise = args.coefficient_noise.clone();
    config.modes = vec![experiment.mode];
    config.regime = Some(experiment.regime);
    config.n_grid = args.n_grid.clone();
    config.eta_grid = args.eta_grid.clone();
    config.repetitions = Some(args.repetitions);
    let rows = with_pool(args.sampler.jobs, || experiment.run())?;
    let report = SynthReport {
        schema_version: SCHEMA_VERSION,
        config,
        summaries: summarize_selection(&rows),
    };
    Ok((report, rows))
}

pub fn bf(args: &BfArgs) -> Result<(BfReport, Vec<BfRow>)> {
    let settings = args.sampler.settings()?;
    let mut config = base_config("bf", settings, default_hyperparameters());
    let mut modes: Vec<PriorMode> = Vec::new();
    for m in &args.modes {
        let m = PriorMode::from(*m);
        if !modes.contains(&m) {
            modes.push(m);
        }
    }
    let experiment = BfExperiment {
        regime: args.regime.into(),
        n_grid: args.n_grid.clone(),
        eta: args.eta,
        repetitions: args.repetitions,
        modes: modes.clone(),
        delta: args.delta,
        settings: SamplerSettings {
            store_coefficients: false,
            ..settings
        },
        master_seed: settings.seed,
        correct_prior_odds: !args.no_prior_odds_correction,
    };
    config.deltas = vec![args.delta];
    config.modes = modes;
    config.regime = Some(experiment.regime);
    config.n_grid = args.n_grid.clone();
    config.eta_grid = vec![args.eta];
    config.repetitions = Some(args.repetitions);
    config.correct_prior_odds = Some(experiment.correct_prior_odds);
    let rows = with_pool(args.sampler.jobs, || experiment.run())?;
    let report = BfReport {
        schema_version: SCHEMA_VERSION,
        config,
        summaries: summarize_bf(&rows),
    };
    Ok((report, rows))
}

/// Parses `args` (program name first), runs the command and writes its outputs.
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::invalid(e.to_string()))?;
    execute(&cli.command)
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Fit(a) => {
            let r = with_pool(a.sampler.jobs, || fit(a))?;
            emit(a.sampler.output.as_deref(), &to_json(&r)?)
        }
        Command::SelectDelta(a) => emit(a.sampler.output.as_deref(), &to_json(&select(a)?)?),
        Command::Synth(a) => {
            let (report, rows) = synth(a)?;
            if let Some(p) = csv_target(a.csv.as_ref(), a.sampler.output.as_ref()) {
                write_csv(&p, &rows.iter().map(SynthCsvRow::from).collect::<Vec<_>>())?;
            }
            emit(a.sampler.output.as_deref(), &to_json(&report)?)
        }
        Command::Bf(a) => {
            let (report, rows) = bf(a)?;
            if let Some(p) = csv_target(a.csv.as_ref(), a.sampler.output.as_ref()) {
                write_csv(&p, &rows)?;
            }
            emit(a.sampler.output.as_deref(), &to_json(&report)?)
        }
    }
}

/// Flat CSV view of a [`SelectionRow`]; model lists are space-separated.
#[derive(Debug, Serialize)]
struct SynthCsvRow {
    regime: Regime,
    n: usize,
    eta: f64,
    delta: f64,
    repetition: usize,
    f1: f64,
    selected_count: usize,
    selected: String,
    truth: String,
}

fn join(v: &[usize]) -> String {
    v.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(" ")
}

impl From<&SelectionRow> for SynthCsvRow {
    fn from(r: &SelectionRow) -> Self {
        Self {
            regime: r.regime,
            n: r.n,
            eta: r.eta,
            delta: r.delta,
            repetition: r.repetition,
            f1: r.f1,
            selected_count: r.selected_count,
            selected: join(&r.selected),
            truth: join(&r.truth),
        }
    }
}
