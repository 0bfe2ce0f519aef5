//! Synthetic regression benchmarks: AR(1) Gaussian designs, quasi-sparse
//! coefficient noise, F1 scoring and the Bayes-factor growth experiment.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{run_chain, InclusionSet, SamplerSettings};
use crate::model::{PriorConfig, PriorMode, RegressionData};
use crate::posterior::{log_bf_against_best_alternative, most_frequent_model};
use crate::report::extended_f64;
use crate::seed::derive_seed;

const TAG_COEFFICIENTS: u64 = 1;
const TAG_DATA: u64 = 2;
const TAG_CHAIN: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `d = 8`, `β = (3, 1.5, 0, 0, 2, 0, 0, 0)`, `σ_r = 3`, `ρ = 0.5`.
    LowDim,
    /// `d = 1000`, `β₁..₃ = (3, 2, 1)`, `σ_r = √3`, `ρ = 0.6`.
    HighDim,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" | "low_dim" | "lowdim" => Ok(Regime::LowDim),
            "high" | "high_dim" | "highdim" => Ok(Regime::HighDim),
            other => Err(Error::invalid(format!(
                "unknown regime {other:?}; expected \"low\" or \"high\""
            ))),
        }
    }
}

impl Regime {
    pub fn dim(self) -> usize {
        match self {
            Regime::LowDim => 8,
            Regime::HighDim => 1000,
        }
    }

    pub fn correlation(self) -> f64 {
        match self {
            Regime::LowDim => 0.5,
            Regime::HighDim => 0.6,
        }
    }

    pub fn noise_sd(self) -> f64 {
        match self {
            Regime::LowDim => 3.0,
            Regime::HighDim => 3f64.sqrt(),
        }
    }

    /// Coefficients before quasi-sparse noise is added.
    pub fn base_coefficients(self) -> Vec<f64> {
        let mut beta = vec![0.0; self.dim()];
        match self {
            Regime::LowDim => {
                beta[0] = 3.0;
                beta[1] = 1.5;
                beta[4] = 2.0;
            }
            Regime::HighDim => {
                beta[0] = 3.0;
                beta[1] = 2.0;
                beta[2] = 1.0;
            }
        }
        beta
    }

    /// Zero-based positions that receive `Uniform(-η, η)` noise: every zero
    /// entry in the low-dimensional regime, and the ten zeros directly after
    /// the signal block in the high-dimensional one.
    pub fn noise_positions(self) -> Vec<usize> {
        match self {
            Regime::LowDim => vec![2, 3, 5, 6, 7],
            Regime::HighDim => {
                let zeros = self.dim() - 3;
                let count = (zeros as f64 * 0.01).ceil() as usize;
                (3..3 + count).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub regime: Regime,
    pub n: usize,
    /// Half-width of the coefficient noise.
    pub eta: f64,
    /// Seed for covariates and response noise.
    pub seed: u64,
    /// Seed for the coefficient noise, kept separate so repetitions can share one coefficient vector.
    pub coefficient_seed: u64,
    /// Explicit coefficient noise in place of a random draw; one value per noise position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_noise: Option<Vec<f64>>,
}

impl SyntheticSpec {
    pub fn new(regime: Regime, n: usize, eta: f64, seed: u64) -> Self {
        Self {
            regime,
            n,
            eta,
            seed,
            coefficient_seed: seed,
            coefficient_noise: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("η must be finite and ≥ 0, got {}", self.eta)));
        }
        if let Some(noise) = &self.coefficient_noise {
            let want = self.regime.noise_positions().len();
            if noise.len() != want {
                return Err(Error::invalid(format!(
                    "coefficient noise needs {want} values, got {}",
                    noise.len()
                )));
            }
            if noise.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("coefficient noise must be finite"));
            }
        }
        Ok(())
    }

    pub fn coefficients(&self) -> Vec<f64> {
        let mut beta = self.regime.base_coefficients();
        let positions = self.regime.noise_positions();
        match &self.coefficient_noise {
            Some(noise) => {
                for (&j, &v) in positions.iter().zip(noise) {
                    beta[j] = v;
                }
            }
            None if self.eta > 0.0 => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.coefficient_seed);
                for &j in &positions {
                    beta[j] = rng.gen_range(-self.eta..=self.eta);
                }
            }
            None => {}
        }
        beta
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub data: RegressionData,
    pub beta: Vec<f64>,
    pub noise_sd: f64,
}

impl SyntheticDataset {
    /// `{j : |β_j| > δ}`.
    pub fn truth(&self, delta: f64) -> InclusionSet {
        relevant_set(&self.beta, delta)
    }
}

pub fn relevant_set(beta: &[f64], delta: f64) -> InclusionSet {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| b.abs() > delta)
        .map(|(j, _)| j)
        .collect()
}

/// Rows of `N(0, Σ)` with `Σ_ij = ρ^|i-j|`, drawn through the AR(1) recursion.
pub fn ar1_design<R: Rng + ?Sized>(n: usize, d: usize, rho: f64, rng: &mut R) -> Array2<f64> {
    let innovation = (1.0 - rho * rho).sqrt();
    let mut x = Array2::zeros((n, d));
    for mut row in x.rows_mut() {
        let mut prev: f64 = rng.sample(StandardNormal);
        row[0] = prev;
        for k in 1..d {
            let e: f64 = rng.sample(StandardNormal);
            prev = rho * prev + innovation * e;
            row[k] = prev;
        }
    }
    x
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let beta = spec.coefficients();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let x = ar1_design(spec.n, spec.regime.dim(), spec.regime.correlation(), &mut rng);
    let sd = spec.regime.noise_sd();
    let signal = x.dot(&Array1::from(beta.clone()));
    let y = signal.mapv(|m| m + sd * rng.sample::<f64, _>(StandardNormal));
    Ok(SyntheticDataset {
        data: RegressionData::new(x, y)?,
        beta,
        noise_sd: sd,
    })
}

/// Harmonic mean of precision and recall; two empty sets score 1.
pub fn f1_score(selected: &InclusionSet, truth: &InclusionSet) -> f64 {
    if selected.is_empty() && truth.is_empty() {
        return 1.0;
    }
    let hits = selected.indices().iter().filter(|&&j| truth.contains(j)).count();
    if hits == 0 {
        return 0.0;
    }
    2.0 * hits as f64 / (selected.len() + truth.len()) as f64
}

fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
    } else {
        None
    };
    (Some(mean), sd)
}

fn eta_tag(eta: f64) -> u64 {
    eta.to_bits()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionExperiment {
    pub regime: Regime,
    pub n_grid: Vec<usize>,
    pub eta_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub repetitions: usize,
    pub mode: PriorMode,
    pub settings: SamplerSettings,
    pub master_seed: u64,
    /// Fixed coefficient noise at `η = 0.5`, scaled by `η / 0.5` for other noise levels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient_noise: Option<Vec<f64>>,
}

/// One chain on one synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub regime: Regime,
    pub n: usize,
    pub eta: f64,
    pub delta: f64,
    pub repetition: usize,
    pub f1: f64,
    pub selected_count: usize,
    /// One-based labels of the most visited model.
    pub selected: Vec<usize>,
    pub truth: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub regime: Regime,
    pub n: usize,
    pub eta: f64,
    pub delta: f64,
    pub repetitions: usize,
    pub mean_f1: Option<f64>,
    pub sd_f1: Option<f64>,
    pub mean_selected: Option<f64>,
    pub sd_selected: Option<f64>,
}

impl SelectionExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.eta_grid.is_empty() || self.delta_grid.is_empty() {
            return Err(Error::invalid("n, η and δ grids must be non-empty"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("at least one repetition is required"));
        }
        self.settings.validate()
    }

    /// Dataset for repetition `rep` at `(n, η)`; the coefficient noise
    /// depends only on the master seed and `η`.
    pub fn dataset_spec(&self, n: usize, eta: f64, rep: usize) -> SyntheticSpec {
        let regime_tag = self.regime as u64;
        SyntheticSpec {
            regime: self.regime,
            n,
            eta,
            seed: derive_seed(self.master_seed, &[TAG_DATA, regime_tag, n as u64, eta_tag(eta), rep as u64]),
            coefficient_seed: derive_seed(self.master_seed, &[TAG_COEFFICIENTS, regime_tag, eta_tag(eta)]),
            coefficient_noise: self
                .coefficient_noise
                .as_ref()
                .map(|v| v.iter().map(|b| b * eta / 0.5).collect()),
        }
    }

    pub fn run(&self) -> Result<Vec<SelectionRow>> {
        self.validate()?;
        let configs = self
            .delta_grid
            .iter()
            .map(|&d| PriorConfig::new(d, self.mode))
            .collect::<Result<Vec<_>>>()?;
        let mut jobs = Vec::new();
        for &n in &self.n_grid {
            for &eta in &self.eta_grid {
                for rep in 0..self.repetitions {
                    jobs.push((n, eta, rep));
                }
            }
        }
        let nested = jobs
            .par_iter()
            .map(|&(n, eta, rep)| {
                let spec = self.dataset_spec(n, eta, rep);
                let ds = generate(&spec)?;
                configs
                    .iter()
                    .enumerate()
                    .map(|(k, cfg)| {
                        let seed = derive_seed(
                            spec.seed,
                            &[TAG_CHAIN, k as u64],
                        );
                        let store = run_chain(
                            &ds.data,
                            cfg,
                            &SamplerSettings {
                                seed,
                                store_coefficients: false,
                                ..self.settings
                            },
                        )?;
                        let selected = most_frequent_model(&store)?;
                        let truth = ds.truth(cfg.delta);
                        Ok(SelectionRow {
                            regime: self.regime,
                            n,
                            eta,
                            delta: cfg.delta,
                            repetition: rep,
                            f1: f1_score(&selected, &truth),
                            selected_count: selected.len(),
                            selected: selected.one_based(),
                            truth: truth.one_based(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(nested.into_iter().flatten().collect())
    }
}

/// Mean and standard deviation per `(n, η, δ)` cell, in first-appearance order.
pub fn summarize_selection(rows: &[SelectionRow]) -> Vec<SelectionSummary> {
    let mut keys: Vec<(Regime, usize, u64, u64)> = Vec::new();
    for r in rows {
        let k = (r.regime, r.n, r.eta.to_bits(), r.delta.to_bits());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(regime, n, eta, delta)| {
            let cell: Vec<&SelectionRow> = rows
                .iter()
                .filter(|r| {
                    r.regime == regime && r.n == n && r.eta.to_bits() == eta && r.delta.to_bits() == delta
                })
                .collect();
            let f1: Vec<f64> = cell.iter().map(|r| r.f1).collect();
            let count: Vec<f64> = cell.iter().map(|r| r.selected_count as f64).collect();
            let (mean_f1, sd_f1) = mean_sd(&f1);
            let (mean_selected, sd_selected) = mean_sd(&count);
            SelectionSummary {
                regime,
                n,
                eta: f64::from_bits(eta),
                delta: f64::from_bits(delta),
                repetitions: cell.len(),
                mean_f1,
                sd_f1,
                mean_selected,
                sd_selected,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfExperiment {
    pub regime: Regime,
    pub n_grid: Vec<usize>,
    pub eta: f64,
    pub repetitions: usize,
    pub modes: Vec<PriorMode>,
    pub delta: f64,
    pub settings: SamplerSettings,
    pub master_seed: u64,
    /// Divide posterior odds by prior odds.
    pub correct_prior_odds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfRow {
    pub regime: Regime,
    pub mode: PriorMode,
    pub n: usize,
    pub eta: f64,
    pub repetition: usize,
    #[serde(with = "extended_f64")]
    pub log_bf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfSummary {
    pub regime: Regime,
    pub mode: PriorMode,
    pub n: usize,
    pub eta: f64,
    pub repetitions: usize,
    /// Repetitions in which the alternative was never visited.
    pub infinite_count: usize,
    /// Mean and standard deviation of the Bayes factor over the other repetitions.
    pub mean_bf: Option<f64>,
    pub sd_bf: Option<f64>,
    #[serde(with = "extended_f64::option")]
    pub median_log_bf: Option<f64>,
}

impl BfExperiment {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.modes.is_empty() || self.repetitions == 0 {
            return Err(Error::invalid("n grid, modes and repetitions must be non-empty"));
        }
        self.settings.validate()
    }

    pub fn dataset_spec(&self, n: usize, rep: usize) -> SyntheticSpec {
        let regime_tag = self.regime as u64;
        SyntheticSpec {
            regime: self.regime,
            n,
            eta: self.eta,
            seed: derive_seed(self.master_seed, &[TAG_DATA, regime_tag, n as u64, eta_tag(self.eta), rep as u64]),
            coefficient_seed: derive_seed(self.master_seed, &[TAG_COEFFICIENTS, regime_tag, eta_tag(self.eta)]),
            coefficient_noise: None,
        }
    }

    pub fn run(&self) -> Result<Vec<BfRow>> {
        self.validate()?;
        let configs = self
            .modes
            .iter()
            .map(|&m| PriorConfig::new(self.delta, m))
            .collect::<Result<Vec<_>>>()?;
        let jobs: Vec<(usize, usize)> = self
            .n_grid
            .iter()
            .flat_map(|&n| (0..self.repetitions).map(move |r| (n, r)))
            .collect();
        let nested = jobs
            .par_iter()
            .map(|&(n, rep)| {
                let spec = self.dataset_spec(n, rep);
                let ds = generate(&spec)?;
                let truth = ds.truth(self.delta);
                configs
                    .iter()
                    .enumerate()
                    .map(|(k, cfg)| {
                        let store = run_chain(
                            &ds.data,
                            cfg,
                            &SamplerSettings {
                                seed: derive_seed(spec.seed, &[TAG_CHAIN, k as u64]),
                                store_coefficients: false,
                                ..self.settings
                            },
                        )?;
                        Ok(BfRow {
                            regime: self.regime,
                            mode: cfg.mode,
                            n,
                            eta: self.eta,
                            repetition: rep,
                            log_bf: log_bf_against_best_alternative(
                                &store,
                                &truth,
                                self.correct_prior_odds,
                            )?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(nested.into_iter().flatten().collect())
    }
}

/// Median that keeps infinities: the two middle values are averaged only
/// when both are finite.
pub fn median_extended(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        return Some(v[m]);
    }
    let (a, b) = (v[m - 1], v[m]);
    Some(if a == b { a } else if a.is_finite() && b.is_finite() { 0.5 * (a + b) } else if a.is_infinite() { a } else { b })
}

/// Aggregates per `(mode, n)`, in first-appearance order. Infinite log Bayes
/// factors are counted, not averaged; `-∞` enters the mean as a factor of 0.
pub fn summarize_bf(rows: &[BfRow]) -> Vec<BfSummary> {
    let mut keys: Vec<(Regime, PriorMode, usize, u64)> = Vec::new();
    for r in rows {
        let k = (r.regime, r.mode, r.n, r.eta.to_bits());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(regime, mode, n, eta)| {
            let logs: Vec<f64> = rows
                .iter()
                .filter(|r| r.regime == regime && r.mode == mode && r.n == n && r.eta.to_bits() == eta)
                .map(|r| r.log_bf)
                .collect();
            let finite: Vec<f64> = logs
                .iter()
                .filter(|v| **v != f64::INFINITY)
                .map(|v| v.exp())
                .collect();
            let (mean_bf, sd_bf) = mean_sd(&finite);
            BfSummary {
                regime,
                mode,
                n,
                eta: f64::from_bits(eta),
                repetitions: logs.len(),
                infinite_count: logs.iter().filter(|v| **v == f64::INFINITY).count(),
                mean_bf,
                sd_bf,
                median_log_bf: median_extended(&logs),
            }
        })
        .collect()
}
