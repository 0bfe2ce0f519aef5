//! The hierarchical regression model: hyperparameters, data with sufficient
//! statistics, the indicator prior and the full joint log-density.
//!
//! The joint density doubles as the reference every conditional sampler in
//! [`crate::gibbs`] is checked against.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::distributions::normal::{log_gauss_norm, LN_SQRT_2PI};
use crate::distributions::{
    calibrate_sigma0, log_trunc_norm_const, scaled_inv_chisq_logpdf, Calibration,
    ScaledInvChiSqParams, SupportRegion,
};
use crate::error::{Error, Result};

/// How coefficient priors are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMode {
    /// Spike on `[-δ, δ]`, slab on its complement.
    DisjunctSupport,
    /// Untruncated normal spike and slab sharing the calibrated variances.
    FullSupport,
}

impl std::str::FromStr for PriorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disjunct" | "disjunct_support" => Ok(PriorMode::DisjunctSupport),
            "full" | "full_support" => Ok(PriorMode::FullSupport),
            other => Err(Error::invalid(format!(
                "unknown prior mode {other:?}; expected \"disjunct\" or \"full\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub delta: f64,
    pub nu_r: f64,
    pub eta_r_sq: f64,
    pub nu_1: f64,
    pub eta_1_sq: f64,
    /// Calibrated spike variance; `None` for the Dirac spike at `δ = 0`.
    pub sigma0_sq: Option<f64>,
    pub mode: PriorMode,
}

impl PriorConfig {
    pub const DEFAULT_NU_R: f64 = 1.0;
    pub const DEFAULT_ETA_R_SQ: f64 = 1.0;
    pub const DEFAULT_NU_1: f64 = 1.0;
    pub const DEFAULT_ETA_1_SQ: f64 = 100.0;

    /// Default hyperparameters with `σ₀²` calibrated for `delta`.
    pub fn new(delta: f64, mode: PriorMode) -> Result<Self> {
        Self::with_hyperparameters(
            delta,
            Self::DEFAULT_NU_R,
            Self::DEFAULT_ETA_R_SQ,
            Self::DEFAULT_NU_1,
            Self::DEFAULT_ETA_1_SQ,
            mode,
        )
    }

    pub fn with_hyperparameters(
        delta: f64,
        nu_r: f64,
        eta_r_sq: f64,
        nu_1: f64,
        eta_1_sq: f64,
        mode: PriorMode,
    ) -> Result<Self> {
        Self::calibrated(delta, nu_r, eta_r_sq, nu_1, eta_1_sq, mode).map(|(cfg, _)| cfg)
    }

    /// Like [`PriorConfig::with_hyperparameters`], also returning the calibration record.
    pub fn calibrated(
        delta: f64,
        nu_r: f64,
        eta_r_sq: f64,
        nu_1: f64,
        eta_1_sq: f64,
        mode: PriorMode,
    ) -> Result<(Self, Option<Calibration>)> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("δ must be finite and ≥ 0, got {delta}")));
        }
        ScaledInvChiSqParams::new(nu_r, eta_r_sq)?;
        ScaledInvChiSqParams::new(nu_1, eta_1_sq)?;
        let calibration = if delta > 0.0 {
            Some(calibrate_sigma0(delta, nu_1, eta_1_sq)?)
        } else {
            None
        };
        let cfg = PriorConfig {
            delta,
            nu_r,
            eta_r_sq,
            nu_1,
            eta_1_sq,
            sigma0_sq: calibration.map(|c| c.sigma0_sq),
            mode,
        };
        Ok((cfg, calibration))
    }

    /// Same hyperparameters and mode at a different threshold, recalibrated.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::with_hyperparameters(
            delta,
            self.nu_r,
            self.eta_r_sq,
            self.nu_1,
            self.eta_1_sq,
            self.mode,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid(format!(
                "δ must be finite and ≥ 0, got {}",
                self.delta
            )));
        }
        self.noise_prior()?;
        self.slab_prior()?;
        match (self.is_dirac(), self.sigma0_sq) {
            (true, _) => Ok(()),
            (false, Some(s)) if s > 0.0 && s.is_finite() => Ok(()),
            (false, other) => Err(Error::invalid(format!(
                "δ > 0 requires a calibrated spike variance, got {other:?}"
            ))),
        }
    }

    pub fn noise_prior(&self) -> Result<ScaledInvChiSqParams> {
        ScaledInvChiSqParams::new(self.nu_r, self.eta_r_sq)
    }

    pub fn slab_prior(&self) -> Result<ScaledInvChiSqParams> {
        ScaledInvChiSqParams::new(self.nu_1, self.eta_1_sq)
    }

    /// `δ = 0`: excluded coefficients are exactly zero.
    pub fn is_dirac(&self) -> bool {
        self.delta == 0.0
    }

    pub fn spike_region(&self) -> SupportRegion {
        if self.is_dirac() {
            SupportRegion::PointMass0
        } else {
            match self.mode {
                PriorMode::DisjunctSupport => SupportRegion::Inner(self.delta),
                PriorMode::FullSupport => SupportRegion::Full,
            }
        }
    }

    pub fn slab_region(&self) -> SupportRegion {
        match self.mode {
            PriorMode::DisjunctSupport => SupportRegion::Outer(self.delta),
            PriorMode::FullSupport => SupportRegion::Full,
        }
    }

    pub(crate) fn spike_var(&self) -> f64 {
        self.sigma0_sq.unwrap_or(0.0)
    }
}

/// Design, response and the sufficient statistics every sweep runs on.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    x: Array2<f64>,
    y: Array1<f64>,
    gram: Array2<f64>,
    xty: Array1<f64>,
    yty: f64,
}

impl RegressionData {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::invalid(format!(
                "design has {} rows but response has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("design and response must be finite"));
        }
        let mut gram = x.t().dot(&x);
        // Exact symmetry regardless of summation order.
        let d = gram.nrows();
        for i in 0..d {
            for j in 0..i {
                let m = 0.5 * (gram[[i, j]] + gram[[j, i]]);
                gram[[i, j]] = m;
                gram[[j, i]] = m;
            }
        }
        let xty = x.t().dot(&y);
        let yty = y.dot(&y);
        Ok(Self {
            x,
            y,
            gram,
            xty,
            yty,
        })
    }

    /// Builds data from rows (each of length `d`) and a response vector.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>, d: usize) -> Result<Self> {
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid(format!("every row must have {d} covariates")));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let x = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::invalid(e.to_string()))?;
        Self::new(x, Array1::from(y))
    }

    /// Restriction of the design to the given columns, in order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.dim()) {
            return Err(Error::invalid(format!(
                "column {bad} out of range for d = {}",
                self.dim()
            )));
        }
        let x = self.x.select(Axis(1), columns);
        let gram = self.gram.select(Axis(0), columns).select(Axis(1), columns);
        let xty = self.xty.select(Axis(0), columns);
        Ok(Self {
            x,
            y: self.y.clone(),
            gram,
            xty,
            yty: self.yty,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn gram(&self) -> ArrayView2<'_, f64> {
        self.gram.view()
    }

    pub fn xty(&self) -> ArrayView1<'_, f64> {
        self.xty.view()
    }

    pub fn yty(&self) -> f64 {
        self.yty
    }
}

/// One state of the Gibbs chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub beta: Vec<f64>,
    pub z: Vec<bool>,
    pub sigma_r_sq: f64,
    pub sigma1_sq: f64,
}

impl ChainState {
    pub fn included(&self) -> usize {
        self.z.iter().filter(|&&b| b).count()
    }

    /// Whether every coefficient lies in the region its indicator selects.
    pub fn satisfies_support(&self, cfg: &PriorConfig) -> bool {
        self.beta.iter().zip(&self.z).all(|(&b, &z)| {
            if z {
                cfg.slab_region().contains(b)
            } else {
                cfg.spike_region().contains(b)
            }
        })
    }
}

/// `log` of the prior probability of one specific indicator vector.
pub fn log_prior_indicator(z: &[bool]) -> f64 {
    let d = z.len();
    let s = z.iter().filter(|&&b| b).count();
    log_prior_size(d, s)
}

pub(crate) fn log_prior_size(d: usize, s: usize) -> f64 {
    -((d + 1) as f64).ln() - ln_binomial(d, s)
}

pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    let (n, k) = (n as f64, k as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

/// `‖y - Xβ‖²` from the sufficient statistics.
pub fn residual_sum_squares(beta: &[f64], data: &RegressionData) -> f64 {
    let b = ArrayView1::from(beta);
    let gb = data.gram.dot(&b);
    data.yty - 2.0 * b.dot(&data.xty) + b.dot(&gb)
}

/// Log joint density of `(β, σ_r², σ₁², y, z)` given `X`, including all
/// normalizing constants. Support violations give `-∞`.
pub fn log_joint_density(state: &ChainState, data: &RegressionData, cfg: &PriorConfig) -> Result<f64> {
    let d = data.dim();
    if state.beta.len() != d || state.z.len() != d {
        return Err(Error::invalid(format!(
            "state has {} coefficients and {} indicators, data has d = {d}",
            state.beta.len(),
            state.z.len()
        )));
    }
    cfg.validate()?;
    if !state.satisfies_support(cfg) {
        return Ok(f64::NEG_INFINITY);
    }
    let noise = cfg.noise_prior()?;
    let slab = cfg.slab_prior()?;

    let n = data.n() as f64;
    let rss = residual_sum_squares(&state.beta, data);
    let mut total = log_prior_indicator(&state.z);
    total += -n * LN_SQRT_2PI - 0.5 * n * state.sigma_r_sq.ln() - 0.5 * rss / state.sigma_r_sq;
    total += scaled_inv_chisq_logpdf(state.sigma_r_sq, noise)?;
    total += scaled_inv_chisq_logpdf(state.sigma1_sq, slab)?;

    let spike_log_norm = if cfg.is_dirac() {
        0.0
    } else {
        coefficient_log_norm(cfg.spike_region(), cfg.spike_var())?
    };
    let slab_log_norm = coefficient_log_norm(cfg.slab_region(), state.sigma1_sq)?;
    for (&b, &z) in state.beta.iter().zip(&state.z) {
        if z {
            total += -0.5 * b * b / state.sigma1_sq - slab_log_norm;
        } else if !cfg.is_dirac() {
            total += -0.5 * b * b / cfg.spike_var() - spike_log_norm;
        }
    }
    Ok(total)
}

fn coefficient_log_norm(region: SupportRegion, var: f64) -> Result<f64> {
    match region {
        SupportRegion::Full => Ok(log_gauss_norm(var)),
        r => log_trunc_norm_const(r, 0.0, var),
    }
}
