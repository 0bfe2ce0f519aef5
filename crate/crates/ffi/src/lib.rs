//! C ABI over the `spikeslab` crate.
//!
//! Conventions:
//! - Every fallible function returns an [`SsStatus`]; results go through out-pointers.
//! - On failure a message is stored per thread and read with [`ss_last_error_message`].
//! - Handles (`SsData`, `SsConfig`, `SsFit`) are opaque and released with their `_free` function.
//! - Strings returned by the library are released with [`ss_string_free`].
//! - Covariate indices are zero-based.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndarray::{Array1, Array2};
use spikeslab::distributions::{
    calibrate_sigma0, log_trunc_norm_const, slab_marginal_density, SupportRegion,
};
use spikeslab::gibbs::{run_chain, InclusionSet, SampleStore, SamplerSettings};
use spikeslab::model::{PriorConfig, PriorMode, RegressionData};
use spikeslab::posterior::{estimate_log_bf, PosteriorReport};
use spikeslab::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericalFailure = 2,
    CalibrationInfeasible = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Prior support layout.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsPriorMode {
    Disjunct = 0,
    Full = 1,
}

/// Support of a truncated normal, for [`ss_log_trunc_norm_const`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsRegion {
    /// `[-δ, δ]`
    Inner = 0,
    /// `|x| ≥ δ`
    Outer = 1,
    Full = 2,
}

/// Sampler controls; start from [`ss_sampler_settings_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsSamplerSettings {
    pub iterations: usize,
    pub burn_in_fraction: f64,
    pub seed: u64,
    pub thinning: usize,
    /// Accepted slice transitions per slab-variance update.
    pub slice_burn_in: usize,
    pub slice_rejection_cap: usize,
}

/// Design matrix and response.
pub struct SsData(RegressionData);

/// Prior hyperparameters with the calibrated spike variance.
pub struct SsConfig(PriorConfig);

/// Retained draws of a finished chain.
pub struct SsFit(SampleStore);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SsStatus {
    match e {
        Error::NumericalFailure(_) => SsStatus::NumericalFailure,
        Error::CalibrationInfeasible { .. } => SsStatus::CalibrationInfeasible,
        _ => SsStatus::InvalidArgument,
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SsStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            SsStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic");
            SsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

/// Message for the most recent failure on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a dataset from a row-major `n × d` matrix and `n` responses.
///
/// # Safety
/// `x` must point to `n * d` doubles and `y` to `n` doubles; `out_data` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_data_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    d: usize,
    out_data: *mut *mut SsData,
) -> SsStatus {
    guard(|| {
        let slot = out(out_data, "out_data")?;
        *slot = ptr::null_mut();
        let len = n
            .checked_mul(d)
            .ok_or_else(|| Error::InvalidArgument("n * d overflows".into()))?;
        if (len > 0 && x.is_null()) || (n > 0 && y.is_null()) {
            return Err(Failure::Null("x or y"));
        }
        let xs = if len == 0 { &[][..] } else { std::slice::from_raw_parts(x, len) };
        let ys = if n == 0 { &[][..] } else { std::slice::from_raw_parts(y, n) };
        let xm = Array2::from_shape_vec((n, d), xs.to_vec())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let data = RegressionData::new(xm, Array1::from(ys.to_vec()))?;
        *slot = Box::into_raw(Box::new(SsData(data)));
        Ok(())
    })
}

/// # Safety
/// `data` must come from [`ss_data_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ss_data_free(data: *mut SsData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Prior with default hyperparameters (`ν_r = 1`, `η_r² = 1`, `ν₁ = 1`, `η₁² = 100`).
///
/// # Safety
/// `out_config` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_config_new(
    delta: f64,
    mode: SsPriorMode,
    out_config: *mut *mut SsConfig,
) -> SsStatus {
    ss_config_new_with(
        delta,
        mode,
        PriorConfig::DEFAULT_NU_R,
        PriorConfig::DEFAULT_ETA_R_SQ,
        PriorConfig::DEFAULT_NU_1,
        PriorConfig::DEFAULT_ETA_1_SQ,
        out_config,
    )
}

/// Prior with explicit hyperparameters; the spike variance is calibrated when `delta > 0`.
///
/// # Safety
/// `out_config` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_config_new_with(
    delta: f64,
    mode: SsPriorMode,
    nu_r: f64,
    eta_r_sq: f64,
    nu_1: f64,
    eta_1_sq: f64,
    out_config: *mut *mut SsConfig,
) -> SsStatus {
    guard(|| {
        let slot = out(out_config, "out_config")?;
        *slot = ptr::null_mut();
        let mode = match mode {
            SsPriorMode::Disjunct => PriorMode::DisjunctSupport,
            SsPriorMode::Full => PriorMode::FullSupport,
        };
        let cfg = PriorConfig::with_hyperparameters(delta, nu_r, eta_r_sq, nu_1, eta_1_sq, mode)?;
        *slot = Box::into_raw(Box::new(SsConfig(cfg)));
        Ok(())
    })
}

/// Calibrated spike variance, or 0 for the Dirac spike at `δ = 0`.
///
/// # Safety
/// `config` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_config_sigma0_sq(config: *const SsConfig, out_value: *mut f64) -> SsStatus {
    guard(|| {
        let cfg = deref(config, "config")?;
        *out(out_value, "out_value")? = cfg.0.sigma0_sq.unwrap_or(0.0);
        Ok(())
    })
}

/// # Safety
/// `config` must come from [`ss_config_new`] or [`ss_config_new_with`]. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ss_config_free(config: *mut SsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

#[no_mangle]
pub extern "C" fn ss_sampler_settings_default() -> SsSamplerSettings {
    let s = SamplerSettings::default();
    SsSamplerSettings {
        iterations: s.iterations,
        burn_in_fraction: s.burn_in_fraction,
        seed: s.seed,
        thinning: s.thinning,
        slice_burn_in: s.slice_burn_in,
        slice_rejection_cap: s.slice_rejection_cap,
    }
}

/// Runs the Gibbs sampler.
///
/// # Safety
/// `data` and `config` must be live handles, `settings` a valid pointer and `out_fit` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_fit(
    data: *const SsData,
    config: *const SsConfig,
    settings: *const SsSamplerSettings,
    out_fit: *mut *mut SsFit,
) -> SsStatus {
    guard(|| {
        let slot = out(out_fit, "out_fit")?;
        *slot = ptr::null_mut();
        let data = deref(data, "data")?;
        let cfg = deref(config, "config")?;
        let s = deref(settings, "settings")?;
        let settings = SamplerSettings {
            iterations: s.iterations,
            burn_in_fraction: s.burn_in_fraction,
            seed: s.seed,
            thinning: s.thinning,
            slice_burn_in: s.slice_burn_in,
            slice_rejection_cap: s.slice_rejection_cap,
            store_coefficients: false,
        };
        let store = run_chain(&data.0, &cfg.0, &settings)?;
        *slot = Box::into_raw(Box::new(SsFit(store)));
        Ok(())
    })
}

/// # Safety
/// `fit` must come from [`ss_fit`]. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ss_fit_free(fit: *mut SsFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of covariates, or 0 for a null handle.
///
/// # Safety
/// `fit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ss_fit_dim(fit: *const SsFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.dim())
}

/// Number of retained draws, or 0 for a null handle.
///
/// # Safety
/// `fit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ss_fit_draws(fit: *const SsFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.len())
}

unsafe fn copy_vector(fit: *const SsFit, buffer: *mut f64, len: usize, pick: fn(&SampleStore) -> Result<Vec<f64>, Error>) -> SsStatus {
    guard(|| {
        let fit = deref(fit, "fit")?;
        if buffer.is_null() {
            return Err(Failure::Null("buffer"));
        }
        let v = pick(&fit.0)?;
        if len < v.len() {
            return Err(Error::InvalidArgument(format!(
                "buffer holds {len} values, {} needed",
                v.len()
            ))
            .into());
        }
        std::slice::from_raw_parts_mut(buffer, v.len()).copy_from_slice(&v);
        Ok(())
    })
}

/// Writes the `d` posterior inclusion probabilities into `buffer`.
///
/// # Safety
/// `buffer` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ss_fit_inclusion_probabilities(
    fit: *const SsFit,
    buffer: *mut f64,
    len: usize,
) -> SsStatus {
    copy_vector(fit, buffer, len, spikeslab::posterior::inclusion_probabilities)
}

/// Writes the `d` posterior mean coefficients into `buffer`.
///
/// # Safety
/// `buffer` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ss_fit_posterior_mean_beta(
    fit: *const SsFit,
    buffer: *mut f64,
    len: usize,
) -> SsStatus {
    copy_vector(fit, buffer, len, |s| Ok(s.posterior_mean_beta()))
}

/// JSON summary with inclusion probabilities and the `top_k` most visited models.
/// Release the string with [`ss_string_free`].
///
/// # Safety
/// `fit` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_fit_report_json(
    fit: *const SsFit,
    top_k: usize,
    out_json: *mut *mut c_char,
) -> SsStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = ptr::null_mut();
        let fit = deref(fit, "fit")?;
        let report = PosteriorReport::from_store(&fit.0, top_k)?;
        let json = spikeslab::report::to_json(&report)?;
        *slot = CString::new(json)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn index_set(p: *const usize, len: usize) -> Result<InclusionSet, Failure> {
    if len == 0 {
        return Ok(InclusionSet::default());
    }
    if p.is_null() {
        return Err(Failure::Null("model indices"));
    }
    Ok(InclusionSet::new(std::slice::from_raw_parts(p, len).to_vec()))
}

/// Log Bayes factor of `model` against `alternative` from visit frequencies,
/// divided by the prior odds when `correct_prior_odds` is non-zero. Infinite
/// results are returned as `±INFINITY`.
///
/// # Safety
/// Index arrays must hold the given number of elements.
#[no_mangle]
pub unsafe extern "C" fn ss_fit_log_bayes_factor(
    fit: *const SsFit,
    model: *const usize,
    model_len: usize,
    alternative: *const usize,
    alternative_len: usize,
    correct_prior_odds: i32,
    out_value: *mut f64,
) -> SsStatus {
    guard(|| {
        let fit = deref(fit, "fit")?;
        let a = index_set(model, model_len)?;
        let b = index_set(alternative, alternative_len)?;
        *out(out_value, "out_value")? = estimate_log_bf(&fit.0, &a, &b, correct_prior_odds != 0)?;
        Ok(())
    })
}

/// Spike variance matching the slab density at `δ`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_calibrate_sigma0(
    delta: f64,
    nu_1: f64,
    eta_1_sq: f64,
    out_value: *mut f64,
) -> SsStatus {
    guard(|| {
        *out(out_value, "out_value")? = calibrate_sigma0(delta, nu_1, eta_1_sq)?.sigma0_sq;
        Ok(())
    })
}

/// Marginal slab density at `beta` (requires `|beta| ≥ delta`).
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_slab_marginal_density(
    beta: f64,
    nu_1: f64,
    eta_1_sq: f64,
    delta: f64,
    out_value: *mut f64,
) -> SsStatus {
    guard(|| {
        *out(out_value, "out_value")? = slab_marginal_density(beta, nu_1, eta_1_sq, delta)?;
        Ok(())
    })
}

/// `log ∫_region exp(-(x - mean)² / (2 var)) dx`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_log_trunc_norm_const(
    region: SsRegion,
    delta: f64,
    mean: f64,
    var: f64,
    out_value: *mut f64,
) -> SsStatus {
    guard(|| {
        let r = match region {
            SsRegion::Inner => SupportRegion::Inner(delta),
            SsRegion::Outer => SupportRegion::Outer(delta),
            SsRegion::Full => SupportRegion::Full,
        };
        *out(out_value, "out_value")? = log_trunc_norm_const(r, mean, var)?;
        Ok(())
    })
}
