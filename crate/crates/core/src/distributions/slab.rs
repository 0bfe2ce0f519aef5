use serde::{Deserialize, Serialize};

use super::invchisq::{log_density_unchecked, ScaledInvChiSqParams};
use super::normal::{log_gauss_norm, log_mass_interval, log_ndtr};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Stop widening the integration window once a new tail piece adds less than this.
const TAIL_FRACTION: f64 = 1e-12;
const MAX_EXPANSIONS: usize = 64;

/// Solution of the boundary-indifference equation for the spike variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub sigma0_sq: f64,
    pub slab_density: f64,
    pub spike_density: f64,
    pub relative_residual: f64,
}

/// Marginal slab prior density at `beta`, with the slab variance integrated
/// against its `Inv-χ²(ν₁, η₁²)` hyper-prior.
pub fn slab_marginal_density(beta: f64, nu1: f64, eta1_sq: f64, delta: f64) -> Result<f64> {
    ln_slab_marginal_density(beta, nu1, eta1_sq, delta).map(f64::exp)
}

pub fn ln_slab_marginal_density(beta: f64, nu1: f64, eta1_sq: f64, delta: f64) -> Result<f64> {
    let prior = ScaledInvChiSqParams::new(nu1, eta1_sq)?;
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("δ must be finite and ≥ 0, got {delta}")));
    }
    if !beta.is_finite() || beta.abs() < delta {
        return Err(Error::invalid(format!(
            "slab density is supported on |β| ≥ δ; got β = {beta}, δ = {delta}"
        )));
    }
    let b2 = beta * beta;
    // Integrand in u = log σ₁², including the Jacobian e^u.
    let log_integrand = |u: f64| {
        let s2 = u.exp();
        let log_tail = if delta > 0.0 {
            std::f64::consts::LN_2 + log_ndtr(-delta / s2.sqrt())
        } else {
            0.0
        };
        u - 0.5 * b2 / s2 - log_gauss_norm(s2) - log_tail + log_density_unchecked(s2, prior)
    };

    // Locate the peak on a coarse grid so the shifted integrand is O(1).
    let anchor_lo = eta1_sq.ln().min(b2.max(f64::MIN_POSITIVE).ln()).max(-700.0);
    let anchor_hi = eta1_sq.ln().max(b2.max(f64::MIN_POSITIVE).ln()).max(-700.0);
    let (grid_lo, grid_hi) = (anchor_lo - 30.0, anchor_hi + 30.0);
    let steps = 240;
    let mut peak_u = grid_lo;
    let mut peak = f64::NEG_INFINITY;
    for i in 0..=steps {
        let u = grid_lo + (grid_hi - grid_lo) * i as f64 / steps as f64;
        let v = log_integrand(u);
        if v > peak {
            peak = v;
            peak_u = u;
        }
    }
    if !peak.is_finite() {
        return Err(Error::numerical(format!(
            "slab integrand has no finite mass for β = {beta}, ν₁ = {nu1}, η₁² = {eta1_sq}, δ = {delta}"
        )));
    }

    let shifted = |u: f64| {
        let v = (log_integrand(u) - peak).exp();
        if v.is_nan() {
            0.0
        } else {
            v
        }
    };
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };
    let mut lo = peak_u - 8.0;
    let mut hi = peak_u + 8.0;
    let core = integrate(shifted, lo, hi, opts)?;
    let mut total = core.value;
    let mut err = core.error;

    let mut width = 8.0;
    let (mut left_done, mut right_done) = (false, false);
    for _ in 0..MAX_EXPANSIONS {
        if left_done && right_done {
            break;
        }
        let piece_opts = QuadOptions {
            abs_tol: total * TAIL_FRACTION,
            ..opts
        };
        if !left_done {
            let piece = integrate(shifted, lo - width, lo, piece_opts)?;
            lo -= width;
            total += piece.value;
            err += piece.error;
            left_done = piece.value < TAIL_FRACTION * total;
        }
        if !right_done {
            let piece = integrate(shifted, hi, hi + width, piece_opts)?;
            hi += width;
            total += piece.value;
            err += piece.error;
            right_done = piece.value < TAIL_FRACTION * total;
        }
        width *= 2.0;
    }
    if !(left_done && right_done) {
        return Err(Error::numerical(format!(
            "slab quadrature tail did not vanish: window [{lo}, {hi}], estimate {total:.6e}, error {err:.3e}"
        )));
    }
    if err > 1e-8 * total {
        return Err(Error::numerical(format!(
            "slab quadrature error {err:.3e} exceeds tolerance for estimate {total:.6e}"
        )));
    }
    Ok(peak + total.ln())
}

/// `log` of the truncated-normal spike density at its boundary `δ`.
pub fn ln_spike_boundary_density(delta: f64, sigma0_sq: f64) -> f64 {
    let sd = sigma0_sq.sqrt();
    let t = delta / sd;
    -0.5 * t * t - log_gauss_norm(sigma0_sq) - log_mass_interval(-t, t)
}

/// Finds the spike variance that makes spike and slab densities agree at `δ`.
pub fn calibrate_sigma0(delta: f64, nu1: f64, eta1_sq: f64) -> Result<Calibration> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!(
            "spike calibration needs δ > 0 (δ = 0 is a Dirac spike), got {delta}"
        )));
    }
    let ln_slab = ln_slab_marginal_density(delta, nu1, eta1_sq, delta)?;
    let ln_sup = -(2.0 * delta).ln();
    let infeasible = || Error::CalibrationInfeasible {
        slab: ln_slab.exp(),
        supremum: ln_sup.exp(),
    };
    if ln_slab >= ln_sup {
        return Err(infeasible());
    }

    let d2 = delta * delta;
    let mut lo = (1e-12 * d2).ln();
    let mut hi = (1e12 * d2).ln();
    let f = |log_s2: f64| ln_spike_boundary_density(delta, log_s2.exp()) - ln_slab;
    if f(lo) >= 0.0 {
        return Err(Error::numerical(format!(
            "spike calibration bracket too wide: boundary density at σ₀² = {:.3e} already exceeds the slab",
            lo.exp()
        )));
    }
    if f(hi) <= 0.0 {
        return Err(infeasible());
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (log_s2, gap) = if f(lo).abs() < f(hi).abs() {
        (lo, f(lo))
    } else {
        (hi, f(hi))
    };
    let relative_residual = gap.exp_m1().abs();
    if relative_residual > 1e-9 {
        return Err(Error::numerical(format!(
            "spike calibration stalled with relative residual {relative_residual:.3e}"
        )));
    }
    let sigma0_sq = log_s2.exp();
    Ok(Calibration {
        sigma0_sq,
        slab_density: ln_slab.exp(),
        spike_density: ln_spike_boundary_density(delta, sigma0_sq).exp(),
        relative_residual,
    })
}
