use rand::Rng;
use rand_distr::{ChiSquared, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Inv-χ²(ν, η²)`: ν acts as a prior observation count, η² as the scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledInvChiSqParams {
    pub dof: f64,
    pub scale: f64,
}

impl ScaledInvChiSqParams {
    pub fn new(dof: f64, scale: f64) -> Result<Self> {
        let p = Self { dof, scale };
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.dof > 0.0 && self.dof.is_finite() && self.scale > 0.0 && self.scale.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "scaled inverse chi-square needs ν > 0 and η² > 0, got ν = {}, η² = {}",
                self.dof, self.scale
            )))
        }
    }

    /// `νη² / (ν + 2)`
    pub fn mode(&self) -> f64 {
        self.dof * self.scale / (self.dof + 2.0)
    }

    /// Log of the normalizing factor `(η²)^{ν/2} (ν/2)^{ν/2} / Γ(ν/2)`.
    pub(crate) fn log_norm(&self) -> f64 {
        let half = 0.5 * self.dof;
        half * self.scale.ln() + half * half.ln() - libm::lgamma(half)
    }
}

/// Draws `ν η² / X` with `X ~ χ²(ν)`.
pub fn sample_scaled_inv_chisq<R: Rng + ?Sized>(
    params: ScaledInvChiSqParams,
    rng: &mut R,
) -> Result<f64> {
    params.validate()?;
    let chi = ChiSquared::new(params.dof).map_err(|e| Error::invalid(e.to_string()))?;
    loop {
        let x: f64 = chi.sample(rng);
        // χ²(ν) with tiny ν can underflow to exactly zero.
        if x > 0.0 {
            return Ok(params.dof * params.scale / x);
        }
    }
}

/// Draws from `Inv-χ²(ν, η²)` restricted to `σ² < upper`.
///
/// Equivalent to `X ~ χ²(ν)` restricted to `X > c` with `c = νη² / upper`.
/// Left of the χ² mode plain rejection accepts more than half the time;
/// beyond it a translated exponential envelope touching the density at `c`
/// is used, which stays efficient however far out `c` is.
pub(crate) fn sample_scaled_inv_chisq_below<R: Rng + ?Sized>(
    params: ScaledInvChiSqParams,
    upper: f64,
    rng: &mut R,
) -> Result<f64> {
    params.validate()?;
    if !(upper > 0.0) {
        return Err(Error::invalid(format!("upper bound must be positive, got {upper}")));
    }
    if upper == f64::INFINITY {
        return sample_scaled_inv_chisq(params, rng);
    }
    let nu_s = params.dof * params.scale;
    let c = nu_s / upper;
    let k = 0.5 * params.dof;
    if k > 1.0 && c <= 2.0 * (k - 1.0) {
        let chi = ChiSquared::new(params.dof).map_err(|e| Error::invalid(e.to_string()))?;
        for _ in 0..super::MAX_PROPOSALS {
            let x: f64 = chi.sample(rng);
            if x > c {
                return Ok(nu_s / x);
            }
        }
    } else {
        let rate = if k > 1.0 { 0.5 - (k - 1.0) / c } else { 0.5 };
        for _ in 0..super::MAX_PROPOSALS {
            let x = c + rng.sample::<f64, _>(rand_distr::Exp1) / rate;
            let log_accept = if k > 1.0 {
                (k - 1.0) * ((x / c).ln() - (x - c) / c)
            } else {
                (k - 1.0) * (x / c).ln()
            };
            if rng.gen::<f64>().ln() <= log_accept {
                return Ok(nu_s / x);
            }
        }
    }
    Err(Error::numerical(format!(
        "truncated inverse chi-square draw below {upper} did not converge"
    )))
}

pub fn scaled_inv_chisq_logpdf(sigma2: f64, params: ScaledInvChiSqParams) -> Result<f64> {
    params.validate()?;
    if !(sigma2 > 0.0) {
        return Err(Error::invalid(format!(
            "scaled inverse chi-square density needs σ² > 0, got {sigma2}"
        )));
    }
    Ok(log_density_unchecked(sigma2, params))
}

#[inline]
pub(crate) fn log_density_unchecked(sigma2: f64, p: ScaledInvChiSqParams) -> f64 {
    if sigma2 == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    p.log_norm() - (0.5 * p.dof + 1.0) * sigma2.ln() - 0.5 * p.dof * p.scale / sigma2
}
