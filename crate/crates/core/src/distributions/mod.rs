//! Sampling and normalization primitives for the four distribution families
//! the model needs: truncated normals, the scaled inverse chi-square, the
//! marginal slab prior, and the spike-variance calibration built on them.

mod invchisq;
pub mod normal;
mod slab;
mod truncnorm;

use serde::{Deserialize, Serialize};

pub(crate) use invchisq::sample_scaled_inv_chisq_below;
pub use invchisq::{sample_scaled_inv_chisq, scaled_inv_chisq_logpdf, ScaledInvChiSqParams};
pub use slab::{
    calibrate_sigma0, ln_slab_marginal_density, ln_spike_boundary_density,
    slab_marginal_density, Calibration,
};
pub use truncnorm::{log_trunc_norm_const, sample_trunc_norm, MAX_PROPOSALS};

/// Support of a (possibly truncated) normal coefficient prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SupportRegion {
    /// `[-δ, δ]`
    Inner(f64),
    /// `]-∞, -δ] ∪ [δ, ∞[`
    Outer(f64),
    Full,
    /// Dirac spike at zero.
    PointMass0,
}

impl SupportRegion {
    /// Collapses the degenerate aliases: `Inner(0)` is the Dirac spike and
    /// `Outer(0)` is the whole line.
    pub fn canonical(self) -> Self {
        match self {
            SupportRegion::Inner(d) if d == 0.0 => SupportRegion::PointMass0,
            SupportRegion::Outer(d) if d == 0.0 => SupportRegion::Full,
            other => other,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.canonical() {
            SupportRegion::Inner(d) => x.abs() <= d,
            SupportRegion::Outer(d) => x.abs() >= d,
            SupportRegion::Full => x.is_finite(),
            SupportRegion::PointMass0 => x == 0.0,
        }
    }

    pub(crate) fn validate(&self) -> crate::Result<()> {
        match *self {
            SupportRegion::Inner(d) | SupportRegion::Outer(d) if !(d >= 0.0 && d.is_finite()) => {
                Err(crate::Error::invalid(format!(
                    "region threshold must be finite and non-negative, got {d}"
                )))
            }
            _ => Ok(()),
        }
    }
}
