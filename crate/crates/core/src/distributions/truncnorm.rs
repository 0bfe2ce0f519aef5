use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::normal::{log_gauss_norm, log_mass_interval, log_mass_tails, log_ndtr};
use super::SupportRegion;
use crate::error::{Error, Result};

/// Proposal budget for a single truncated-normal draw.
pub const MAX_PROPOSALS: usize = 1_000_000;

/// `log ∫_region exp(-(x - mean)² / (2 var)) dx`.
pub fn log_trunc_norm_const(region: SupportRegion, mean: f64, var: f64) -> Result<f64> {
    check_params(region, mean, var)?;
    let sd = var.sqrt();
    let log_mass = match region.canonical() {
        SupportRegion::Full => 0.0,
        SupportRegion::Inner(d) => log_mass_interval((-d - mean) / sd, (d - mean) / sd),
        SupportRegion::Outer(d) => log_mass_tails((-d - mean) / sd, (d - mean) / sd),
        SupportRegion::PointMass0 => unreachable!("rejected by check_params"),
    };
    Ok(log_gauss_norm(var) + log_mass)
}

/// Exact draw from `N(mean, var)` restricted to `region`.
pub fn sample_trunc_norm<R: Rng + ?Sized>(
    region: SupportRegion,
    mean: f64,
    var: f64,
    rng: &mut R,
) -> Result<f64> {
    check_params(region, mean, var)?;
    let sd = var.sqrt();
    let fail = || {
        Error::numerical(format!(
            "truncated normal rejection cap exceeded for {region:?}, mean {mean}, var {var}"
        ))
    };
    let x = match region.canonical() {
        SupportRegion::Full => mean + sd * rng.sample::<f64, _>(StandardNormal),
        SupportRegion::Inner(d) => {
            let z = std_interval((-d - mean) / sd, (d - mean) / sd, rng).ok_or_else(fail)?;
            (mean + sd * z).clamp(-d, d)
        }
        SupportRegion::Outer(d) => {
            let a = (-d - mean) / sd;
            let b = (d - mean) / sd;
            let log_left = log_ndtr(a);
            let log_right = log_ndtr(-b);
            let p_right = 1.0 / (1.0 + (log_left - log_right).exp());
            if rng.gen::<f64>() < p_right {
                let z = std_lower_tail(b, rng).ok_or_else(fail)?;
                (mean + sd * z).max(d)
            } else {
                let z = -std_lower_tail(-a, rng).ok_or_else(fail)?;
                (mean + sd * z).min(-d)
            }
        }
        SupportRegion::PointMass0 => unreachable!("rejected by check_params"),
    };
    Ok(x)
}

fn check_params(region: SupportRegion, mean: f64, var: f64) -> Result<()> {
    region.validate()?;
    if region.canonical() == SupportRegion::PointMass0 {
        return Err(Error::invalid(
            "the Dirac spike has no normal density; handle it before calling",
        ));
    }
    if !mean.is_finite() || !(var.is_finite() && var > 0.0) {
        return Err(Error::invalid(format!(
            "truncated normal needs finite mean and positive finite variance, got mean {mean}, var {var}"
        )));
    }
    Ok(())
}

/// Standard normal restricted to `[a, ∞)`.
fn std_lower_tail<R: Rng + ?Sized>(a: f64, rng: &mut R) -> Option<f64> {
    if a <= 0.0 {
        for _ in 0..MAX_PROPOSALS {
            let z: f64 = rng.sample(StandardNormal);
            if z >= a {
                return Some(z);
            }
        }
        return None;
    }
    translated_exponential(a, f64::INFINITY, rng)
}

/// Standard normal restricted to `[a, b]`.
fn std_interval<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Option<f64> {
    if b == f64::INFINITY {
        return std_lower_tail(a, rng);
    }
    if a == f64::NEG_INFINITY {
        return std_lower_tail(-b, rng).map(|z| -z);
    }
    if b <= 0.0 {
        return std_interval(-b, -a, rng).map(|z| -z);
    }
    if a < 0.0 {
        if a * a <= 4.0 && b * b <= 4.0 {
            // Uniform proposal, accept with exp(-z²/2).
            for _ in 0..MAX_PROPOSALS {
                let z = a + (b - a) * rng.gen::<f64>();
                if rng.gen::<f64>() <= (-0.5 * z * z).exp() {
                    return Some(z);
                }
            }
            return None;
        }
        for _ in 0..MAX_PROPOSALS {
            let z: f64 = rng.sample(StandardNormal);
            if z >= a && z <= b {
                return Some(z);
            }
        }
        return None;
    }
    // 0 ≤ a < b
    if b * b - a * a <= 2.0 {
        for _ in 0..MAX_PROPOSALS {
            let z = a + (b - a) * rng.gen::<f64>();
            if rng.gen::<f64>() <= (0.5 * (a * a - z * z)).exp() {
                return Some(z);
            }
        }
        return None;
    }
    translated_exponential(a, b, rng)
}

/// Robert's translated-exponential proposal on `[a, b]`, `a ≥ 0`.
fn translated_exponential<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Option<f64> {
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    // log target/proposal is -z²/2 + rate·z, maximized at the clamped rate.
    let peak = rate.clamp(a, b);
    let log_bound = -0.5 * peak * peak + rate * peak;
    // Mass of the exponential inside [a, b].
    let keep = if b.is_finite() {
        -(-rate * (b - a)).exp_m1()
    } else {
        1.0
    };
    for _ in 0..MAX_PROPOSALS {
        let offset = if b.is_finite() {
            -(-rng.gen::<f64>() * keep).ln_1p() / rate
        } else {
            rng.sample::<f64, _>(Exp1) / rate
        };
        let z = a + offset;
        if z > b {
            continue;
        }
        let log_ratio = -0.5 * z * z + rate * z - log_bound;
        if rng.gen::<f64>().ln() <= log_ratio {
            return Some(z);
        }
    }
    None
}
