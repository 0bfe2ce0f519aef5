//! Standard-normal CDF and interval masses evaluated in log domain.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::quadrature::{WGK, XGK};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this point `erfc` underflows; the asymptotic series takes over.
const ASYMPTOTIC_CUTOFF: f64 = -30.0;

/// `log Φ(x)`.
pub fn log_ndtr(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if x > 5.0 {
        (-0.5 * libm::erfc(x * FRAC_1_SQRT_2)).ln_1p()
    } else if x > ASYMPTOTIC_CUTOFF {
        (0.5 * libm::erfc(-x * FRAC_1_SQRT_2)).ln()
    } else {
        // Mills-ratio series: Φ(x) = φ(x)/|x| · Σ (-1)^k (2k-1)!! / x^{2k}
        let inv2 = 1.0 / (x * x);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12 {
            term *= -((2 * k - 1) as f64) * inv2;
            sum += term;
        }
        -0.5 * x * x - (-x).ln() - LN_SQRT_2PI + sum.ln()
    }
}

/// `log φ(x)` for the standard normal density.
#[inline]
pub fn log_phi(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// `log(Φ(b) - Φ(a))` for `a ≤ b`, stable in both tails and for narrow intervals.
pub fn log_mass_interval(a: f64, b: f64) -> f64 {
    debug_assert!(a <= b, "interval [{a}, {b}] is reversed");
    if a == b {
        return f64::NEG_INFINITY;
    }
    if b <= 0.0 {
        return log_mass_interval(-b, -a);
    }
    if a < 0.0 {
        // Straddles zero: both erf terms are positive, no cancellation.
        let m = 0.5 * (libm::erf(b * FRAC_1_SQRT_2) + libm::erf(-a * FRAC_1_SQRT_2));
        return m.ln();
    }
    let width = b - a;
    if width * a.max(1.0) < 1.0 {
        // Narrow panel: φ(a) ∫_0^w exp(-(a t + t²/2)) dt by a 15-point Kronrod rule.
        let half = 0.5 * width;
        let g = |t: f64| (-(a * t + 0.5 * t * t)).exp();
        let mut acc = WGK[7] * g(half);
        for (&x, &w) in XGK.iter().zip(WGK.iter()).take(7) {
            acc += w * (g(half - half * x) + g(half + half * x));
        }
        return log_phi(a) + (acc * half).ln();
    }
    let la = log_ndtr(-a);
    let lb = log_ndtr(-b);
    la + (-(lb - la).exp_m1()).ln()
}

/// `log(Φ(a) + 1 - Φ(b))` for `a ≤ b`: mass of the two outer tails.
pub fn log_mass_tails(a: f64, b: f64) -> f64 {
    log_add_exp(log_ndtr(a), log_ndtr(-b))
}

#[inline]
pub fn log_add_exp(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((x - m).exp() + (y - m).exp()).ln()
}

/// `0.5 · log(2π v)`.
#[inline]
pub fn log_gauss_norm(var: f64) -> f64 {
    0.5 * (2.0 * PI * var).ln()
}
