//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spikeslab::model::RegressionData;

/// `Φ(x)` through the complementary error function.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Scaled inverse chi-square log density, written out from its definition.
pub fn inv_chisq_logpdf(x: f64, nu: f64, s2: f64) -> f64 {
    let k = 0.5 * nu;
    k * (k * s2).ln() - libm::lgamma(k) - (k + 1.0) * x.ln() - k * s2 / x
}

/// Trapezoid rule on a uniform grid over `[a, b]`.
pub fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    // Endpoints are evaluated exactly so support boundaries are not lost to rounding.
    let mut total = 0.5 * (f(a) + f(b));
    for i in 1..steps {
        total += f(a + i as f64 * h);
    }
    total * h
}

pub fn random_data(n: usize, d: usize, seed: u64) -> RegressionData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, d), |_| rng.sample::<f64, _>(StandardNormal));
    let y = Array1::from_shape_fn(n, |i| {
        let signal: f64 = (0..d).map(|j| x[[i, j]] * if j % 3 == 0 { 1.0 } else { 0.0 }).sum();
        signal + rng.sample::<f64, _>(StandardNormal)
    });
    RegressionData::new(x, y).unwrap()
}

/// Standard error of the mean of a correlated series from non-overlapping batch means.
pub fn batch_mean_se(series: &[f64], batches: usize) -> f64 {
    let len = series.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| series[b * len..(b + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (var / batches as f64).sqrt()
}

/// Posterior inclusion probability for a one-covariate model with a Dirac
/// spike, default hyperparameters and uniform model prior, by two-dimensional
/// quadrature over `(log σ_r², log σ₁²)` with `β` integrated analytically.
pub fn single_covariate_inclusion(x: &[f64], y: &[f64], nu_r: f64, eta_r_sq: f64, nu_1: f64, eta_1_sq: f64) -> f64 {
    let n = x.len() as f64;
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let xy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let log_lik0 = |sr: f64| -0.5 * n * (ln2pi + sr.ln()) - 0.5 * yy / sr;
    let log_lik1 = |sr: f64, s1: f64| {
        let c = sr + s1 * xx;
        let logdet = n * sr.ln() + (c / sr).ln();
        let quad = (yy - s1 * xy * xy / c) / sr;
        -0.5 * (n * ln2pi + logdet + quad)
    };
    let (lo, hi, steps) = (-30.0, 45.0, 3000);
    let shift = log_lik0(yy / n);
    let m0 = trapezoid(
        |u| {
            let sr = u.exp();
            (log_lik0(sr) - shift + inv_chisq_logpdf(sr, nu_r, eta_r_sq) + u).exp()
        },
        lo,
        hi,
        steps,
    );
    let m1 = trapezoid(
        |u| {
            let sr = u.exp();
            let prior_r = inv_chisq_logpdf(sr, nu_r, eta_r_sq) + u;
            trapezoid(
                |v| {
                    let s1 = v.exp();
                    (log_lik1(sr, s1) - shift + prior_r + inv_chisq_logpdf(s1, nu_1, eta_1_sq) + v).exp()
                },
                lo,
                hi,
                steps,
            )
        },
        lo,
        hi,
        steps,
    );
    m1 / (m0 + m1)
}
