//! Bayesian variable selection for linear regression with disjunct-support
//! spike-and-slab priors.
//!
//! The spike lives on `[-δ, δ]` and the slab on `|β| ≥ δ`, so a coefficient
//! is classified by its magnitude alone. The crate provides the truncated
//! distributions, the joint model, a Gibbs sampler, posterior summaries and a
//! synthetic benchmark harness.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod gibbs;
pub mod model;
pub mod posterior;
pub mod quadrature;
pub mod report;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
