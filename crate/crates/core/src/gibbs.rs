//! Systematic-scan Gibbs sampler over `(z, β, σ_r², σ₁²)`.
//!
//! Each sweep visits coordinates `1..d` in order, drawing the inclusion
//! indicator with `β_j` integrated out and then `β_j` from its truncated
//! normal conditional, followed by the noise variance and the slab variance.
//! Residual cross-products are kept current through `gram · β`, so a sweep
//! costs `O(d²)` regardless of `n`.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::normal::{log_gauss_norm, log_ndtr};
use crate::distributions::{
    log_trunc_norm_const, sample_scaled_inv_chisq, sample_scaled_inv_chisq_below,
    sample_trunc_norm, scaled_inv_chisq_logpdf,
    ScaledInvChiSqParams, SupportRegion,
};
use crate::error::{Error, Result};
use crate::model::{log_prior_size, ChainState, PriorConfig, PriorMode, RegressionData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    /// Total sweeps `M`, burn-in included.
    pub iterations: usize,
    pub burn_in_fraction: f64,
    pub seed: u64,
    /// Accepted slice transitions per slab-variance update.
    pub slice_burn_in: usize,
    /// Proposals allowed within a single slice transition.
    pub slice_rejection_cap: usize,
    pub thinning: usize,
    /// Keep every retained coefficient vector (memory grows as `draws × d`).
    pub store_coefficients: bool,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burn_in_fraction: 0.10,
            seed: 0,
            slice_burn_in: 10,
            slice_rejection_cap: 10_000,
            thinning: 1,
            store_coefficients: true,
        }
    }
}

impl SamplerSettings {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations < 10 {
            return Err(Error::invalid(format!(
                "at least 10 iterations are required, got {}",
                self.iterations
            )));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::invalid(format!(
                "burn-in fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            )));
        }
        if self.thinning == 0 || self.slice_burn_in == 0 || self.slice_rejection_cap == 0 {
            return Err(Error::invalid(
                "thinning, slice burn-in and slice rejection cap must be positive",
            ));
        }
        Ok(())
    }

    pub fn burn_in(&self) -> usize {
        (self.iterations as f64 * self.burn_in_fraction).floor() as usize
    }

    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in()) / self.thinning
    }
}

/// Sorted, zero-based indices of the included covariates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct InclusionSet(Vec<usize>);

impl InclusionSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    pub fn from_indicators(z: &[bool]) -> Self {
        Self(z.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect())
    }

    pub fn to_indicators(&self, d: usize) -> Vec<bool> {
        let mut z = vec![false; d];
        for &j in &self.0 {
            if j < d {
                z[j] = true;
            }
        }
        z
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    /// One-based labels, as covariates are usually numbered in reports.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|j| j + 1).collect()
    }
}

impl FromIterator<usize> for InclusionSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceStats {
    /// Accepted `(U, σ₁²)` transitions.
    pub transitions: u64,
    pub proposals: u64,
    /// Transitions whose first proposal was accepted.
    #[serde(default)]
    pub first_accepted: u64,
}

impl SliceStats {
    /// Accepted transitions per proposal.
    pub fn acceptance_rate(&self) -> Option<f64> {
        (self.proposals > 0).then(|| self.transitions as f64 / self.proposals as f64)
    }

    /// Fraction of transitions accepted on the first proposal, an unbiased
    /// estimate of the mean acceptance probability `E[P(h(σ₁²) > U)]`.
    pub fn first_proposal_rate(&self) -> Option<f64> {
        (self.transitions > 0).then(|| self.first_accepted as f64 / self.transitions as f64)
    }

    pub fn absorb(&mut self, other: SliceStats) {
        self.transitions += other.transitions;
        self.proposals += other.proposals;
        self.first_accepted += other.first_accepted;
    }
}

/// Post-burn-in draws and the visit frequencies of each inclusion vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStore {
    dim: usize,
    /// Count per model, in order of first visit.
    models: IndexMap<InclusionSet, usize>,
    model_of_draw: Vec<u32>,
    sigma_r_sq: Vec<f64>,
    sigma1_sq: Vec<f64>,
    beta: Option<Vec<f64>>,
    beta_sum: Vec<f64>,
    pub settings: SamplerSettings,
    pub slice_stats: SliceStats,
}

impl SampleStore {
    fn new(dim: usize, settings: SamplerSettings) -> Self {
        let cap = settings.retained();
        Self {
            dim,
            models: IndexMap::new(),
            model_of_draw: Vec::with_capacity(cap),
            sigma_r_sq: Vec::with_capacity(cap),
            sigma1_sq: Vec::with_capacity(cap),
            beta: settings
                .store_coefficients
                .then(|| Vec::with_capacity(cap * dim)),
            beta_sum: vec![0.0; dim],
            settings,
            slice_stats: SliceStats::default(),
        }
    }

    /// Assembles a store from explicit draws; mostly useful for tests and bindings.
    pub fn from_draws(
        dim: usize,
        draws: impl IntoIterator<Item = (Vec<bool>, f64, f64)>,
    ) -> Result<Self> {
        let mut store = Self::new(
            dim,
            SamplerSettings {
                store_coefficients: false,
                ..SamplerSettings::default()
            },
        );
        for (z, sr, s1) in draws {
            if z.len() != dim {
                return Err(Error::invalid(format!(
                    "draw has {} indicators, expected {dim}",
                    z.len()
                )));
            }
            let state = ChainState {
                beta: vec![0.0; dim],
                z,
                sigma_r_sq: sr,
                sigma1_sq: s1,
            };
            store.record(&state);
        }
        Ok(store)
    }

    fn record(&mut self, state: &ChainState) {
        let key = InclusionSet::from_indicators(&state.z);
        let entry = self.models.entry(key);
        let idx = entry.index();
        *entry.or_insert(0) += 1;
        self.model_of_draw.push(idx as u32);
        self.sigma_r_sq.push(state.sigma_r_sq);
        self.sigma1_sq.push(state.sigma1_sq);
        if let Some(b) = self.beta.as_mut() {
            b.extend_from_slice(&state.beta);
        }
        for (acc, &b) in self.beta_sum.iter_mut().zip(&state.beta) {
            *acc += b;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.model_of_draw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.model_of_draw.is_empty()
    }

    /// Visit counts keyed by inclusion vector, in order of first visit.
    pub fn model_counts(&self) -> &IndexMap<InclusionSet, usize> {
        &self.models
    }

    pub fn model_count(&self, model: &InclusionSet) -> usize {
        self.models.get(model).copied().unwrap_or(0)
    }

    pub fn model_of_draw(&self, i: usize) -> &InclusionSet {
        self.models
            .get_index(self.model_of_draw[i] as usize)
            .map(|(k, _)| k)
            .expect("draw refers to a recorded model")
    }

    pub fn sigma_r_sq(&self) -> &[f64] {
        &self.sigma_r_sq
    }

    pub fn sigma1_sq(&self) -> &[f64] {
        &self.sigma1_sq
    }

    /// Coefficient vector of retained draw `i`, when coefficients were stored.
    pub fn beta(&self, i: usize) -> Option<&[f64]> {
        self.beta
            .as_ref()
            .map(|b| &b[i * self.dim..(i + 1) * self.dim])
    }

    pub fn posterior_mean_beta(&self) -> Vec<f64> {
        let n = self.len().max(1) as f64;
        self.beta_sum.iter().map(|s| s / n).collect()
    }
}

/// Cached per-sweep quantities and the `gram · β` product.
pub struct GibbsSampler<'a> {
    data: &'a RegressionData,
    cfg: &'a PriorConfig,
    settings: SamplerSettings,
    state: ChainState,
    gram_beta: Vec<f64>,
    included: usize,
    spike_log_norm: f64,
    slab_log_norm: f64,
    log_prior_sizes: Vec<f64>,
    slice_stats: SliceStats,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(
        data: &'a RegressionData,
        cfg: &'a PriorConfig,
        settings: SamplerSettings,
        state: ChainState,
    ) -> Result<Self> {
        cfg.validate()?;
        settings.validate()?;
        let d = data.dim();
        if state.beta.len() != d || state.z.len() != d {
            return Err(Error::invalid(format!(
                "initial state dimension does not match d = {d}"
            )));
        }
        if !(state.sigma_r_sq > 0.0 && state.sigma1_sq > 0.0) {
            return Err(Error::invalid("initial variances must be positive"));
        }
        let gram_beta = data.gram().dot(&ndarray::ArrayView1::from(&state.beta)).to_vec();
        let spike_log_norm = spike_log_norm(cfg)?;
        let slab_log_norm = region_log_norm(cfg.slab_region(), state.sigma1_sq)?;
        Ok(Self {
            data,
            cfg,
            settings,
            included: state.included(),
            state,
            gram_beta,
            spike_log_norm,
            slab_log_norm,
            log_prior_sizes: (0..=d).map(|s| log_prior_size(d, s)).collect(),
            slice_stats: SliceStats::default(),
        })
    }

    /// Start state: nothing included, coefficients drawn from the spike.
    pub fn initial_state<R: Rng + ?Sized>(
        data: &RegressionData,
        cfg: &PriorConfig,
        rng: &mut R,
    ) -> Result<ChainState> {
        let d = data.dim();
        let beta = if cfg.is_dirac() {
            vec![0.0; d]
        } else {
            (0..d)
                .map(|_| sample_trunc_norm(cfg.spike_region(), 0.0, cfg.spike_var(), rng))
                .collect::<Result<_>>()?
        };
        Ok(ChainState {
            beta,
            z: vec![false; d],
            sigma_r_sq: cfg.eta_r_sq,
            sigma1_sq: cfg.eta_1_sq,
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn slice_stats(&self) -> SliceStats {
        self.slice_stats
    }

    /// `ỹᵀx_j` with `ỹ = y - X_{-j} β_{-j}`.
    fn partial_residual(&self, j: usize) -> f64 {
        self.data.xty()[j] - self.gram_beta[j] + self.data.gram()[[j, j]] * self.state.beta[j]
    }

    pub fn indicator_log_weights(&self, j: usize) -> Result<(f64, f64)> {
        let others = self.included - usize::from(self.state.z[j]);
        indicator_log_weights(
            j,
            self.partial_residual(j),
            self.data.gram()[[j, j]],
            &self.state,
            self.cfg,
            self.spike_log_norm,
            self.slab_log_norm,
            self.log_prior_sizes[others],
            self.log_prior_sizes[others + 1],
        )
    }

    pub fn update_indicator<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) -> Result<()> {
        let (w0, w1) = self.indicator_log_weights(j)?;
        let next = draw_indicator(j, w0, w1, rng)?;
        if next != self.state.z[j] {
            if next {
                self.included += 1;
            } else {
                self.included -= 1;
            }
            self.state.z[j] = next;
        }
        Ok(())
    }

    pub fn update_coefficient<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) -> Result<()> {
        let next = draw_coefficient(
            j,
            self.partial_residual(j),
            self.data.gram()[[j, j]],
            &self.state,
            self.cfg,
            rng,
        )?;
        let delta = next - self.state.beta[j];
        if delta != 0.0 {
            let gram = self.data.gram();
            for (gb, &g) in self.gram_beta.iter_mut().zip(gram.column(j).iter()) {
                *gb += delta * g;
            }
            self.state.beta[j] = next;
        }
        Ok(())
    }

    pub fn update_noise_variance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let b = &self.state.beta;
        let rss = self.data.yty() - 2.0 * dot(b, self.data.xty().as_slice().expect("contiguous"))
            + dot(b, &self.gram_beta);
        let post = noise_posterior(rss, self.data.n(), self.cfg)?;
        self.state.sigma_r_sq = sample_scaled_inv_chisq(post, rng)?;
        Ok(())
    }

    pub fn update_slab_variance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let (next, stats) = slice_slab_variance(&self.state, self.cfg, &self.settings, rng)?;
        self.slice_stats.absorb(stats);
        self.state.sigma1_sq = next;
        self.slab_log_norm = region_log_norm(self.cfg.slab_region(), next)?;
        Ok(())
    }

    /// One full sweep in the order `1..d`.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        for j in 0..self.data.dim() {
            self.update_indicator(j, rng)?;
            self.update_coefficient(j, rng)?;
        }
        self.update_noise_variance(rng)?;
        self.update_slab_variance(rng)
    }

    fn run(mut self, rng: &mut ChaCha8Rng, fixed_model: bool) -> Result<SampleStore> {
        let mut store = SampleStore::new(self.data.dim(), self.settings);
        let burn_in = self.settings.burn_in();
        for t in 0..self.settings.iterations {
            let step = if fixed_model {
                self.sweep_fixed_model(rng)
            } else {
                self.sweep(rng)
            };
            step.map_err(|e| match e {
                Error::NumericalFailure(msg) => Error::numerical(format!("iteration {t}: {msg}")),
                other => other,
            })?;
            if t >= burn_in && (t - burn_in + 1) % self.settings.thinning == 0 {
                store.record(&self.state);
            }
        }
        store.slice_stats = self.slice_stats;
        Ok(store)
    }

    /// Sweep with every indicator held fixed.
    fn sweep_fixed_model<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        for j in 0..self.data.dim() {
            self.update_coefficient(j, rng)?;
        }
        self.update_noise_variance(rng)?;
        self.update_slab_variance(rng)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn region_log_norm(region: SupportRegion, var: f64) -> Result<f64> {
    match region {
        SupportRegion::Full => Ok(log_gauss_norm(var)),
        r => log_trunc_norm_const(r, 0.0, var),
    }
}

fn spike_log_norm(cfg: &PriorConfig) -> Result<f64> {
    if cfg.is_dirac() {
        Ok(0.0)
    } else {
        region_log_norm(cfg.spike_region(), cfg.spike_var())
    }
}

/// Mean and variance of the `β_j` conditional under prior variance `prior_var`.
#[inline]
fn coefficient_posterior(r: f64, gjj: f64, sigma_r_sq: f64, prior_var: f64) -> (f64, f64) {
    let precision = gjj / sigma_r_sq + 1.0 / prior_var;
    let var = 1.0 / precision;
    (var * r / sigma_r_sq, var)
}

#[allow(clippy::too_many_arguments)]
fn indicator_log_weights(
    j: usize,
    r: f64,
    gjj: f64,
    state: &ChainState,
    cfg: &PriorConfig,
    spike_norm: f64,
    slab_norm: f64,
    log_prior_excluded: f64,
    log_prior_included: f64,
) -> Result<(f64, f64)> {
    let integrated = |region: SupportRegion, prior_var: f64, prior_norm: f64| -> Result<f64> {
        let (mean, var) = coefficient_posterior(r, gjj, state.sigma_r_sq, prior_var);
        let post_norm = match region {
            SupportRegion::Full => log_gauss_norm(var),
            reg => log_trunc_norm_const(reg, mean, var)?,
        };
        Ok(0.5 * mean * r / state.sigma_r_sq + post_norm - prior_norm)
    };
    let w0 = if cfg.is_dirac() {
        log_prior_excluded
    } else {
        log_prior_excluded + integrated(cfg.spike_region(), cfg.spike_var(), spike_norm)?
    };
    let w1 = log_prior_included + integrated(cfg.slab_region(), state.sigma1_sq, slab_norm)?;
    if w0.is_nan() || w1.is_nan() || w0 == f64::INFINITY || w1 == f64::INFINITY {
        return Err(Error::numerical(format!(
            "indicator weights for coordinate {j} are not finite: ({w0}, {w1})"
        )));
    }
    Ok((w0, w1))
}

fn draw_indicator<R: Rng + ?Sized>(j: usize, w0: f64, w1: f64, rng: &mut R) -> Result<bool> {
    if w0 == f64::NEG_INFINITY && w1 == f64::NEG_INFINITY {
        return Err(Error::numerical(format!(
            "both indicator weights vanish for coordinate {j}"
        )));
    }
    Ok(rng.gen::<f64>() < inclusion_probability(w0, w1))
}

/// `P(z_j = 1)` from the two unnormalized log weights.
pub fn inclusion_probability(log_w0: f64, log_w1: f64) -> f64 {
    if log_w1 == f64::NEG_INFINITY {
        return 0.0;
    }
    if log_w0 == f64::NEG_INFINITY {
        return 1.0;
    }
    1.0 / (1.0 + (log_w0 - log_w1).exp())
}

fn draw_coefficient<R: Rng + ?Sized>(
    j: usize,
    r: f64,
    gjj: f64,
    state: &ChainState,
    cfg: &PriorConfig,
    rng: &mut R,
) -> Result<f64> {
    let (region, prior_var) = if state.z[j] {
        (cfg.slab_region(), state.sigma1_sq)
    } else if cfg.is_dirac() {
        return Ok(0.0);
    } else {
        (cfg.spike_region(), cfg.spike_var())
    };
    let (mean, var) = coefficient_posterior(r, gjj, state.sigma_r_sq, prior_var);
    sample_trunc_norm(region, mean, var, rng)
        .map_err(|e| Error::numerical(format!("coefficient {j}: {e}")))
}

fn noise_posterior(rss: f64, n: usize, cfg: &PriorConfig) -> Result<ScaledInvChiSqParams> {
    let dof = cfg.nu_r + n as f64;
    ScaledInvChiSqParams::new(dof, (rss.max(0.0) + cfg.nu_r * cfg.eta_r_sq) / dof)
}

fn slab_posterior(state: &ChainState, cfg: &PriorConfig) -> Result<(usize, ScaledInvChiSqParams)> {
    let (s, sumsq) = state
        .beta
        .iter()
        .zip(&state.z)
        .filter(|(_, &z)| z)
        .fold((0usize, 0.0), |(s, acc), (&b, _)| (s + 1, acc + b * b));
    let dof = cfg.nu_1 + s as f64;
    let post = ScaledInvChiSqParams::new(dof, (cfg.nu_1 * cfg.eta_1_sq + sumsq) / dof)?;
    Ok((s, post))
}

/// `log h(σ₁²) = s · log((2πσ₁²)^{1/2} / ι(ℛ, σ₁²))`.
fn log_slice_factor(s: usize, delta: f64, sigma1_sq: f64) -> f64 {
    if s == 0 || delta == 0.0 {
        return 0.0;
    }
    -(s as f64) * (std::f64::consts::LN_2 + log_ndtr(-delta / sigma1_sq.sqrt()))
}

fn slice_slab_variance<R: Rng + ?Sized>(
    state: &ChainState,
    cfg: &PriorConfig,
    settings: &SamplerSettings,
    rng: &mut R,
) -> Result<(f64, SliceStats)> {
    let (s, post) = slab_posterior(state, cfg)?;
    let mut stats = SliceStats::default();
    if s == 0 || cfg.delta == 0.0 || cfg.mode == PriorMode::FullSupport {
        // h ≡ 1: the conditional is the conjugate Inv-χ² itself.
        return Ok((sample_scaled_inv_chisq(post, rng)?, stats));
    }
    let log_h = |v: f64| log_slice_factor(s, cfg.delta, v);
    let mut current = post.mode();
    for _ in 0..settings.slice_burn_in {
        let log_u = log_h(current) + rng.gen::<f64>().ln();
        let mut accepted = None;
        for attempt in 0..settings.slice_rejection_cap {
            let candidate = sample_scaled_inv_chisq(post, rng)?;
            stats.proposals += 1;
            if log_u < log_h(candidate) {
                stats.first_accepted += u64::from(attempt == 0);
                accepted = Some(candidate);
                break;
            }
        }
        current = match accepted {
            Some(v) => v,
            None => {
                // The slice {h > U} is (0, t_U) since h decreases; an accepted
                // proposal is Inv-χ² restricted to it, so draw that directly.
                let upper = slice_upper_bound(log_u, current, log_h)?;
                stats.proposals += 1;
                sample_scaled_inv_chisq_below(post, upper, rng)?
            }
        };
        stats.transitions += 1;
    }
    Ok((current, stats))
}

/// Solves `log h(t) = log_u` for the right end of the slice, given a point
/// `inside` with `log h(inside) > log_u`.
fn slice_upper_bound(log_u: f64, inside: f64, log_h: impl Fn(f64) -> f64) -> Result<f64> {
    if log_u <= 0.0 {
        // h ≥ 1 everywhere, so the slice is unbounded.
        return Ok(f64::INFINITY);
    }
    let mut lo = inside.ln();
    let mut hi = lo + 1.0;
    let mut grown = 0;
    while log_h(hi.exp()) > log_u {
        hi += (hi - lo).max(1.0);
        grown += 1;
        if grown > 200 {
            return Err(Error::numerical("slice boundary search diverged"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_h(mid.exp()) > log_u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi.exp())
}

fn fresh_partial_residual(j: usize, beta: &[f64], data: &RegressionData) -> f64 {
    let g = data.gram();
    let row = g.row(j);
    let gb: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
    data.xty()[j] - gb + g[[j, j]] * beta[j]
}

fn check_coordinate(j: usize, state: &ChainState, data: &RegressionData) -> Result<()> {
    let d = data.dim();
    if j >= d || state.beta.len() != d || state.z.len() != d {
        return Err(Error::invalid(format!(
            "coordinate {j} or state dimensions inconsistent with d = {d}"
        )));
    }
    Ok(())
}

/// Unnormalized log weights of `z_j = 0` and `z_j = 1` with `β_j` integrated out.
pub fn conditional_z_weights(
    j: usize,
    state: &ChainState,
    data: &RegressionData,
    cfg: &PriorConfig,
) -> Result<(f64, f64)> {
    check_coordinate(j, state, data)?;
    cfg.validate()?;
    let d = data.dim();
    let others = state.included() - usize::from(state.z[j]);
    indicator_log_weights(
        j,
        fresh_partial_residual(j, &state.beta, data),
        data.gram()[[j, j]],
        state,
        cfg,
        spike_log_norm(cfg)?,
        region_log_norm(cfg.slab_region(), state.sigma1_sq)?,
        log_prior_size(d, others),
        log_prior_size(d, others + 1),
    )
}

/// Redraws `z_j`; callers must follow with [`sample_beta`] to restore the support invariant.
pub fn sample_z<R: Rng + ?Sized>(
    j: usize,
    state: &mut ChainState,
    data: &RegressionData,
    cfg: &PriorConfig,
    rng: &mut R,
) -> Result<bool> {
    let (w0, w1) = conditional_z_weights(j, state, data, cfg)?;
    let z = draw_indicator(j, w0, w1, rng)?;
    state.z[j] = z;
    Ok(z)
}

pub fn sample_beta<R: Rng + ?Sized>(
    j: usize,
    state: &mut ChainState,
    data: &RegressionData,
    cfg: &PriorConfig,
    rng: &mut R,
) -> Result<f64> {
    check_coordinate(j, state, data)?;
    cfg.validate()?;
    let r = fresh_partial_residual(j, &state.beta, data);
    let b = draw_coefficient(j, r, data.gram()[[j, j]], state, cfg, rng)?;
    state.beta[j] = b;
    Ok(b)
}

pub fn sample_sigma_r<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &RegressionData,
    cfg: &PriorConfig,
    rng: &mut R,
) -> Result<f64> {
    let rss = crate::model::residual_sum_squares(&state.beta, data);
    let post = noise_posterior(rss, data.n(), cfg)?;
    state.sigma_r_sq = sample_scaled_inv_chisq(post, rng)?;
    Ok(state.sigma_r_sq)
}

/// Slice-sampler update of `σ₁²`; returns the new value and acceptance bookkeeping.
pub fn sample_sigma1_slice<R: Rng + ?Sized>(
    state: &mut ChainState,
    cfg: &PriorConfig,
    settings: &SamplerSettings,
    rng: &mut R,
) -> Result<(f64, SliceStats)> {
    let (v, stats) = slice_slab_variance(state, cfg, settings, rng)?;
    state.sigma1_sq = v;
    Ok((v, stats))
}

/// Unnormalized log conditional of `β_j` at `value`, everything else fixed.
pub fn log_beta_conditional(
    j: usize,
    value: f64,
    state: &ChainState,
    data: &RegressionData,
    cfg: &PriorConfig,
) -> Result<f64> {
    check_coordinate(j, state, data)?;
    let (region, prior_var) = if state.z[j] {
        (cfg.slab_region(), state.sigma1_sq)
    } else if cfg.is_dirac() {
        return Ok(if value == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    } else {
        (cfg.spike_region(), cfg.spike_var())
    };
    if !region.contains(value) {
        return Ok(f64::NEG_INFINITY);
    }
    let r = fresh_partial_residual(j, &state.beta, data);
    let (mean, var) = coefficient_posterior(r, data.gram()[[j, j]], state.sigma_r_sq, prior_var);
    Ok(-0.5 * (value - mean).powi(2) / var)
}

/// Log density of the `σ_r²` conditional at `value`.
pub fn log_sigma_r_conditional(
    value: f64,
    state: &ChainState,
    data: &RegressionData,
    cfg: &PriorConfig,
) -> Result<f64> {
    let rss = crate::model::residual_sum_squares(&state.beta, data);
    scaled_inv_chisq_logpdf(value, noise_posterior(rss, data.n(), cfg)?)
}

/// Unnormalized log of the slice-sampler target `h(σ₁²) · Inv-χ²(σ₁² | ν̃, η̃²)`.
pub fn log_slice_target(value: f64, state: &ChainState, cfg: &PriorConfig) -> Result<f64> {
    let (s, post) = slab_posterior(state, cfg)?;
    let log_h = if cfg.mode == PriorMode::FullSupport {
        0.0
    } else {
        log_slice_factor(s, cfg.delta, value)
    };
    Ok(log_h + scaled_inv_chisq_logpdf(value, post)?)
}

/// Runs the full chain and keeps post-burn-in draws.
pub fn run_chain(
    data: &RegressionData,
    cfg: &PriorConfig,
    settings: &SamplerSettings,
) -> Result<SampleStore> {
    settings.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let init = GibbsSampler::initial_state(data, cfg, &mut rng)?;
    let sampler = GibbsSampler::new(data, cfg, *settings, init)?;
    sampler.run(&mut rng, false)
}

/// Chain with every covariate of `data` held in the slab; returns its store.
pub fn run_fixed_model_chain(
    data: &RegressionData,
    cfg: &PriorConfig,
    settings: &SamplerSettings,
) -> Result<SampleStore> {
    settings.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let d = data.dim();
    let beta = data
        .xty()
        .iter()
        .map(|&c| if c < 0.0 { -cfg.delta } else { cfg.delta })
        .collect();
    let init = ChainState {
        beta,
        z: vec![true; d],
        sigma_r_sq: cfg.eta_r_sq,
        sigma1_sq: cfg.eta_1_sq,
    };
    let sampler = GibbsSampler::new(data, cfg, *settings, init)?;
    sampler.run(&mut rng, true)
}
