//! Summaries of a [`SampleStore`]: inclusion probabilities, model rankings,
//! MSE-based threshold selection and frequency-based Bayes factors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample_scaled_inv_chisq, ScaledInvChiSqParams};
use crate::error::{Error, Result};
use crate::gibbs::{run_chain, run_fixed_model_chain, InclusionSet, SampleStore, SamplerSettings};
use crate::model::{log_prior_indicator, PriorConfig, RegressionData};
use crate::seed::derive_seed;

/// Default threshold grid for [`select_delta`].
pub const DEFAULT_DELTA_GRID: [f64; 6] = [0.8, 0.5, 0.05, 0.01, 0.001, 0.0];
/// Largest tolerated expected MSE increase.
pub const DEFAULT_MSE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFrequency {
    /// One-based covariate labels.
    pub variables: Vec<usize>,
    pub count: usize,
    pub frequency: f64,
}

fn non_empty(store: &SampleStore) -> Result<()> {
    if store.is_empty() {
        Err(Error::invalid("the sample store holds no retained draws"))
    } else {
        Ok(())
    }
}

pub fn inclusion_probabilities(store: &SampleStore) -> Result<Vec<f64>> {
    non_empty(store)?;
    let mut counts = vec![0usize; store.dim()];
    for (model, &c) in store.model_counts() {
        for &j in model.indices() {
            counts[j] += c;
        }
    }
    let total = store.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// The `k` most visited models; equal counts keep first-visit order.
pub fn top_models(store: &SampleStore, k: usize) -> Vec<ModelFrequency> {
    let mut ranked: Vec<(&InclusionSet, usize)> =
        store.model_counts().iter().map(|(m, &c)| (m, c)).collect();
    // Stable sort, so ties stay in first-visit order.
    ranked.sort_by(|a, b| b.1.cmp(&a.1));
    let total = store.len().max(1) as f64;
    ranked
        .into_iter()
        .take(k)
        .map(|(m, c)| ModelFrequency {
            variables: m.one_based(),
            count: c,
            frequency: c as f64 / total,
        })
        .collect()
}

/// Most visited model (`z*`).
pub fn most_frequent_model(store: &SampleStore) -> Result<InclusionSet> {
    non_empty(store)?;
    let mut best: Option<(&InclusionSet, usize)> = None;
    for (m, &c) in store.model_counts() {
        if best.map_or(true, |(_, bc)| c > bc) {
            best = Some((m, c));
        }
    }
    Ok(best.expect("store is non-empty").0.clone())
}

/// Posterior mean of `σ_r²` over retained draws.
pub fn estimate_mse_bma(store: &SampleStore) -> Result<f64> {
    non_empty(store)?;
    let s = store.sigma_r_sq();
    Ok(s.iter().sum::<f64>() / s.len() as f64)
}

/// Posterior mean of `σ_r²` with the design restricted to `model` and every
/// retained coefficient in the slab.
pub fn conditional_mse(
    data: &RegressionData,
    model: &InclusionSet,
    cfg: &PriorConfig,
    settings: &SamplerSettings,
) -> Result<f64> {
    settings.validate()?;
    if model.is_empty() {
        // β = 0 fixed: σ_r² has its conjugate posterior directly.
        let dof = cfg.nu_r + data.n() as f64;
        let post = ScaledInvChiSqParams::new(dof, (data.yty() + cfg.nu_r * cfg.eta_r_sq) / dof)?;
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        let draws = settings.retained();
        let mut sum = 0.0;
        for _ in 0..draws {
            sum += sample_scaled_inv_chisq(post, &mut rng)?;
        }
        return Ok(sum / draws as f64);
    }
    if let Some(&j) = model.indices().iter().find(|&&j| j >= data.dim()) {
        return Err(Error::invalid(format!(
            "model refers to covariate {} but the design has {}",
            j + 1,
            data.dim()
        )));
    }
    let restricted = data.select_columns(model.indices())?;
    let store = run_fixed_model_chain(
        &restricted,
        cfg,
        &SamplerSettings {
            store_coefficients: false,
            ..*settings
        },
    )?;
    estimate_mse_bma(&store)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub delta: f64,
    /// One-based labels of `z*`.
    pub model: Vec<usize>,
    pub model_frequency: f64,
    pub mse: f64,
    pub expected_increase: f64,
}

impl DeltaRecord {
    pub fn new(delta: f64, model: &InclusionSet, model_frequency: f64, mse: f64, mse_bma: f64) -> Self {
        Self {
            delta,
            model: model.one_based(),
            model_frequency,
            mse,
            expected_increase: mse / mse_bma - 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSelection {
    /// Position of the chosen record.
    pub index: usize,
    pub delta: f64,
    pub model: Vec<usize>,
    pub expected_increase: f64,
    /// False when no candidate met the threshold and the least-increase record was taken.
    pub meets_threshold: bool,
}

/// Sparsest record whose expected increase is within `threshold`, larger `δ`
/// winning ties; falls back to the smallest increase when none qualifies.
pub fn choose_delta(records: &[DeltaRecord], threshold: f64) -> Result<DeltaSelection> {
    if records.is_empty() {
        return Err(Error::invalid("the δ grid is empty"));
    }
    if !threshold.is_finite() {
        return Err(Error::invalid(format!("threshold must be finite, got {threshold}")));
    }
    let passing = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.expected_increase <= threshold)
        .min_by(|(_, a), (_, b)| {
            a.model
                .len()
                .cmp(&b.model.len())
                .then(b.delta.total_cmp(&a.delta))
        });
    let (index, meets_threshold) = match passing {
        Some((i, _)) => (i, true),
        None => {
            let (i, _) = records
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| a.expected_increase.total_cmp(&b.expected_increase))
                .expect("records is non-empty");
            (i, false)
        }
    };
    let r = &records[index];
    Ok(DeltaSelection {
        index,
        delta: r.delta,
        model: r.model.clone(),
        expected_increase: r.expected_increase,
        meets_threshold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSweep {
    pub mse_bma: f64,
    pub threshold: f64,
    pub records: Vec<DeltaRecord>,
    pub selection: DeltaSelection,
}

/// Runs one chain per threshold in `grid`, plus a `δ = 0` reference chain for
/// `MSE_bma`, and picks the threshold with [`choose_delta`].
///
/// Chain seeds are derived from `settings.seed` and the grid position, so the
/// result does not depend on how rayon schedules the jobs.
pub fn select_delta(
    data: &RegressionData,
    grid: &[f64],
    template: &PriorConfig,
    settings: &SamplerSettings,
    threshold: f64,
) -> Result<DeltaSweep> {
    if grid.is_empty() {
        return Err(Error::invalid("the δ grid is empty"));
    }
    settings.validate()?;
    let chain_settings = SamplerSettings {
        store_coefficients: false,
        ..*settings
    };
    let reference_cfg = template.with_delta(0.0)?;
    let reference = run_chain(
        data,
        &reference_cfg,
        &SamplerSettings {
            seed: derive_seed(settings.seed, &[0]),
            ..chain_settings
        },
    )?;
    let mse_bma = estimate_mse_bma(&reference)?;

    let records = grid
        .par_iter()
        .enumerate()
        .map(|(i, &delta)| {
            let cfg = template.with_delta(delta)?;
            let seed = derive_seed(settings.seed, &[1, i as u64]);
            let store = run_chain(data, &cfg, &SamplerSettings { seed, ..chain_settings })?;
            let model = most_frequent_model(&store)?;
            let freq = store.model_count(&model) as f64 / store.len() as f64;
            let mse = conditional_mse(
                data,
                &model,
                &cfg,
                &SamplerSettings {
                    seed: derive_seed(settings.seed, &[2, i as u64]),
                    ..chain_settings
                },
            )?;
            Ok(DeltaRecord::new(delta, &model, freq, mse, mse_bma))
        })
        .collect::<Result<Vec<_>>>()?;
    let selection = choose_delta(&records, threshold)?;
    Ok(DeltaSweep {
        mse_bma,
        threshold,
        records,
        selection,
    })
}

/// Log Bayes factor of `model` against `alternative`, estimated from visit
/// frequencies.
///
/// With `correct_prior_odds` the posterior odds are divided by the prior odds
/// of the two models. Returns `+∞` if `alternative` was never visited and
/// `-∞` if `model` was never visited.
pub fn estimate_log_bf(
    store: &SampleStore,
    model: &InclusionSet,
    alternative: &InclusionSet,
    correct_prior_odds: bool,
) -> Result<f64> {
    non_empty(store)?;
    if model == alternative {
        return Err(Error::invalid("a Bayes factor needs two distinct models"));
    }
    let d = store.dim();
    if model
        .indices()
        .iter()
        .chain(alternative.indices())
        .any(|&j| j >= d)
    {
        return Err(Error::invalid(format!("model index out of range for d = {d}")));
    }
    let a = store.model_count(model);
    let b = store.model_count(alternative);
    if a == 0 && b == 0 {
        return Err(Error::invalid(
            "neither model was visited; the Bayes factor is undefined",
        ));
    }
    if b == 0 {
        return Ok(f64::INFINITY);
    }
    if a == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mut log_bf = (a as f64).ln() - (b as f64).ln();
    if correct_prior_odds {
        log_bf -= log_prior_indicator(&model.to_indicators(d))
            - log_prior_indicator(&alternative.to_indicators(d));
    }
    Ok(log_bf)
}

/// Competitor for the Bayes factor: the most visited model, or the runner-up
/// when the most visited one is `truth`. `None` if no other model was visited.
pub fn alternative_model(store: &SampleStore, truth: &InclusionSet) -> Option<InclusionSet> {
    let mut ranked: Vec<(&InclusionSet, usize)> =
        store.model_counts().iter().map(|(m, &c)| (m, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1));
    ranked
        .into_iter()
        .map(|(m, _)| m)
        .find(|m| *m != truth)
        .cloned()
}

/// Log Bayes factor of `truth` against [`alternative_model`]; `+∞` when no
/// alternative was ever visited.
pub fn log_bf_against_best_alternative(
    store: &SampleStore,
    truth: &InclusionSet,
    correct_prior_odds: bool,
) -> Result<f64> {
    match alternative_model(store, truth) {
        Some(alt) => estimate_log_bf(store, truth, &alt, correct_prior_odds),
        None => {
            non_empty(store)?;
            Ok(f64::INFINITY)
        }
    }
}

/// Headline summary of a single chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorReport {
    pub inclusion_probabilities: Vec<f64>,
    pub top_models: Vec<ModelFrequency>,
    pub posterior_mean_beta: Vec<f64>,
    pub posterior_mean_sigma_r_sq: f64,
    pub retained_draws: usize,
    pub distinct_models: usize,
    pub slice_acceptance_rate: Option<f64>,
    pub slice_first_proposal_rate: Option<f64>,
}

impl PosteriorReport {
    pub fn from_store(store: &SampleStore, top_k: usize) -> Result<Self> {
        Ok(Self {
            inclusion_probabilities: inclusion_probabilities(store)?,
            top_models: top_models(store, top_k),
            posterior_mean_beta: store.posterior_mean_beta(),
            posterior_mean_sigma_r_sq: estimate_mse_bma(store)?,
            retained_draws: store.len(),
            distinct_models: store.model_counts().len(),
            slice_acceptance_rate: store.slice_stats.acceptance_rate(),
            slice_first_proposal_rate: store.slice_stats.first_proposal_rate(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(draws: &[(&[bool], f64)]) -> SampleStore {
        let d = draws[0].0.len();
        SampleStore::from_draws(d, draws.iter().map(|(z, s)| (z.to_vec(), *s, 1.0))).unwrap()
    }

    fn record(delta: f64, size: usize, inc: f64) -> DeltaRecord {
        DeltaRecord {
            delta,
            model: (1..=size).collect(),
            model_frequency: 1.0,
            mse: 1.0 + inc,
            expected_increase: inc,
        }
    }

    #[test]
    fn inclusion_probabilities_average_indicators() {
        let s = store(&[(&[true, false], 1.0), (&[false, false], 1.0)]);
        assert_eq!(inclusion_probabilities(&s).unwrap(), vec![0.5, 0.0]);
        let z: &[bool] = &[true, false, true];
        let s = store(&[(z, 1.0); 3]);
        assert_eq!(inclusion_probabilities(&s).unwrap(), vec![1.0, 0.0, 1.0]);
        let empty = SampleStore::from_draws(2, Vec::new()).unwrap();
        assert!(inclusion_probabilities(&empty).is_err());
        assert!(estimate_mse_bma(&empty).is_err());
    }

    #[test]
    fn top_models_rank_and_break_ties_by_first_visit() {
        let a: &[bool] = &[true, false];
        let b: &[bool] = &[false, true];
        let s = store(&[(b, 1.0), (a, 1.0), (a, 1.0), (b, 1.0), (a, 1.0)]);
        let top = top_models(&s, 10);
        assert_eq!(top.len(), 2);
        assert_eq!(top[0].variables, vec![1]);
        assert!((top[0].frequency - 0.6).abs() < 1e-15);
        let tied = store(&[(b, 1.0), (a, 1.0)]);
        assert_eq!(top_models(&tied, 1)[0].variables, vec![2]);
        let single = store(&[(a, 1.0); 4]);
        assert_eq!(top_models(&single, 10).len(), 1);
    }

    #[test]
    fn mse_bma_is_mean_noise_variance() {
        let z: &[bool] = &[false];
        assert_eq!(estimate_mse_bma(&store(&[(z, 2.5); 5])).unwrap(), 2.5);
        assert_eq!(estimate_mse_bma(&store(&[(z, 1.0), (z, 3.0)])).unwrap(), 2.0);
    }

    #[test]
    fn choose_delta_matches_threshold_contract() {
        // Increases and sizes of a six-point grid where three variables suffice at δ = 0.01.
        let grid = [0.8, 0.5, 0.05, 0.01, 0.001, 0.0];
        let incs = [0.37, 0.195, 0.054, 0.049, 0.049, 0.054];
        let sizes = [1, 2, 3, 3, 3, 3];
        let recs: Vec<_> = (0..6).map(|i| record(grid[i], sizes[i], incs[i])).collect();
        let sel = choose_delta(&recs, 0.05).unwrap();
        assert_eq!(sel.delta, 0.01);
        assert!(sel.meets_threshold);

        let high: Vec<_> = (0..3).map(|i| record(grid[i], 1, 0.1 + i as f64 * 0.01)).collect();
        let sel = choose_delta(&high, 0.05).unwrap();
        assert!(!sel.meets_threshold);
        assert_eq!(sel.index, 0);

        let sel = choose_delta(&[record(0.0, 2, 0.0)], 0.05).unwrap();
        assert_eq!(sel.delta, 0.0);
        assert!(choose_delta(&[], 0.05).is_err());
    }

    #[test]
    fn log_bf_from_frequencies() {
        let s_true: &[bool] = &[true, false];
        let s_alt: &[bool] = &[false, true];
        let other: &[bool] = &[true, true];
        let mut draws = vec![(s_true, 1.0); 18];
        draws.push((s_alt, 1.0));
        draws.push((other, 1.0));
        let st = store(&draws);
        let t = InclusionSet::new(vec![0]);
        let a = InclusionSet::new(vec![1]);
        let v = estimate_log_bf(&st, &t, &a, true).unwrap();
        assert!((v - 18f64.ln()).abs() < 1e-12);
        assert_eq!(estimate_log_bf(&st, &a, &t, true).unwrap(), -v);
        assert!(estimate_log_bf(&st, &t, &t, true).is_err());
        let never = InclusionSet::default();
        assert_eq!(estimate_log_bf(&st, &t, &never, true).unwrap(), f64::INFINITY);
        assert_eq!(estimate_log_bf(&st, &never, &t, true).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn alternative_skips_the_true_model() {
        let t: &[bool] = &[true, false];
        let a: &[bool] = &[false, true];
        let st = store(&[(t, 1.0), (t, 1.0), (a, 1.0)]);
        let truth = InclusionSet::new(vec![0]);
        assert_eq!(alternative_model(&st, &truth), Some(InclusionSet::new(vec![1])));
        let only = store(&[(t, 1.0); 3]);
        assert_eq!(log_bf_against_best_alternative(&only, &truth, true).unwrap(), f64::INFINITY);
    }
}
