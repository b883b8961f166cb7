//! Error-weighted ensemble of the seven base models.
//!
//! Training has two parts. First, every family is trained on bootstrap
//! replicates of the training set and scored on the out-of-bag projects;
//! the replicate-averaged MAE, MBRE and MIBRE of each family are min-max
//! normalized across families. Each normalized error `x` becomes a weight
//! `1 / (1 + exp(α (x − x̄)))`, where `x̄` is the mean normalized error of
//! that measure, and the three per-measure weights are averaged. Second,
//! all seven families are retrained on the full training set. A prediction
//! is the weighted mean of the seven productivities; effort is that
//! productivity times the project's UCP.
//!
//! Errors during weighting are measured on productivity, the quantity the
//! base models predict.

use alloc::string::ToString;
use alloc::vec::Vec;

use libm::exp;
use serde::{Deserialize, Serialize};

use crate::dataset::{BootstrapSample, Dataset, EnvFactors};
use crate::metrics::{min_max_normalize, ErrorSummary, PredictionPair};
use crate::models::{self, ModelConfig, ModelId, Regressor, TrainedModel, MODEL_COUNT};
use crate::rng::split;
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 15.0;
pub const DEFAULT_REPLICATES: usize = 25;

/// Fewest training projects accepted by the ensemble.
pub const MIN_TRAINING: usize = 5;

const STREAM_BOOTSTRAP: u64 = 1;
const STREAM_LOCAL_MODELS: u64 = 2;
const STREAM_FINAL_MODELS: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Sigmoid steepness.
    pub alpha: f64,
    /// Bootstrap replicates used to estimate local errors.
    pub replicates: usize,
    pub models: ModelConfig,
    /// Master seed; every replicate and model seed is split from it.
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            replicates: DEFAULT_REPLICATES,
            models: ModelConfig::default(),
            seed: crate::rng::DEFAULT_SEED,
        }
    }
}

impl EnsembleConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".to_string()));
        }
        self.models.validate()
    }
}

/// Trains base models for the ensemble. The standard suite trains the real
/// families; tests substitute stand-ins.
pub trait ModelSuite {
    type Model: Regressor;

    fn fit(&self, id: ModelId, x: &[EnvFactors], y: &[f64], seed: u64) -> Result<Self::Model>;
}

/// The seven real base-model families with the given hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct StandardSuite<'a>(pub &'a ModelConfig);

impl ModelSuite for StandardSuite<'_> {
    type Model = TrainedModel;

    fn fit(&self, id: ModelId, x: &[EnvFactors], y: &[f64], seed: u64) -> Result<TrainedModel> {
        let config = ModelConfig { seed, ..self.0.clone() };
        models::train(id, x, y, &config)
    }
}

fn fit_annotated<S: ModelSuite>(suite: &S, id: ModelId, data: &Dataset, seed: u64) -> Result<S::Model> {
    let x: Vec<EnvFactors> = data.records().iter().map(|r| *r.env()).collect();
    let y = data.productivities();
    suite.fit(id, &x, &y, seed).map_err(|e| match e {
        e @ Error::Training { .. } => e,
        other => Error::Training { model: id, reason: other.to_string() },
    })
}

/// Replicate-averaged errors of each family and their normalized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalErrorProfile {
    /// Out-of-bag productivity errors, macro-averaged over replicates.
    pub per_model: [ErrorSummary; MODEL_COUNT],
    /// Min-max normalized MAE, MBRE and MIBRE across the seven families.
    pub normalized: [[f64; MODEL_COUNT]; 3],
    /// Mean of each normalized vector.
    pub means: [f64; 3],
    /// Replicates with a non-empty out-of-bag set.
    pub replicates_used: usize,
}

/// The bootstrap replicates drawn for `n` training projects; `None` marks a
/// replicate skipped for having an empty out-of-bag set.
pub fn replicate_samples(n: usize, config: &EnsembleConfig) -> Result<Vec<Option<BootstrapSample>>> {
    let bootstrap_seed = split(config.seed, STREAM_BOOTSTRAP);
    (0..config.replicates)
        .map(|r| match BootstrapSample::draw(n, split(bootstrap_seed, r as u64)) {
            Ok(s) => Ok(Some(s)),
            Err(Error::DegenerateReplicate) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Bootstrap estimate of each family's error on unseen projects.
pub fn estimate_local_errors(training: &Dataset, config: &EnsembleConfig) -> Result<LocalErrorProfile> {
    estimate_local_errors_with(&StandardSuite(&config.models), training, config)
}

pub fn estimate_local_errors_with<S: ModelSuite>(
    suite: &S,
    training: &Dataset,
    config: &EnsembleConfig,
) -> Result<LocalErrorProfile> {
    config.validate()?;
    training.require(MIN_TRAINING)?;
    let model_seed = split(config.seed, STREAM_LOCAL_MODELS);
    let mut summaries: [Vec<ErrorSummary>; MODEL_COUNT] = Default::default();
    let mut used = 0;
    for (r, sample) in replicate_samples(training.len(), config)?.into_iter().enumerate() {
        let Some(sample) = sample else { continue };
        used += 1;
        let in_bag = training.select(&sample.in_bag);
        let out_of_bag = training.select(&sample.out_of_bag);
        for id in ModelId::ALL {
            let seed = split(model_seed, (r * MODEL_COUNT + id.index()) as u64);
            let model = fit_annotated(suite, id, &in_bag, seed)?;
            let pairs = out_of_bag
                .records()
                .iter()
                .map(|rec| PredictionPair::new(rec.productivity(), model.predict(rec.env())))
                .collect::<Result<Vec<_>>>()?;
            summaries[id.index()].push(ErrorSummary::from_pairs(&pairs)?);
        }
    }
    if used == 0 {
        return Err(Error::AllReplicatesDegenerate(config.replicates));
    }
    let mut per_model = [ErrorSummary::default(); MODEL_COUNT];
    for (slot, s) in per_model.iter_mut().zip(&summaries) {
        *slot = ErrorSummary::average(s)?;
    }
    Ok(profile_from_errors(per_model, used))
}

/// Normalizes per-family errors measure by measure.
pub fn profile_from_errors(per_model: [ErrorSummary; MODEL_COUNT], replicates_used: usize) -> LocalErrorProfile {
    let mut normalized = [[0.0; MODEL_COUNT]; 3];
    let mut means = [0.0; 3];
    for m in 0..3 {
        let raw: Vec<f64> = per_model.iter().map(|s| s.as_array()[m]).collect();
        let norm = min_max_normalize(&raw).expect("seven values");
        normalized[m].copy_from_slice(&norm);
        means[m] = norm.iter().sum::<f64>() / MODEL_COUNT as f64;
    }
    LocalErrorProfile { per_model, normalized, means, replicates_used }
}

/// Discount factor `1 / (1 + exp(α (x − x̄)))` for a normalized error `x`.
pub fn sigmoid_weight(normalized_error: f64, mean_normalized: f64, alpha: f64) -> f64 {
    1.0 / (1.0 + exp(alpha * (normalized_error - mean_normalized)))
}

/// Arithmetic mean of the three per-measure weights.
pub fn combine_weights(w_mae: f64, w_mbre: f64, w_mibre: f64) -> f64 {
    (w_mae + w_mbre + w_mibre) / 3.0
}

/// Per-family sigmoid weights for each measure and their average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelWeightProfile {
    pub w_mae: [f64; MODEL_COUNT],
    pub w_mbre: [f64; MODEL_COUNT],
    pub w_mibre: [f64; MODEL_COUNT],
    pub combined: [f64; MODEL_COUNT],
}

impl ModelWeightProfile {
    pub fn from_profile(profile: &LocalErrorProfile, alpha: f64) -> Self {
        let per_measure = |m: usize| -> [f64; MODEL_COUNT] {
            core::array::from_fn(|i| sigmoid_weight(profile.normalized[m][i], profile.means[m], alpha))
        };
        let (w_mae, w_mbre, w_mibre) = (per_measure(0), per_measure(1), per_measure(2));
        let combined = core::array::from_fn(|i| combine_weights(w_mae[i], w_mbre[i], w_mibre[i]));
        Self { w_mae, w_mbre, w_mibre, combined }
    }

    /// Combined weights rescaled to sum to one.
    pub fn normalized(&self) -> [f64; MODEL_COUNT] {
        let total: f64 = self.combined.iter().sum();
        self.combined.map(|w| w / total)
    }
}

/// Weighted mean `Σ p_i w_i / Σ w_i`.
///
/// The result is clamped into `[min p, max p]` so rounding never leaves the
/// convex hull of the inputs.
pub fn aggregate_productivity(predictions: &[f64], weights: &[f64]) -> Result<f64> {
    if predictions.len() != weights.len() {
        return Err(Error::LengthMismatch { left: predictions.len(), right: weights.len() });
    }
    if predictions.is_empty() {
        return Err(Error::InsufficientData { required: 1, actual: 0 });
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroWeightSum);
    }
    let value = predictions.iter().zip(weights).map(|(p, w)| p * w).sum::<f64>() / total;
    let lo = predictions.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = predictions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(value.clamp(lo, hi))
}

/// Seven trained families plus the weights learned for them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedEnsemble<M = TrainedModel> {
    /// One model per family, in [`ModelId::ALL`] order.
    pub models: Vec<M>,
    pub local_errors: LocalErrorProfile,
    pub weights: ModelWeightProfile,
    pub config: EnsembleConfig,
    pub training_fingerprint: u64,
}

/// Productivity and effort for one project.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffortPrediction {
    pub per_model: [f64; MODEL_COUNT],
    pub productivity: f64,
    pub effort: f64,
}

pub fn train_ensemble(training: &Dataset, config: &EnsembleConfig) -> Result<TrainedEnsemble> {
    train_ensemble_with(&StandardSuite(&config.models), training, config)
}

pub fn train_ensemble_with<S: ModelSuite>(
    suite: &S,
    training: &Dataset,
    config: &EnsembleConfig,
) -> Result<TrainedEnsemble<S::Model>> {
    let local_errors = estimate_local_errors_with(suite, training, config)?;
    let weights = ModelWeightProfile::from_profile(&local_errors, config.alpha);
    let final_seed = split(config.seed, STREAM_FINAL_MODELS);
    let models = ModelId::ALL
        .iter()
        .map(|&id| fit_annotated(suite, id, training, split(final_seed, id.index() as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainedEnsemble {
        models,
        local_errors,
        weights,
        config: config.clone(),
        training_fingerprint: training.fingerprint(),
    })
}

impl<M: Regressor> TrainedEnsemble<M> {
    pub fn model_predictions(&self, env: &EnvFactors) -> [f64; MODEL_COUNT] {
        core::array::from_fn(|i| self.models[i].predict(env))
    }

    pub fn predict_productivity(&self, env: &EnvFactors) -> f64 {
        let per_model = self.model_predictions(env);
        aggregate_productivity(&per_model, &self.weights.combined).expect("sigmoid weights are positive")
    }

    /// Aggregated productivity and effort = productivity × UCP.
    pub fn predict_effort(&self, env: &EnvFactors, ucp: f64) -> Result<EffortPrediction> {
        if !(ucp > 0.0) || !ucp.is_finite() {
            return Err(Error::NonPositiveUcp(ucp));
        }
        let per_model = self.model_predictions(env);
        let productivity = aggregate_productivity(&per_model, &self.weights.combined)?;
        Ok(EffortPrediction { per_model, productivity, effort: productivity * ucp })
    }
}

impl<M: Regressor> Regressor for TrainedEnsemble<M> {
    fn predict(&self, env: &EnvFactors) -> f64 {
        self.predict_productivity(env)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, DatasetProfile, ProjectRecord};
    use alloc::vec;

    /// Model that ignores its training data.
    #[derive(Debug)]
    struct Constant(f64);

    impl Regressor for Constant {
        fn predict(&self, _: &EnvFactors) -> f64 {
            self.0
        }
    }

    struct ConstantSuite([f64; MODEL_COUNT]);

    impl ModelSuite for ConstantSuite {
        type Model = Constant;

        fn fit(&self, id: ModelId, _: &[EnvFactors], _: &[f64], _: u64) -> Result<Constant> {
            Ok(Constant(self.0[id.index()]))
        }
    }

    fn small_dataset(n: usize) -> Dataset {
        generate_synthetic(&DatasetProfile::ds1_like(n), 17).unwrap()
    }

    #[test]
    fn sigmoid_reference_values() {
        assert_eq!(sigmoid_weight(0.3, 0.3, 15.0), 0.5);
        assert!((sigmoid_weight(0.0, 0.5, 15.0) - 0.999447).abs() < 1e-6);
        assert!((sigmoid_weight(1.0, 0.5, 15.0) - 0.000553).abs() < 1e-6);
    }

    #[test]
    fn combine_examples() {
        assert_eq!(combine_weights(0.5, 0.5, 0.5), 0.5);
        assert!((combine_weights(0.9, 0.6, 0.3) - 0.6).abs() < 1e-15);
        assert!((combine_weights(0.999447, 0.999447, 0.999447) - 0.999447).abs() < 1e-15);
    }

    #[test]
    fn aggregation_examples() {
        assert_eq!(aggregate_productivity(&[24.0; 3], &[0.1, 0.7, 0.2]).unwrap(), 24.0);
        assert_eq!(aggregate_productivity(&[20.0, 30.0], &[1.0, 1.0]).unwrap(), 25.0);
        assert_eq!(aggregate_productivity(&[20.0, 30.0], &[3.0, 1.0]).unwrap(), 22.5);
        assert_eq!(aggregate_productivity(&[20.0, 30.0], &[0.0, 0.0]), Err(Error::ZeroWeightSum));
        assert!(matches!(aggregate_productivity(&[20.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn identical_errors_give_half_weights() {
        let suite = ConstantSuite([22.0; MODEL_COUNT]);
        let config = EnsembleConfig { replicates: 4, ..EnsembleConfig::default() };
        let ens = train_ensemble_with(&suite, &small_dataset(10), &config).unwrap();
        assert_eq!(ens.weights.combined, [0.5; MODEL_COUNT]);
    }

    #[test]
    fn perfect_stand_in_gets_zero_normalized_error() {
        let data = small_dataset(12);
        let table: Vec<(EnvFactors, f64)> = data.records().iter().map(|r| (*r.env(), r.productivity())).collect();
        struct Lookup(Vec<(EnvFactors, f64)>, f64);
        impl Regressor for Lookup {
            fn predict(&self, env: &EnvFactors) -> f64 {
                self.0.iter().find(|(e, _)| e == env).map_or(self.1, |(_, p)| *p)
            }
        }
        struct Suite(Vec<(EnvFactors, f64)>);
        impl ModelSuite for Suite {
            type Model = Lookup;
            fn fit(&self, id: ModelId, _: &[EnvFactors], _: &[f64], _: u64) -> Result<Lookup> {
                // Only MLR sees the answers; the others guess constants.
                let table = if id == ModelId::Mlr { self.0.clone() } else { Vec::new() };
                Ok(Lookup(table, 10.0 + 3.0 * id.index() as f64))
            }
        }
        let profile = estimate_local_errors_with(&Suite(table), &data, &EnsembleConfig::default()).unwrap();
        for m in 0..3 {
            assert_eq!(profile.normalized[m][0], 0.0);
        }
        assert_eq!(profile.per_model[0], ErrorSummary::default());
    }

    #[test]
    fn weights_decrease_with_error() {
        let profile = profile_from_errors(
            core::array::from_fn(|i| ErrorSummary { mae: 1.0 + i as f64, mbre: 0.1 + 0.01 * i as f64, mibre: 0.05 + 0.01 * i as f64 }),
            1,
        );
        let w = ModelWeightProfile::from_profile(&profile, 15.0);
        for i in 1..MODEL_COUNT {
            assert!(w.w_mae[i] < w.w_mae[i - 1]);
            assert!(w.combined[i] < w.combined[i - 1]);
        }
        assert!((w.normalized().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_or_misconfigured_training() {
        let config = EnsembleConfig::default();
        assert!(matches!(estimate_local_errors(&small_dataset(4), &config), Err(Error::InsufficientData { .. })));
        let bad = EnsembleConfig { alpha: 0.0, ..EnsembleConfig::default() };
        assert!(matches!(estimate_local_errors(&small_dataset(8), &bad), Err(Error::InvalidConfig(_))));
        let bad = EnsembleConfig { replicates: 0, ..EnsembleConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn failures_name_the_family() {
        struct Failing;
        impl ModelSuite for Failing {
            type Model = Constant;
            fn fit(&self, id: ModelId, _: &[EnvFactors], _: &[f64], _: u64) -> Result<Constant> {
                if id == ModelId::Svr {
                    Err(Error::InvalidConfig("boom".into()))
                } else {
                    Ok(Constant(20.0))
                }
            }
        }
        let err = train_ensemble_with(&Failing, &small_dataset(8), &EnsembleConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Training { model: ModelId::Svr, .. }), "{err:?}");
    }

    #[test]
    fn effort_is_productivity_times_ucp() {
        let ens = train_ensemble_with(&ConstantSuite([20.0; MODEL_COUNT]), &small_dataset(8), &EnsembleConfig::default()).unwrap();
        let env = EnvFactors::uniform(3.0).unwrap();
        let p = ens.predict_effort(&env, 100.0).unwrap();
        assert_eq!(p.productivity, 20.0);
        assert_eq!(p.effort, 2000.0);
        assert_eq!(p.effort / 100.0, p.productivity);
        assert!(matches!(ens.predict_effort(&env, -5.0), Err(Error::NonPositiveUcp(_))));
        let unit = train_ensemble_with(&ConstantSuite([1.0; MODEL_COUNT]), &small_dataset(8), &EnsembleConfig::default()).unwrap();
        assert_eq!(unit.predict_effort(&env, 37.5).unwrap().effort, 37.5);
    }

    #[test]
    fn real_ensemble_is_deterministic() {
        let mut config = EnsembleConfig { replicates: 3, ..EnsembleConfig::default() };
        config.models.mlp.epochs = 100;
        let data = small_dataset(12);
        let a = train_ensemble(&data, &config).unwrap();
        let b = train_ensemble(&data, &config).unwrap();
        assert_eq!(a, b);
        let rec: ProjectRecord = data.records()[0];
        let p = a.predict_effort(rec.env(), rec.ucp()).unwrap();
        let lo = p.per_model.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.per_model.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(p.productivity >= lo && p.productivity <= hi);
        let _ = vec![0];
    }
}
