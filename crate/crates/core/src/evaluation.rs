//! Leave-one-out evaluation, comparison tables, the Wilcoxon signed-rank
//! test, t-based confidence intervals and the two fixed-rate baselines.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use libm::sqrt;
use serde::{Deserialize, Serialize};

use crate::dataset::{describe, Dataset, EnvFactors};
use crate::ensemble::{train_ensemble_with, EnsembleConfig, ModelSuite, StandardSuite, MIN_TRAINING};
use crate::metrics::{ErrorSummary, PredictionPair};
use crate::models::{ModelId, Regressor, MODEL_COUNT};
use crate::rng::split;
use crate::special::{normal_cdf, t_quantile_975};
use crate::{Error, Result};

/// Karner's generic rate in hours per UCP.
pub const KARNER_RATE: f64 = 20.0;
pub const SCHNEIDER_WINTER_RATES: [f64; 3] = [20.0, 28.0, 36.0];
/// Largest number of non-zero differences for which p is exact.
pub const EXACT_WILCOXON_LIMIT: usize = 20;
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Anything that produces an effort estimate in the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Estimator {
    Ensemble,
    Base(ModelId),
    Karner,
    SchneiderWinter,
}

impl Estimator {
    /// Ensemble, the seven families, then the two baselines.
    pub const ALL: [Estimator; MODEL_COUNT + 3] = [
        Estimator::Ensemble,
        Estimator::Base(ModelId::Mlr),
        Estimator::Base(ModelId::Sr),
        Estimator::Base(ModelId::Rt),
        Estimator::Base(ModelId::Svr),
        Estimator::Base(ModelId::Mlp),
        Estimator::Base(ModelId::Rbf),
        Estimator::Base(ModelId::Fuzzy),
        Estimator::Karner,
        Estimator::SchneiderWinter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Ensemble => "ENSEMBLE",
            Estimator::Base(id) => id.name(),
            Estimator::Karner => "KARNER",
            Estimator::SchneiderWinter => "SCHNEIDER_WINTER",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name().eq_ignore_ascii_case(name))
    }

    /// Whether the estimator is fitted to data.
    pub fn is_learned(self) -> bool {
        matches!(self, Estimator::Ensemble | Estimator::Base(_))
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Estimator> for String {
    fn from(e: Estimator) -> String {
        e.name().to_string()
    }
}

impl TryFrom<String> for Estimator {
    type Error = String;

    fn try_from(s: String) -> core::result::Result<Self, String> {
        Estimator::from_name(&s).ok_or_else(|| alloc::format!("unknown estimator {s:?}"))
    }
}

pub fn karner_baseline(_env: &EnvFactors) -> f64 {
    KARNER_RATE
}

/// Counts e1..e6 rated below 3 and e7, e8 rated above 3.
pub fn schneider_winter_count(env: &EnvFactors) -> usize {
    let r = env.ratings();
    r[..6].iter().filter(|&&e| e < 3.0).count() + r[6..].iter().filter(|&&e| e > 3.0).count()
}

pub fn schneider_winter_baseline(env: &EnvFactors) -> f64 {
    match schneider_winter_count(env) {
        0..=2 => SCHNEIDER_WINTER_RATES[0],
        3 | 4 => SCHNEIDER_WINTER_RATES[1],
        _ => SCHNEIDER_WINTER_RATES[2],
    }
}

/// Predictions for one held-out project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub index: usize,
    pub actual_effort: f64,
    pub ucp: f64,
    /// Predicted effort per estimator, in [`Estimator::ALL`] order.
    pub predictions: Vec<(Estimator, f64)>,
    /// Combined ensemble weights learned in this fold.
    pub weights: [f64; MODEL_COUNT],
    pub training_records: Vec<u64>,
    pub test_record: u64,
}

impl FoldOutcome {
    pub fn prediction(&self, estimator: Estimator) -> Option<f64> {
        self.predictions.iter().find(|(e, _)| *e == estimator).map(|(_, v)| *v)
    }
}

/// Runs one fold: train on every project except `index`, predict it.
pub fn loocv_fold<S: ModelSuite>(
    suite: &S,
    dataset: &Dataset,
    index: usize,
    config: &EnsembleConfig,
) -> Result<FoldOutcome> {
    let test = dataset.records()[index];
    let training = dataset.without(index);
    let fold_config = EnsembleConfig { seed: split(config.seed, index as u64), ..config.clone() };
    let ensemble = train_ensemble_with(suite, &training, &fold_config)?;
    let prediction = ensemble.predict_effort(test.env(), test.ucp())?;
    let ucp = test.ucp();
    let mut predictions = Vec::with_capacity(Estimator::ALL.len());
    predictions.push((Estimator::Ensemble, prediction.effort));
    for id in ModelId::ALL {
        predictions.push((Estimator::Base(id), prediction.per_model[id.index()] * ucp));
    }
    predictions.push((Estimator::Karner, karner_baseline(test.env()) * ucp));
    predictions.push((Estimator::SchneiderWinter, schneider_winter_baseline(test.env()) * ucp));
    Ok(FoldOutcome {
        index,
        actual_effort: test.effort(),
        ucp,
        predictions,
        weights: ensemble.weights.combined,
        training_records: training.records().iter().map(|r| r.fingerprint()).collect(),
        test_record: test.fingerprint(),
    })
}

/// Leave-one-out cross-validation with the standard model suite.
pub fn loocv(dataset: &Dataset, config: &EnsembleConfig) -> Result<Vec<FoldOutcome>> {
    loocv_with(&StandardSuite(&config.models), dataset, config)
}

pub fn loocv_with<S: ModelSuite>(suite: &S, dataset: &Dataset, config: &EnsembleConfig) -> Result<Vec<FoldOutcome>> {
    config.validate()?;
    dataset.require(MIN_TRAINING + 1)?;
    (0..dataset.len())
        .map(|i| loocv_fold(suite, dataset, i, config).map_err(|e| Error::Fold { fold: i, source: e.into() }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, v: f64) -> bool {
        self.low <= v && v <= self.high
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }
}

/// `mean ± t(n−1, 0.975) · s / √n`.
pub fn confidence_interval_95(values: &[f64]) -> Result<ConfidenceInterval> {
    let stats = describe(values)?;
    let half = t_quantile_975(values.len() - 1) * stats.stdev / sqrt(values.len() as f64);
    Ok(ConfidenceInterval { mean: stats.mean, low: stats.mean - half, high: stats.mean + half })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W−)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Pairs with a non-zero difference.
    pub n_effective: usize,
    pub p_value: f64,
    pub significant_at_05: bool,
    /// Whether `p_value` came from the exact null distribution.
    pub exact: bool,
}

impl WilcoxonResult {
    /// Every difference was zero.
    pub fn is_degenerate(&self) -> bool {
        self.n_effective == 0
    }
}

/// Midranks (1-based) of `values`, which must already be sorted ascending.
fn midranks(sorted: &[f64]) -> Vec<f64> {
    let mut ranks = vec![0.0; sorted.len()];
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let rank = (i + j + 2) as f64 / 2.0;
        ranks[i..=j].iter_mut().for_each(|r| *r = rank);
        i = j + 1;
    }
    ranks
}

/// `P(T ≤ w)` under the null, where T is the sum of ranks receiving a
/// positive sign. Ranks are doubled so midranks become integers.
fn exact_lower_tail(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| libm::round(2.0 * r) as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let limit = libm::round(2.0 * w) as usize;
    let hits: f64 = counts[..=limit.min(total)].iter().sum();
    hits / libm::pow(2.0, ranks.len() as f64)
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < 5 {
        return Err(Error::InsufficientData { required: 5, actual: a.len() });
    }
    let mut diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            w_plus: 0.0,
            w_minus: 0.0,
            n_effective: 0,
            p_value: 1.0,
            significant_at_05: false,
            exact: true,
        });
    }
    diffs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = midranks(&magnitudes);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let w_minus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d < 0.0).map(|(_, r)| r).sum();
    let statistic = w_plus.min(w_minus);
    let exact = n <= EXACT_WILCOXON_LIMIT;
    let p = if exact {
        2.0 * exact_lower_tail(&ranks, statistic)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let mut tie_term = 0.0;
        let mut i = 0;
        while i < n {
            let t = magnitudes[i..].iter().take_while(|m| **m == magnitudes[i]).count() as f64;
            tie_term += t * t * t - t;
            i += t as usize;
        }
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        let z = (statistic - mean + 0.5) / sqrt(var);
        2.0 * normal_cdf(z.min(0.0))
    };
    let p_value = p.clamp(0.0, 1.0);
    Ok(WilcoxonResult {
        statistic,
        w_plus,
        w_minus,
        n_effective: n,
        p_value,
        significant_at_05: p_value < SIGNIFICANCE_LEVEL,
        exact,
    })
}

/// One row of the accuracy table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub estimator: Estimator,
    pub errors: ErrorSummary,
    /// 95% interval for the mean absolute effort error; absent for a
    /// single outcome.
    pub interval: Option<ConfidenceInterval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub estimator: Estimator,
    /// Test of this estimator's absolute errors against the reference's;
    /// absent with fewer than five outcomes.
    pub wilcoxon: Option<WilcoxonResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub reference: Estimator,
    pub folds: usize,
    pub rows: Vec<AccuracyRow>,
    pub significance: Vec<SignificanceRow>,
}

impl ComparisonReport {
    pub fn row(&self, estimator: Estimator) -> Option<&AccuracyRow> {
        self.rows.iter().find(|r| r.estimator == estimator)
    }

    /// Learned estimators ordered by effort MAE, best first.
    pub fn mae_ranking(&self) -> Vec<Estimator> {
        let mut learned: Vec<&AccuracyRow> = self.rows.iter().filter(|r| r.estimator.is_learned()).collect();
        learned.sort_by(|a, b| a.errors.mae.total_cmp(&b.errors.mae));
        learned.into_iter().map(|r| r.estimator).collect()
    }
}

/// Effort-level accuracy of every estimator present in the outcomes.
pub fn compare(outcomes: &[FoldOutcome]) -> Result<ComparisonReport> {
    let first = outcomes.first().ok_or(Error::InsufficientData { required: 1, actual: 0 })?;
    let estimators: Vec<Estimator> = first.predictions.iter().map(|(e, _)| *e).collect();
    let reference = if estimators.contains(&Estimator::Ensemble) { Estimator::Ensemble } else { estimators[0] };
    let mut abs_errors: Vec<Vec<f64>> = Vec::with_capacity(estimators.len());
    let mut rows = Vec::with_capacity(estimators.len());
    for &estimator in &estimators {
        let pairs = outcomes
            .iter()
            .map(|o| {
                let predicted = o.prediction(estimator).ok_or_else(|| {
                    Error::InvalidConfig(alloc::format!("fold {} lacks estimator {estimator}", o.index))
                })?;
                PredictionPair::new(o.actual_effort, predicted)
            })
            .collect::<Result<Vec<_>>>()?;
        let errors: Vec<f64> = pairs.iter().map(PredictionPair::abs_error).collect();
        let interval = if errors.len() >= 2 { Some(confidence_interval_95(&errors)?) } else { None };
        rows.push(AccuracyRow { estimator, errors: ErrorSummary::from_pairs(&pairs)?, interval });
        abs_errors.push(errors);
    }
    let ref_pos = estimators.iter().position(|e| *e == reference).expect("reference is listed");
    let significance = estimators
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != ref_pos)
        .map(|(i, &estimator)| {
            let wilcoxon = if outcomes.len() >= 5 {
                Some(wilcoxon_signed_rank(&abs_errors[i], &abs_errors[ref_pos])?)
            } else {
                None
            };
            Ok(SignificanceRow { estimator, wilcoxon })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { reference, folds: outcomes.len(), rows, significance })
}

/// Adapter so the baselines can be used wherever a regressor is expected.
#[derive(Debug, Clone, Copy)]
pub struct Baseline(pub Estimator);

impl Regressor for Baseline {
    fn predict(&self, env: &EnvFactors) -> f64 {
        match self.0 {
            Estimator::SchneiderWinter => schneider_winter_baseline(env),
            _ => karner_baseline(env),
        }
    }
}
