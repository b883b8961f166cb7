//! The seven base productivity regressors behind one train/predict contract.
//!
//! Every family consumes the raw environmental ratings. The kernel and
//! network families (SVR, MLP, RBF) rescale ratings to `[0, 1]` by the fixed
//! `[0, 5]` range internally. Predictions are floored at
//! [`PRODUCTIVITY_FLOOR`].

mod fuzzy;
mod linear;
mod mlp;
mod rbf;
mod svr;
mod tree;

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use fuzzy::{FuzzyModel, FuzzyParams};
pub use linear::{LinearModel, LinearParams, StepwiseParams};
pub use mlp::{MlpModel, MlpParams};
pub use rbf::{RbfModel, RbfParams};
pub use svr::{SvrModel, SvrParams};
pub use tree::{RegressionTree, TreeNode, TreeParams};

use crate::dataset::{EnvFactors, FACTOR_COUNT, MAX_RATING, PRODUCTIVITY_FLOOR};
use crate::{Error, Result};

/// Base model families, in the fixed order used by every weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelId {
    Mlr,
    Sr,
    Rt,
    Svr,
    Mlp,
    Rbf,
    Fuzzy,
}

/// Number of base model families.
pub const MODEL_COUNT: usize = 7;

impl ModelId {
    pub const ALL: [ModelId; MODEL_COUNT] =
        [ModelId::Mlr, ModelId::Sr, ModelId::Rt, ModelId::Svr, ModelId::Mlp, ModelId::Rbf, ModelId::Fuzzy];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Mlr => "MLR",
            ModelId::Sr => "SR",
            ModelId::Rt => "RT",
            ModelId::Svr => "SVR",
            ModelId::Mlp => "MLP",
            ModelId::Rbf => "RBF",
            ModelId::Fuzzy => "FUZZY",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyperparameters for every family plus the training seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub mlr: LinearParams,
    pub sr: StepwiseParams,
    pub rt: TreeParams,
    pub svr: SvrParams,
    pub mlp: MlpParams,
    pub rbf: RbfParams,
    pub fuzzy: FuzzyParams,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            mlr: LinearParams::default(),
            sr: StepwiseParams::default(),
            rt: TreeParams::default(),
            svr: SvrParams::default(),
            mlp: MlpParams::default(),
            rbf: RbfParams::default(),
            fuzzy: FuzzyParams::default(),
            seed: crate::rng::DEFAULT_SEED,
        }
    }
}

impl ModelConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        let l = &self.mlr;
        if !(l.ridge_fallback > 0.0) || !(l.condition_limit > 1.0) {
            return fail("MLR needs ridge_fallback > 0 and condition_limit > 1");
        }
        let s = &self.sr;
        if !(0.0 < s.p_enter && s.p_enter < s.p_remove && s.p_remove < 1.0) {
            return fail("SR needs 0 < p_enter < p_remove < 1");
        }
        if self.rt.min_leaf == 0 || self.rt.max_depth == Some(0) {
            return fail("RT needs min_leaf >= 1 and max_depth >= 1");
        }
        let v = &self.svr;
        if !(v.gamma > 0.0 && v.c > 0.0 && v.epsilon_factor >= 0.0 && v.tolerance > 0.0) || v.max_iter == 0 {
            return fail("SVR needs gamma > 0, C > 0, epsilon_factor >= 0, tolerance > 0, max_iter >= 1");
        }
        let m = &self.mlp;
        if m.hidden == 0 || !(m.learning_rate > 0.0) || !(m.init_range >= 0.0) {
            return fail("MLP needs hidden >= 1, learning_rate > 0, init_range >= 0");
        }
        let r = &self.rbf;
        if r.max_centers == 0 || r.width_neighbors == 0 || !(r.ridge >= 0.0) {
            return fail("RBF needs max_centers >= 1, width_neighbors >= 1, ridge >= 0");
        }
        let z = &self.fuzzy;
        if z.resolution < 3 || !(z.fallback_anchors[0] <= z.fallback_anchors[1] && z.fallback_anchors[1] <= z.fallback_anchors[2])
        {
            return fail("FUZZY needs resolution >= 3 and ascending fallback anchors");
        }
        Ok(())
    }
}

/// Anything that maps environmental ratings to a productivity estimate.
pub trait Regressor {
    fn predict(&self, env: &EnvFactors) -> f64;
}

/// Fitted parameters of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "UPPERCASE")]
pub enum FittedParams {
    Mlr(LinearModel),
    Sr(LinearModel),
    Rt(RegressionTree),
    Svr(SvrModel),
    Mlp(MlpModel),
    Rbf(RbfModel),
    Fuzzy(FuzzyModel),
}

/// A trained base model. Immutable; prediction is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    /// Digest of the training inputs and targets.
    pub fingerprint: u64,
    #[serde(flatten)]
    pub params: FittedParams,
}

impl TrainedModel {
    pub fn id(&self) -> ModelId {
        match self.params {
            FittedParams::Mlr(_) => ModelId::Mlr,
            FittedParams::Sr(_) => ModelId::Sr,
            FittedParams::Rt(_) => ModelId::Rt,
            FittedParams::Svr(_) => ModelId::Svr,
            FittedParams::Mlp(_) => ModelId::Mlp,
            FittedParams::Rbf(_) => ModelId::Rbf,
            FittedParams::Fuzzy(_) => ModelId::Fuzzy,
        }
    }

    /// Unfloored model output.
    pub fn raw_output(&self, env: &EnvFactors) -> f64 {
        let x = env.ratings();
        match &self.params {
            FittedParams::Mlr(m) | FittedParams::Sr(m) => m.predict(x),
            FittedParams::Rt(m) => m.predict(x),
            FittedParams::Svr(m) => m.predict(x),
            FittedParams::Mlp(m) => m.predict(x),
            FittedParams::Rbf(m) => m.predict(x),
            FittedParams::Fuzzy(m) => m.predict(x),
        }
    }
}

impl Regressor for TrainedModel {
    fn predict(&self, env: &EnvFactors) -> f64 {
        floor_productivity(self.raw_output(env))
    }
}

/// Clamps a raw model output to a usable productivity.
pub fn floor_productivity(p: f64) -> f64 {
    if p.is_nan() {
        PRODUCTIVITY_FLOOR
    } else {
        p.clamp(PRODUCTIVITY_FLOOR, f64::MAX)
    }
}

pub(crate) fn scaled(x: &[f64; FACTOR_COUNT]) -> [f64; FACTOR_COUNT] {
    x.map(|v| v / MAX_RATING)
}

fn fingerprint_xy(x: &[EnvFactors], y: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: f64| {
        for b in v.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for (e, t) in x.iter().zip(y) {
        e.ratings().iter().for_each(|r| eat(*r));
        eat(*t);
    }
    h
}

fn check_training_set(x: &[EnvFactors], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData { required: 3, actual: x.len() });
    }
    if let Some(bad) = y.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidConfig(format!("training targets must be positive, found {bad}")));
    }
    Ok(())
}

/// Trains one base model of family `id` on ratings `x` and productivities `y`.
pub fn train(id: ModelId, x: &[EnvFactors], y: &[f64], config: &ModelConfig) -> Result<TrainedModel> {
    check_training_set(x, y)?;
    config.validate()?;
    let rows: Vec<[f64; FACTOR_COUNT]> = x.iter().map(|e| *e.ratings()).collect();
    let params = match id {
        ModelId::Mlr => FittedParams::Mlr(linear::fit_mlr(&rows, y, &config.mlr)),
        ModelId::Sr => FittedParams::Sr(linear::fit_stepwise(&rows, y, &config.sr, &config.mlr)),
        ModelId::Rt => FittedParams::Rt(tree::fit(&rows, y, &config.rt)),
        ModelId::Svr => FittedParams::Svr(svr::fit(&rows, y, &config.svr)),
        ModelId::Mlp => FittedParams::Mlp(mlp::fit(&rows, y, &config.mlp, config.seed)),
        ModelId::Rbf => FittedParams::Rbf(rbf::fit(&rows, y, &config.rbf, config.seed)),
        ModelId::Fuzzy => FittedParams::Fuzzy(fuzzy::fit(&rows, y, &config.fuzzy)),
    };
    let model = TrainedModel { fingerprint: fingerprint_xy(x, y), params };
    if !model.raw_output(&x[0]).is_finite() {
        return Err(Error::Training { model: id, reason: "non-finite output on training data".to_string() });
    }
    Ok(model)
}

/// Relative deviations below this gradient magnitude are measured against
/// it instead, so finite-difference noise on vanishing partials is not
/// reported as disagreement.
pub const GRADIENT_FLOOR: f64 = 1e-4;

/// Finite-difference step used by [`check_gradient`].
pub const GRADIENT_STEP: f64 = 1e-5;

/// Compares the analytic loss gradient of an MLP or RBF network with central
/// finite differences and returns the largest relative deviation.
///
/// The MLP is checked at its seeded initial weights, the RBF network at its
/// fitted centers and widths with seeded output weights.
pub fn check_gradient(id: ModelId, x: &[EnvFactors], y: &[f64], config: &ModelConfig) -> Result<f64> {
    check_gradient_with(id, x, y, config, |_| {})
}

/// [`check_gradient`] with a hook that may alter the analytic gradient
/// before comparison.
pub fn check_gradient_with(
    id: ModelId,
    x: &[EnvFactors],
    y: &[f64],
    config: &ModelConfig,
    tamper: impl FnOnce(&mut [f64]),
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.is_empty() {
        return Err(Error::InsufficientData { required: 1, actual: 0 });
    }
    config.validate()?;
    let rows: Vec<[f64; FACTOR_COUNT]> = x.iter().map(|e| *e.ratings()).collect();
    let problem: alloc::boxed::Box<dyn Differentiable> = match id {
        ModelId::Mlp => alloc::boxed::Box::new(mlp::GradientProblem::new(&rows, y, &config.mlp, config.seed)),
        ModelId::Rbf => alloc::boxed::Box::new(rbf::GradientProblem::new(&rows, y, &config.rbf, config.seed)),
        other => return Err(Error::InvalidConfig(format!("no gradient check for {other}"))),
    };
    let params = problem.initial();
    let mut analytic = problem.gradient(&params);
    tamper(&mut analytic);
    let mut worst: f64 = 0.0;
    let mut probe = params.clone();
    for k in 0..params.len() {
        probe[k] = params[k] + GRADIENT_STEP;
        let up = problem.loss(&probe);
        probe[k] = params[k] - GRADIENT_STEP;
        let down = problem.loss(&probe);
        probe[k] = params[k];
        let numeric = (up - down) / (2.0 * GRADIENT_STEP);
        let scale = analytic[k].abs().max(numeric.abs()).max(GRADIENT_FLOOR);
        worst = worst.max((analytic[k] - numeric).abs() / scale);
    }
    Ok(worst)
}

pub(crate) trait Differentiable {
    fn initial(&self) -> Vec<f64>;
    fn loss(&self, params: &[f64]) -> f64;
    fn gradient(&self, params: &[f64]) -> Vec<f64>;
}

/// Pairwise disagreement between two regressors on a common set of inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diversity {
    pub mean_abs_difference: f64,
    pub max_abs_difference: f64,
    /// Pearson correlation of the two prediction vectors; `None` if either
    /// is constant.
    pub correlation: Option<f64>,
}

/// Prediction-difference statistics for every pair of `models` on `inputs`,
/// keyed by model position.
pub fn pairwise_diversity(models: &[&dyn Regressor], inputs: &[EnvFactors]) -> Vec<((usize, usize), Diversity)> {
    let preds: Vec<Vec<f64>> = models.iter().map(|m| inputs.iter().map(|e| m.predict(e)).collect()).collect();
    let mut out = Vec::new();
    for i in 0..preds.len() {
        for j in i + 1..preds.len() {
            out.push(((i, j), diversity(&preds[i], &preds[j])));
        }
    }
    out
}

fn diversity(a: &[f64], b: &[f64]) -> Diversity {
    let n = a.len().max(1) as f64;
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    let mean_abs_difference = diffs.clone().sum::<f64>() / n;
    let max_abs_difference = diffs.fold(0.0, f64::max);
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    let correlation = if saa > 0.0 && sbb > 0.0 { Some(sab / libm::sqrt(saa * sbb)) } else { None };
    Diversity { mean_abs_difference, max_abs_difference, correlation }
}
