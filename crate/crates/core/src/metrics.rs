//! MAE, MBRE and MIBRE, plus the min-max normalization applied to them
//! before weighting.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An (actual, estimated) pair, both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionPair {
    actual: f64,
    estimated: f64,
}

impl PredictionPair {
    pub fn new(actual: f64, estimated: f64) -> Result<Self> {
        if !(actual > 0.0 && estimated > 0.0) || !actual.is_finite() || !estimated.is_finite() {
            return Err(Error::NonPositivePair { actual, estimated });
        }
        Ok(Self { actual, estimated })
    }

    pub fn actual(&self) -> f64 {
        self.actual
    }

    pub fn estimated(&self) -> f64 {
        self.estimated
    }

    pub fn abs_error(&self) -> f64 {
        (self.actual - self.estimated).abs()
    }

    /// |e − ê| / min(e, ê)
    pub fn balanced_relative_error(&self) -> f64 {
        self.abs_error() / self.actual.min(self.estimated)
    }

    /// |e − ê| / max(e, ê), always in [0, 1).
    pub fn inverse_balanced_relative_error(&self) -> f64 {
        self.abs_error() / self.actual.max(self.estimated)
    }
}

fn mean_of(pairs: &[PredictionPair], f: impl Fn(&PredictionPair) -> f64) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData { required: 1, actual: 0 });
    }
    Ok(pairs.iter().map(f).sum::<f64>() / pairs.len() as f64)
}

/// Mean absolute error.
pub fn mae(pairs: &[PredictionPair]) -> Result<f64> {
    mean_of(pairs, PredictionPair::abs_error)
}

/// Mean balanced relative error.
pub fn mbre(pairs: &[PredictionPair]) -> Result<f64> {
    mean_of(pairs, PredictionPair::balanced_relative_error)
}

/// Mean inverted balanced relative error.
pub fn mibre(pairs: &[PredictionPair]) -> Result<f64> {
    mean_of(pairs, PredictionPair::inverse_balanced_relative_error)
}

/// The three accuracy measures of one estimator on one evaluation set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub mae: f64,
    pub mbre: f64,
    pub mibre: f64,
}

impl ErrorSummary {
    pub fn from_pairs(pairs: &[PredictionPair]) -> Result<Self> {
        Ok(Self { mae: mae(pairs)?, mbre: mbre(pairs)?, mibre: mibre(pairs)? })
    }

    /// Element-wise mean of several summaries.
    pub fn average(summaries: &[ErrorSummary]) -> Result<Self> {
        if summaries.is_empty() {
            return Err(Error::InsufficientData { required: 1, actual: 0 });
        }
        let n = summaries.len() as f64;
        let sum = summaries.iter().fold(ErrorSummary::default(), |acc, s| ErrorSummary {
            mae: acc.mae + s.mae,
            mbre: acc.mbre + s.mbre,
            mibre: acc.mibre + s.mibre,
        });
        Ok(Self { mae: sum.mae / n, mbre: sum.mbre / n, mibre: sum.mibre / n })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.mae, self.mbre, self.mibre]
    }
}

/// Rescales `values` to `[0, 1]` by (v − min) / (max − min).
///
/// When every value is equal there is nothing to discriminate and each
/// output is 0.5.
pub fn min_max_normalize(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InsufficientData { required: 1, actual: 0 });
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if span == 0.0 {
        return Ok(alloc::vec![0.5; values.len()]);
    }
    Ok(values.iter().map(|v| ((v - lo) / span).clamp(0.0, 1.0)).collect())
}
