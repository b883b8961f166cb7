//! Single-input Mamdani system over an aggregate environment score.
//!
//! The score is `s = Σ_{j=1..6} (5 − e_j) + e_7 + e_8`, so a larger score
//! means a less favourable environment. Three triangular antecedents (low,
//! mid, high) span the training range of `s`; the three rules map them to
//! triangular consequents centred on the 25th/50th/75th productivity
//! percentiles of the training data (or on fixed 20/28/36 hours per UCP
//! for small training sets). Output is the centroid of the max-min
//! aggregated consequents.

use serde::{Deserialize, Serialize};

use crate::dataset::{FACTOR_COUNT, MAX_RATING};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyParams {
    /// Below this many training records the fallback anchors are used.
    pub min_records_for_percentiles: usize,
    pub fallback_anchors: [f64; 3],
    /// Grid points for centroid defuzzification.
    pub resolution: usize,
}

impl Default for FuzzyParams {
    fn default() -> Self {
        Self { min_records_for_percentiles: 8, fallback_anchors: [20.0, 28.0, 36.0], resolution: 2001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyModel {
    pub score_min: f64,
    pub score_max: f64,
    /// Consequent peaks for the low, mid and high rules, ascending.
    pub anchors: [f64; 3],
    pub resolution: usize,
}

/// Aggregate environment score; higher is less favourable.
pub fn environment_score(x: &[f64; FACTOR_COUNT]) -> f64 {
    x[..6].iter().map(|e| MAX_RATING - e).sum::<f64>() + x[6] + x[7]
}

fn triangle(v: f64, left: f64, peak: f64, right: f64) -> f64 {
    if v == peak {
        1.0
    } else if v < peak {
        if v <= left {
            0.0
        } else {
            (v - left) / (peak - left)
        }
    } else if v >= right {
        0.0
    } else {
        (right - v) / (right - peak)
    }
}

impl FuzzyModel {
    /// Degrees of the low, mid and high antecedents at score `s`.
    pub fn memberships(&self, s: f64) -> [f64; 3] {
        let (lo, hi) = (self.score_min, self.score_max);
        if hi - lo <= 1e-12 {
            return [0.0, 1.0, 0.0];
        }
        let s = s.clamp(lo, hi);
        let mid = 0.5 * (lo + hi);
        let half = mid - lo;
        [
            triangle(s, lo - half, lo, mid),
            triangle(s, lo, mid, hi),
            triangle(s, mid, hi, hi + half),
        ]
    }

    pub fn predict(&self, x: &[f64; FACTOR_COUNT]) -> f64 {
        self.infer(environment_score(x))
    }

    /// Centroid of the clipped consequents for score `s`.
    pub fn infer(&self, s: f64) -> f64 {
        let [a1, a2, a3] = self.anchors;
        let half = 0.5 * (a3 - a1);
        if half <= 1e-9 {
            return a2;
        }
        let mu = self.memberships(s);
        let (start, end) = (a1 - half, a3 + half);
        let steps = self.resolution - 1;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=steps {
            // Symmetric grid so a symmetric output set has its centroid
            // exactly on the axis.
            let v = start + (end - start) * (i as f64 / steps as f64);
            let degree = mu
                .iter()
                .zip(self.anchors)
                .map(|(m, a)| m.min(triangle(v, a - half, a, a + half)))
                .fold(0.0, f64::max);
            num += degree * v;
            den += degree;
        }
        if den > 0.0 {
            num / den
        } else {
            a2
        }
    }
}

/// Linear-interpolation percentile of sorted data.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn fit(rows: &[[f64; FACTOR_COUNT]], y: &[f64], params: &FuzzyParams) -> FuzzyModel {
    let scores = rows.iter().map(environment_score);
    let score_min = scores.clone().fold(f64::INFINITY, f64::min);
    let score_max = scores.fold(f64::NEG_INFINITY, f64::max);
    let anchors = if y.len() < params.min_records_for_percentiles {
        params.fallback_anchors
    } else {
        let mut sorted = y.to_vec();
        sorted.sort_by(f64::total_cmp);
        [percentile(&sorted, 0.25), percentile(&sorted, 0.5), percentile(&sorted, 0.75)]
    };
    FuzzyModel { score_min, score_max, anchors, resolution: params.resolution }
}
