//! Gaussian radial basis function network: k-means centers, nearest-center
//! widths and a ridge least-squares output layer.

use alloc::vec;
use alloc::vec::Vec;

use libm::exp;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{scaled, Differentiable};
use crate::dataset::FACTOR_COUNT;
use crate::linalg::{lstsq, Matrix};
use crate::special::{dist, hypot_sq};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfParams {
    /// Upper bound on the number of centers; the actual count is
    /// `min(max_centers, distinct training inputs)`.
    pub max_centers: usize,
    pub kmeans_iterations: usize,
    /// Each width is the mean distance to this many nearest other centers.
    pub width_neighbors: usize,
    pub ridge: f64,
}

impl Default for RbfParams {
    fn default() -> Self {
        Self { max_centers: 10, kmeans_iterations: 20, width_neighbors: 2, ridge: 1e-8 }
    }
}

/// `f(x) = bias + Σ_c weights[c] · exp(−‖x − centers[c]‖² / (2 widths[c]²))`
/// on ratings scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfModel {
    pub centers: Vec<[f64; FACTOR_COUNT]>,
    pub widths: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl RbfModel {
    pub fn predict(&self, x: &[f64; FACTOR_COUNT]) -> f64 {
        let xs = scaled(x);
        self.bias
            + self
                .centers
                .iter()
                .zip(&self.widths)
                .zip(&self.weights)
                .map(|((c, s), w)| w * basis(&xs, c, *s))
                .sum::<f64>()
    }
}

fn basis(x: &[f64], center: &[f64], width: f64) -> f64 {
    exp(-hypot_sq(x, center) / (2.0 * width * width))
}

/// Width used when there is no other center to measure against.
const LONE_WIDTH: f64 = 1.0;

fn kmeans(points: &[[f64; FACTOR_COUNT]], k: usize, iterations: usize, seed: u64) -> Vec<[f64; FACTOR_COUNT]> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut crate::rng::rng(seed));
    let mut centers: Vec<[f64; FACTOR_COUNT]> = order[..k].iter().map(|&i| points[i]).collect();
    let mut assignment = vec![usize::MAX; points.len()];
    for _ in 0..iterations {
        let mut changed = false;
        for (p, slot) in points.iter().zip(assignment.iter_mut()) {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = hypot_sq(p, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![[0.0; FACTOR_COUNT]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignment) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            // Empty clusters keep their previous center.
            if counts[c] > 0 {
                centers[c] = sums[c].map(|s| s / counts[c] as f64);
            }
        }
    }
    centers
}

fn widths(centers: &[[f64; FACTOR_COUNT]], neighbors: usize) -> Vec<f64> {
    let raw: Vec<f64> = centers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut d: Vec<f64> =
                centers.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, o)| dist(c, o)).collect();
            if d.is_empty() {
                return LONE_WIDTH;
            }
            d.sort_by(f64::total_cmp);
            let m = neighbors.min(d.len());
            d[..m].iter().sum::<f64>() / m as f64
        })
        .collect();
    let positive: Vec<f64> = raw.iter().copied().filter(|w| *w > 1e-12).collect();
    let fallback = if positive.is_empty() { LONE_WIDTH } else { positive.iter().sum::<f64>() / positive.len() as f64 };
    raw.into_iter().map(|w| if w > 1e-12 { w } else { fallback }).collect()
}

fn output_layer(xs: &[[f64; FACTOR_COUNT]], y: &[f64], centers: &[[f64; FACTOR_COUNT]], widths: &[f64], ridge: f64) -> (Vec<f64>, f64) {
    let bias = y.iter().sum::<f64>() / y.len() as f64;
    let design = Matrix::from_fn(xs.len(), centers.len(), |r, c| basis(&xs[r], &centers[c], widths[c]));
    let residual: Vec<f64> = y.iter().map(|v| v - bias).collect();
    let weights = lstsq(&design, &residual, ridge)
        .or_else(|| lstsq(&design, &residual, ridge.max(RbfParams::default().ridge)))
        .unwrap_or_else(|| vec![0.0; centers.len()]);
    (weights, bias)
}

pub(crate) fn fit(rows: &[[f64; FACTOR_COUNT]], y: &[f64], params: &RbfParams, seed: u64) -> RbfModel {
    let xs: Vec<[f64; FACTOR_COUNT]> = rows.iter().map(scaled).collect();
    let mut distinct: Vec<[f64; FACTOR_COUNT]> = Vec::new();
    for x in &xs {
        if !distinct.contains(x) {
            distinct.push(*x);
        }
    }
    let k = params.max_centers.min(distinct.len());
    let centers = kmeans(&distinct, k, params.kmeans_iterations, seed);
    let widths = widths(&centers, params.width_neighbors);
    let (weights, bias) = output_layer(&xs, y, &centers, &widths, params.ridge);
    RbfModel { centers, widths, weights, bias }
}

/// Squared-error loss as a function of every parameter, evaluated around the
/// fitted centers and widths with seeded output weights in [−0.5, 0.5] and
/// the target mean as bias. Layout: weights (k), bias, centers (k × 8),
/// widths (k).
pub(crate) struct GradientProblem {
    xs: Vec<[f64; FACTOR_COUNT]>,
    y: Vec<f64>,
    trained: RbfModel,
}

impl GradientProblem {
    pub(crate) fn new(rows: &[[f64; FACTOR_COUNT]], y: &[f64], params: &RbfParams, seed: u64) -> Self {
        use rand::Rng;
        let mut trained = fit(rows, y, params, seed);
        let mut rng = crate::rng::rng(crate::rng::split(seed, 1));
        for w in &mut trained.weights {
            *w = rng.random_range(-0.5..=0.5);
        }
        trained.bias = y.iter().sum::<f64>() / y.len() as f64;
        Self { xs: rows.iter().map(scaled).collect(), y: y.to_vec(), trained }
    }

    fn k(&self) -> usize {
        self.trained.centers.len()
    }

    fn unpack<'a>(&self, p: &'a [f64]) -> (&'a [f64], f64, &'a [f64], &'a [f64]) {
        let k = self.k();
        let (w, rest) = p.split_at(k);
        let (b, rest) = rest.split_at(1);
        let (c, s) = rest.split_at(k * FACTOR_COUNT);
        (w, b[0], c, s)
    }

    fn output(&self, p: &[f64], x: &[f64; FACTOR_COUNT]) -> f64 {
        let (w, b, c, s) = self.unpack(p);
        b + (0..self.k()).map(|j| w[j] * basis(x, &c[j * FACTOR_COUNT..(j + 1) * FACTOR_COUNT], s[j])).sum::<f64>()
    }
}

impl Differentiable for GradientProblem {
    fn initial(&self) -> Vec<f64> {
        let m = &self.trained;
        let mut p = m.weights.clone();
        p.push(m.bias);
        for c in &m.centers {
            p.extend_from_slice(c);
        }
        p.extend_from_slice(&m.widths);
        p
    }

    fn loss(&self, p: &[f64]) -> f64 {
        let inv_n = 1.0 / self.xs.len() as f64;
        self.xs
            .iter()
            .zip(&self.y)
            .map(|(x, t)| {
                let r = self.output(p, x) - t;
                0.5 * r * r * inv_n
            })
            .sum()
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let k = self.k();
        let (w, _, c, s) = self.unpack(p);
        let inv_n = 1.0 / self.xs.len() as f64;
        let mut g = vec![0.0; p.len()];
        for (x, t) in self.xs.iter().zip(&self.y) {
            let d = (self.output(p, x) - t) * inv_n;
            g[k] += d;
            for j in 0..k {
                let center = &c[j * FACTOR_COUNT..(j + 1) * FACTOR_COUNT];
                let phi = basis(x, center, s[j]);
                let s2 = s[j] * s[j];
                g[j] += d * phi;
                let common = d * w[j] * phi;
                for dim in 0..FACTOR_COUNT {
                    g[k + 1 + j * FACTOR_COUNT + dim] += common * (x[dim] - center[dim]) / s2;
                }
                g[k + 1 + k * FACTOR_COUNT + j] += common * hypot_sq(x, center) / (s2 * s[j]);
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rows(n: usize, seed: u64) -> Vec<[f64; FACTOR_COUNT]> {
        let mut rng = crate::rng::rng(seed);
        (0..n).map(|_| core::array::from_fn(|_| rng.random_range(0.0..=5.0))).collect()
    }

    #[test]
    fn per_point_centers_interpolate() {
        let x = rows(12, 1);
        let y: Vec<f64> = x.iter().map(|r| 15.0 + r[0] * r[1] - r[7]).collect();
        let params = RbfParams { max_centers: 12, ridge: 0.0, ..RbfParams::default() };
        let m = fit(&x, &y, &params, 9);
        assert_eq!(m.centers.len(), 12);
        for (r, t) in x.iter().zip(&y) {
            assert!((m.predict(r) - t).abs() < 1e-6, "{} vs {t}", m.predict(r));
        }
    }

    #[test]
    fn duplicate_inputs_limit_center_count() {
        let base = rows(3, 2);
        let x: Vec<[f64; FACTOR_COUNT]> = (0..9).map(|i| base[i % 3]).collect();
        let y: Vec<f64> = (0..9).map(|i| 20.0 + (i % 3) as f64).collect();
        let m = fit(&x, &y, &RbfParams::default(), 1);
        assert_eq!(m.centers.len(), 3);
        assert!(m.widths.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn single_center_uses_lone_width() {
        let x = vec![[2.0; FACTOR_COUNT]; 4];
        let m = fit(&x, &[10.0, 12.0, 11.0, 13.0], &RbfParams::default(), 1);
        assert_eq!(m.widths, vec![LONE_WIDTH]);
        assert!((m.predict(&[2.0; FACTOR_COUNT]) - 11.5).abs() < 1e-6);
    }
}
