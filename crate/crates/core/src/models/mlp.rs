//! One-hidden-layer tanh perceptron trained by full-batch gradient descent.

use alloc::vec;
use alloc::vec::Vec;

use libm::{sqrt, tanh};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{scaled, Differentiable};
use crate::dataset::FACTOR_COUNT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Initial weights are uniform in `[−init_range, init_range]`.
    pub init_range: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self { hidden: 8, learning_rate: 0.01, epochs: 5000, init_range: 0.5 }
    }
}

/// Flat parameter layout: hidden weights (`hidden × 8`, row-major), hidden
/// biases, output weights, output bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub hidden: usize,
    pub params: Vec<f64>,
    pub target_mean: f64,
    pub target_scale: f64,
}

impl MlpModel {
    pub fn predict(&self, x: &[f64; FACTOR_COUNT]) -> f64 {
        let net = Net::new(self.hidden);
        net.forward(&self.params, &scaled(x)) * self.target_scale + self.target_mean
    }
}

#[derive(Clone, Copy)]
struct Net {
    hidden: usize,
}

impl Net {
    fn new(hidden: usize) -> Self {
        Self { hidden }
    }

    fn len(&self) -> usize {
        self.hidden * FACTOR_COUNT + 2 * self.hidden + 1
    }

    fn forward(&self, p: &[f64], x: &[f64; FACTOR_COUNT]) -> f64 {
        let h = self.hidden;
        let (w1, rest) = p.split_at(h * FACTOR_COUNT);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        let mut out = b2[0];
        for k in 0..h {
            let row = &w1[k * FACTOR_COUNT..(k + 1) * FACTOR_COUNT];
            let z = b1[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            out += w2[k] * tanh(z);
        }
        out
    }

    /// Loss `1/(2n) Σ (f(x_i) − t_i)²`, accumulating its gradient into `grad`.
    fn loss_and_gradient(&self, p: &[f64], xs: &[[f64; FACTOR_COUNT]], t: &[f64], grad: &mut [f64], act: &mut [f64]) -> f64 {
        let h = self.hidden;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let (w1, rest) = p.split_at(h * FACTOR_COUNT);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        let inv_n = 1.0 / xs.len() as f64;
        let mut loss = 0.0;
        for (x, target) in xs.iter().zip(t) {
            let mut out = b2[0];
            for k in 0..h {
                let row = &w1[k * FACTOR_COUNT..(k + 1) * FACTOR_COUNT];
                let z = b1[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
                act[k] = tanh(z);
                out += w2[k] * act[k];
            }
            let r = out - target;
            loss += 0.5 * r * r * inv_n;
            let d = r * inv_n;
            let (g_w1, g_rest) = grad.split_at_mut(h * FACTOR_COUNT);
            let (g_b1, g_rest) = g_rest.split_at_mut(h);
            let (g_w2, g_b2) = g_rest.split_at_mut(h);
            g_b2[0] += d;
            for k in 0..h {
                g_w2[k] += d * act[k];
                let dz = d * w2[k] * (1.0 - act[k] * act[k]);
                g_b1[k] += dz;
                for (g, v) in g_w1[k * FACTOR_COUNT..(k + 1) * FACTOR_COUNT].iter_mut().zip(x) {
                    *g += dz * v;
                }
            }
        }
        loss
    }
}

struct Prepared {
    xs: Vec<[f64; FACTOR_COUNT]>,
    targets: Vec<f64>,
    mean: f64,
    scale: f64,
    init: Vec<f64>,
}

fn prepare(rows: &[[f64; FACTOR_COUNT]], y: &[f64], params: &MlpParams, seed: u64) -> Prepared {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = if y.len() > 1 { y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let scale = if var > 0.0 { sqrt(var) } else { 1.0 };
    let net = Net::new(params.hidden);
    let mut rng = crate::rng::rng(seed);
    let r = params.init_range;
    let init = (0..net.len()).map(|_| if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 }).collect();
    Prepared {
        xs: rows.iter().map(scaled).collect(),
        targets: y.iter().map(|v| (v - mean) / scale).collect(),
        mean,
        scale,
        init,
    }
}

pub(crate) fn fit(rows: &[[f64; FACTOR_COUNT]], y: &[f64], params: &MlpParams, seed: u64) -> MlpModel {
    let prep = prepare(rows, y, params, seed);
    let net = Net::new(params.hidden);
    let mut p = prep.init;
    let mut grad = vec![0.0; p.len()];
    let mut act = vec![0.0; params.hidden];
    for _ in 0..params.epochs {
        net.loss_and_gradient(&p, &prep.xs, &prep.targets, &mut grad, &mut act);
        for (w, g) in p.iter_mut().zip(&grad) {
            *w -= params.learning_rate * g;
        }
    }
    MlpModel { hidden: params.hidden, params: p, target_mean: prep.mean, target_scale: prep.scale }
}

/// Training loss of the network at its seeded initialization.
pub(crate) struct GradientProblem {
    net: Net,
    prep: Prepared,
}

impl GradientProblem {
    pub(crate) fn new(rows: &[[f64; FACTOR_COUNT]], y: &[f64], params: &MlpParams, seed: u64) -> Self {
        Self { net: Net::new(params.hidden), prep: prepare(rows, y, params, seed) }
    }
}

impl Differentiable for GradientProblem {
    fn initial(&self) -> Vec<f64> {
        self.prep.init.clone()
    }

    fn loss(&self, params: &[f64]) -> f64 {
        let inv_n = 1.0 / self.prep.xs.len() as f64;
        self.prep
            .xs
            .iter()
            .zip(&self.prep.targets)
            .map(|(x, t)| {
                let r = self.net.forward(params, x) - t;
                0.5 * r * r * inv_n
            })
            .sum()
    }

    fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; params.len()];
        let mut act = vec![0.0; self.net.hidden];
        self.net.loss_and_gradient(params, &self.prep.xs, &self.prep.targets, &mut grad, &mut act);
        grad
    }
}
