//! ε-insensitive support vector regression with a Gaussian kernel, trained
//! by sequential minimal optimization on the dual.
//!
//! The dual is written over 2n variables `β = [α; α*]` as
//!
//! ```text
//! min ½ βᵀQβ + pᵀβ   s.t.  Σ s_t β_t = 0,  0 ≤ β_t ≤ C
//! ```
//!
//! with signs `s = [+1; −1]`, `p = [ε − y; ε + y]` and
//! `Q_st = s_s s_t K(x_s, x_t)`. Working pairs are chosen by the
//! second-order maximal-violating-pair rule; the model is
//! `f(x) = Σ (α_i − α*_i) K(x_i, x) − ρ`.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, sqrt};
use serde::{Deserialize, Serialize};

use super::scaled;
use crate::dataset::FACTOR_COUNT;
use crate::special::hypot_sq;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    /// Kernel `exp(−γ‖x − x'‖²)` on ratings scaled to `[0, 1]`.
    pub gamma: f64,
    /// Box constraint.
    pub c: f64,
    /// Tube half-width as a multiple of the target standard deviation.
    pub epsilon_factor: f64,
    /// Stop when the maximal KKT violation drops below this.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self { gamma: 1.0 / FACTOR_COUNT as f64, c: 100.0, epsilon_factor: 0.1, tolerance: 1e-4, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub gamma: f64,
    pub epsilon: f64,
    /// Scaled support vectors.
    pub support: Vec<[f64; FACTOR_COUNT]>,
    /// `α_i − α*_i` for each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SvrModel {
    pub fn predict(&self, x: &[f64; FACTOR_COUNT]) -> f64 {
        let xs = scaled(x);
        self.support.iter().zip(&self.coef).map(|(sv, c)| c * exp(-self.gamma * hypot_sq(sv, &xs))).sum::<f64>()
            - self.rho
    }
}

const TAU: f64 = 1e-12;

pub(crate) fn fit(rows: &[[f64; FACTOR_COUNT]], y: &[f64], params: &SvrParams) -> SvrModel {
    let n = rows.len();
    let xs: Vec<[f64; FACTOR_COUNT]> = rows.iter().map(scaled).collect();
    let mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    let epsilon = params.epsilon_factor * sqrt(var);
    let c = params.c;

    let kernel: Vec<f64> = (0..n * n).map(|k| exp(-params.gamma * hypot_sq(&xs[k / n], &xs[k % n]))).collect();
    let k_at = |s: usize, t: usize| kernel[(s % n) * n + (t % n)];
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let l = 2 * n;

    let mut alpha = vec![0.0; l];
    let mut grad: Vec<f64> = (0..l).map(|t| if t < n { epsilon - y[t] } else { epsilon + y[t - n] }).collect();
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        // i: maximal violator from the "up" set.
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..l {
            let candidate = if sign(t) > 0.0 {
                (!upper(alpha[t])).then_some(-grad[t])
            } else {
                (!lower(alpha[t])).then_some(grad[t])
            };
            if let Some(v) = candidate {
                if v > gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        // j: second-order choice from the "low" set.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best_obj = f64::INFINITY;
        if i != usize::MAX {
            let si = sign(i);
            for t in 0..l {
                let st = sign(t);
                let (eligible, g, quad_sign) = if st > 0.0 {
                    (!lower(alpha[t]), grad[t], -1.0)
                } else {
                    (!upper(alpha[t]), -grad[t], 1.0)
                };
                if !eligible {
                    continue;
                }
                gmax2 = gmax2.max(g);
                let diff = gmax + g;
                if diff > 0.0 {
                    let q_it = si * st * k_at(i, t);
                    let quad = k_at(i, i) + k_at(t, t) + quad_sign * 2.0 * si * q_it;
                    let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                    if obj < best_obj {
                        best_obj = obj;
                        j = t;
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax + gmax2 < params.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (si, sj) = (sign(i), sign(j));
        let q_ij = si * sj * k_at(i, j);
        let (qii, qjj) = (k_at(i, i), k_at(j, j));
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if si != sj {
            let quad = (qii + qjj + 2.0 * q_ij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * q_ij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        if di != 0.0 || dj != 0.0 {
            for (t, g) in grad.iter_mut().enumerate() {
                let st = sign(t);
                *g += si * st * k_at(i, t) * di + sj * st * k_at(j, t) * dj;
            }
        }
    }

    // ρ from free variables, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..l {
        let yg = sign(t) * grad[t];
        if upper(alpha[t]) {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else {
        -mean
    };

    let mut support = Vec::new();
    let mut coef = Vec::new();
    for i in 0..n {
        let w = alpha[i] - alpha[i + n];
        if w != 0.0 {
            support.push(xs[i]);
            coef.push(w);
        }
    }
    SvrModel { gamma: params.gamma, epsilon, support, coef, rho, iterations, converged }
}
