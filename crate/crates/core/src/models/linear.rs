//! Multiple linear regression and forward/backward stepwise regression.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::FACTOR_COUNT;
use crate::linalg::{cholesky_solve, condition_number, Matrix};
use crate::special::f1_sf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    /// Ridge penalty used when the Gram matrix is too ill-conditioned.
    pub ridge_fallback: f64,
    pub condition_limit: f64,
}

impl Default for LinearParams {
    fn default() -> Self {
        Self { ridge_fallback: 1e-6, condition_limit: 1e10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseParams {
    /// A factor enters when its partial F-test p-value is below this.
    pub p_enter: f64,
    /// A factor leaves when its partial F-test p-value exceeds this.
    pub p_remove: f64,
}

impl Default for StepwiseParams {
    fn default() -> Self {
        Self { p_enter: 0.05, p_remove: 0.10 }
    }
}

/// `intercept + Σ coefficients[j] · e_j`. Factors left out by stepwise
/// selection have a zero coefficient and are absent from `selected`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: [f64; FACTOR_COUNT],
    pub selected: Vec<usize>,
    /// Ridge penalty applied during fitting (0 for plain least squares).
    pub ridge: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64; FACTOR_COUNT]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

struct Fit {
    beta: Vec<f64>,
    ridge: f64,
    rss: f64,
}

/// Least squares on an intercept plus the factor `columns`.
fn fit_columns(rows: &[[f64; FACTOR_COUNT]], y: &[f64], columns: &[usize], params: &LinearParams) -> Fit {
    let p = columns.len() + 1;
    let design = Matrix::from_fn(rows.len(), p, |r, c| if c == 0 { 1.0 } else { rows[r][columns[c - 1]] });
    let gram = design.gram();
    let rhs = design.t_mul_vec(y);
    let mut ridge = 0.0;
    let mut solved = None;
    if condition_number(&gram) <= params.condition_limit {
        solved = cholesky_solve(&gram, &rhs);
    }
    if solved.is_none() {
        ridge = params.ridge_fallback;
        // Escalate only if the factorization still breaks down numerically.
        for _ in 0..12 {
            let mut g = gram.clone();
            for i in 1..p {
                g[(i, i)] += ridge;
            }
            solved = cholesky_solve(&g, &rhs);
            if solved.is_some() {
                break;
            }
            ridge *= 10.0;
        }
    }
    let beta = solved.unwrap_or_else(|| {
        let mut b = alloc::vec![0.0; p];
        b[0] = y.iter().sum::<f64>() / y.len() as f64;
        b
    });
    let rss = design.mul_vec(&beta).iter().zip(y).map(|(f, t)| (f - t) * (f - t)).sum();
    Fit { beta, ridge, rss }
}

fn to_model(fit: &Fit, columns: &[usize]) -> LinearModel {
    let mut coefficients = [0.0; FACTOR_COUNT];
    for (k, &j) in columns.iter().enumerate() {
        coefficients[j] = fit.beta[k + 1];
    }
    LinearModel { intercept: fit.beta[0], coefficients, selected: columns.to_vec(), ridge: fit.ridge }
}

pub(crate) fn fit_mlr(rows: &[[f64; FACTOR_COUNT]], y: &[f64], params: &LinearParams) -> LinearModel {
    let columns: Vec<usize> = (0..FACTOR_COUNT).collect();
    to_model(&fit_columns(rows, y, &columns, params), &columns)
}

/// p-value of the partial F-test comparing a reduced model (`rss_small`)
/// with one extra term (`rss_big`, residual degrees of freedom `df`).
fn partial_f_p(rss_small: f64, rss_big: f64, df: usize) -> f64 {
    let gain = rss_small - rss_big;
    if gain <= 0.0 {
        return 1.0;
    }
    if rss_big <= 0.0 {
        return 0.0;
    }
    f1_sf(gain / (rss_big / df as f64), df as f64)
}

/// Stepwise selection: each round adds the factor with the smallest entry
/// p-value (if below `p_enter`), then drops factors whose removal p-value
/// exceeds `p_remove`. Ties go to the lowest factor index.
pub(crate) fn fit_stepwise(
    rows: &[[f64; FACTOR_COUNT]],
    y: &[f64],
    params: &StepwiseParams,
    linear: &LinearParams,
) -> LinearModel {
    let n = rows.len();
    let mut selected: Vec<usize> = Vec::new();
    let mut current = fit_columns(rows, y, &selected, linear);
    // p_enter < p_remove rules out cycling; the cap is a backstop.
    for _ in 0..4 * FACTOR_COUNT {
        let df = match n.checked_sub(selected.len() + 2) {
            Some(df) if df >= 1 => df,
            _ => break,
        };
        let mut best: Option<(usize, f64, Fit)> = None;
        for j in (0..FACTOR_COUNT).filter(|j| !selected.contains(j)) {
            let mut cols = selected.clone();
            cols.push(j);
            cols.sort_unstable();
            let fit = fit_columns(rows, y, &cols, linear);
            let p = partial_f_p(current.rss, fit.rss, df);
            if best.as_ref().is_none_or(|(_, bp, _)| p < *bp) {
                best = Some((j, p, fit));
            }
        }
        match best {
            Some((j, p, fit)) if p < params.p_enter => {
                selected.push(j);
                selected.sort_unstable();
                current = fit;
            }
            _ => break,
        }
        loop {
            let df = n - selected.len() - 1;
            let mut worst: Option<(usize, f64, Fit)> = None;
            for (k, _) in selected.iter().enumerate() {
                let mut cols = selected.clone();
                cols.remove(k);
                let fit = fit_columns(rows, y, &cols, linear);
                let p = partial_f_p(fit.rss, current.rss, df);
                if worst.as_ref().is_none_or(|(_, wp, _)| p > *wp) {
                    worst = Some((k, p, fit));
                }
            }
            match worst {
                Some((k, p, fit)) if p > params.p_remove => {
                    selected.remove(k);
                    current = fit;
                }
                _ => break,
            }
        }
    }
    to_model(&current, &selected)
}
