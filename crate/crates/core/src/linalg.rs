//! Small dense linear algebra for the regression models. Matrices here are
//! at most a few dozen rows and columns.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use libm::{fabs, sqrt};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `selfᵀ · self`.
    pub fn gram(&self) -> Matrix {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..self.cols {
                for j in i..self.cols {
                    g[(i, j)] += row[i] * row[j];
                }
            }
        }
        for i in 0..self.cols {
            for j in 0..i {
                g[(i, j)] = g[(j, i)];
            }
        }
        g
    }

    /// `selfᵀ · v`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &vr) in v.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(self.row(r)) {
                *o += x * vr;
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Solves `a · x = b` for symmetric positive definite `a`. `None` when the
/// factorization meets a non-positive pivot.
pub fn cholesky_solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = sqrt(d);
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Some(x)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if fabs(apq) < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (fabs(theta) + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Spectral condition number of a symmetric positive semi-definite matrix.
/// Infinite when the smallest eigenvalue is not positive.
pub fn condition_number(a: &Matrix) -> f64 {
    let ev = symmetric_eigenvalues(a);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Least squares `min ‖x·β − y‖² + ridge·‖β‖²` via Householder QR of the
/// ridge-augmented system. `None` if the system is rank deficient.
pub fn lstsq(x: &Matrix, y: &[f64], ridge: f64) -> Option<Vec<f64>> {
    let (n, p) = (x.rows(), x.cols());
    assert_eq!(y.len(), n);
    let extra = if ridge > 0.0 { p } else { 0 };
    let m = n + extra;
    if m < p {
        return None;
    }
    let sr = sqrt(ridge.max(0.0));
    let mut a = Matrix::from_fn(m, p, |r, c| {
        if r < n {
            x[(r, c)]
        } else if r - n == c {
            sr
        } else {
            0.0
        }
    });
    let mut b: Vec<f64> = y.iter().copied().chain(core::iter::repeat(0.0).take(extra)).collect();

    let mut scale = 0.0_f64;
    for k in 0..p {
        let mut norm = 0.0;
        for r in k..m {
            norm += a[(r, k)] * a[(r, k)];
        }
        let norm = sqrt(norm);
        scale = scale.max(norm);
        if norm == 0.0 {
            return None;
        }
        let alpha = if a[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|r| a[(r, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 > 0.0 {
            for c in k..p {
                let dot: f64 = (k..m).map(|r| v[r - k] * a[(r, c)]).sum();
                let f = 2.0 * dot / vnorm2;
                for r in k..m {
                    a[(r, c)] -= f * v[r - k];
                }
            }
            let dot: f64 = (k..m).map(|r| v[r - k] * b[r]).sum();
            let f = 2.0 * dot / vnorm2;
            for r in k..m {
                b[r] -= f * v[r - k];
            }
        }
    }
    for k in 0..p {
        if fabs(a[(k, k)]) <= 1e-13 * scale {
            return None;
        }
    }
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = b[i];
        for c in i + 1..p {
            s -= a[(i, c)] * beta[c];
        }
        beta[i] = s / a[(i, i)];
    }
    Some(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        let a = Matrix::from_fn(3, 3, |i, j| [[4.0, 2.0, 0.6], [2.0, 5.0, 1.0], [0.6, 1.0, 3.0]][i][j]);
        let x = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x);
        let got = cholesky_solve(&a, &b).unwrap();
        for (g, e) in got.iter().zip(x) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_singular() {
        let a = Matrix::from_fn(2, 2, |_, _| 1.0);
        assert!(cholesky_solve(&a, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn jacobi_eigenvalues_of_diagonalizable() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let a = Matrix::from_fn(2, 2, |i, j| if i == j { 2.0 } else { 1.0 });
        let ev = symmetric_eigenvalues(&a);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        assert!((condition_number(&a) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn qr_matches_exact_fit() {
        let x = Matrix::from_fn(5, 2, |r, c| if c == 0 { 1.0 } else { r as f64 });
        let y: Vec<f64> = (0..5).map(|r| 2.0 + 3.0 * r as f64).collect();
        let beta = lstsq(&x, &y, 0.0).unwrap();
        assert!((beta[0] - 2.0).abs() < 1e-12 && (beta[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn qr_rank_deficient_without_ridge() {
        let x = Matrix::from_fn(4, 2, |_, _| 1.0);
        assert!(lstsq(&x, &[1.0; 4], 0.0).is_none());
        assert!(lstsq(&x, &[1.0; 4], 1e-8).is_some());
    }
}
