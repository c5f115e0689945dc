//! Small dense linear algebra: a row-major matrix, a Cholesky solver for the
//! regularized normal equations, and a one-sided Jacobi SVD for numerical rank
//! and minimum-norm solutions.
//!
//! Sizes here are tiny (the Hankel systems are at most `N_s x N_s`), so the
//! routines favour accuracy and simplicity over blocking.

use std::ops::{Index, IndexMut};

use crate::error::{mismatch, Error, Result};
use crate::Real;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors, which must all have the same length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(mismatch("ragged rows"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(mismatch(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == T::zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(mismatch(format!(
                "matvec {}x{} by vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), x)).collect())
    }

    /// `A^T A`.
    pub fn gram(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut acc = T::zero();
                for r in 0..self.rows {
                    acc += self[(r, i)] * self[(r, j)];
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc;
            }
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn max_abs_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()))
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky
/// factorization `A = L L^T`.
pub fn cholesky_solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(mismatch(format!(
            "cholesky_solve needs square A and matching b, got {}x{} and {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if diag.is_nan() || diag <= T::zero() {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    // forward: L y = b
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    // backward: L^T x = y
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

/// Thin singular value decomposition `A = U diag(s) V^T` with singular values
/// sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// `m x p` left singular vectors, `p = min(m, n)`.
    pub u: Matrix<T>,
    pub singular_values: Vec<T>,
    /// `n x p` right singular vectors.
    pub v: Matrix<T>,
}

const MAX_SWEEPS: usize = 80;

impl<T: Real> Svd<T> {
    /// One-sided (Hestenes) Jacobi SVD. Accurate to working precision in the
    /// small singular values, which matters for the rank decision.
    pub fn new(a: &Matrix<T>) -> Self {
        if a.rows() < a.cols() {
            let t = Self::new(&a.transpose());
            return Self {
                u: t.v,
                singular_values: t.singular_values,
                v: t.u,
            };
        }
        let (m, n) = (a.rows(), a.cols());
        // Columns of `w` converge to U * diag(s).
        let mut w = a.clone();
        let mut v = Matrix::<T>::identity(n);
        let tol = T::epsilon();

        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                    for r in 0..m {
                        let (x, y) = (w[(r, p)], w[(r, q)]);
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for r in 0..m {
                        let (x, y) = (w[(r, p)], w[(r, q)]);
                        w[(r, p)] = c * x - s * y;
                        w[(r, q)] = s * x + c * y;
                    }
                    for r in 0..n {
                        let (x, y) = (v[(r, p)], v[(r, q)]);
                        v[(r, p)] = c * x - s * y;
                        v[(r, q)] = s * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }

        let mut order: Vec<(usize, T)> = (0..n).map(|j| (j, norm2(&w.column(j)))).collect();
        order.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));

        let mut u = Matrix::zeros(m, n);
        let mut vs = Matrix::zeros(n, n);
        let mut singular_values = Vec::with_capacity(n);
        for (dst, &(src, sigma)) in order.iter().enumerate() {
            singular_values.push(sigma);
            for r in 0..m {
                u[(r, dst)] = if sigma > T::zero() {
                    w[(r, src)] / sigma
                } else {
                    T::zero()
                };
            }
            for r in 0..n {
                vs[(r, dst)] = v[(r, src)];
            }
        }
        Self {
            u,
            singular_values,
            v: vs,
        }
    }

    pub fn max_singular_value(&self) -> T {
        self.singular_values.first().copied().unwrap_or(T::zero())
    }

    /// Number of singular values strictly above `threshold`.
    pub fn rank(&self, threshold: T) -> usize {
        self.singular_values
            .iter()
            .filter(|&&s| s > threshold)
            .count()
    }

    /// Minimum-norm least-squares solution of `A x = b`, truncating singular
    /// values at or below `threshold`.
    pub fn solve_min_norm(&self, b: &[T], threshold: T) -> Result<Vec<T>> {
        if b.len() != self.u.rows() {
            return Err(mismatch(format!(
                "rhs length {} for {} rows",
                b.len(),
                self.u.rows()
            )));
        }
        let n = self.v.rows();
        let mut x = vec![T::zero(); n];
        for (j, &sigma) in self.singular_values.iter().enumerate() {
            if sigma <= threshold {
                continue;
            }
            let coef = dot(&self.u.column(j), b) / sigma;
            for (r, xr) in x.iter_mut().enumerate() {
                *xr += coef * self.v[(r, j)];
            }
        }
        Ok(x)
    }
}
