//! Dense linear algebra: row-major matrices, pivoted LU, Householder least
//! squares. Sizes in this crate stay in the low thousands, where a dense
//! factorization is simpler and faster than anything sparse.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// LU factorization with partial pivoting.
    pub fn lu(self) -> Result<Lu<T>> {
        Lu::factor(self)
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        Ok(self.clone().lu()?.solve(b))
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
}

const PARALLEL_THRESHOLD: usize = 192;

impl<T: Real> Lu<T> {
    fn factor(mut a: Matrix<T>) -> Result<Self> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() {
            return Err(Error::Singular);
        }
        let tiny = scale * T::epsilon() * T::c(1e-3);
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].abs();
            for i in k + 1..n {
                let v = a[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(Error::Singular);
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
            }
            let (head, tail) = a.data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            let pivot = pivot_row[k];
            let update = |row: &mut [T]| {
                let f = row[k] / pivot;
                row[k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        row[j] -= f * pivot_row[j];
                    }
                }
            };
            if n - k > PARALLEL_THRESHOLD {
                tail.par_chunks_mut(n).for_each(update);
            } else {
                tail.chunks_mut(n).for_each(update);
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = y[i];
            for j in 0..i {
                s -= row[j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = y[i];
            for j in i + 1..n {
                s -= row[j] * y[j];
            }
            y[i] = s / row[i];
        }
        y
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = b, Lᵀ w = z, x = Pᵀ w.
        let mut z = b.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[(j, i)] * z[j];
            }
            z[i] = s / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)] * z[j];
            }
            z[i] = s;
        }
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    /// Estimate of the smallest singular value by inverse power iteration
    /// on `AᵀA`, together with the corresponding right singular vector.
    pub fn smallest_singular(&self, iterations: usize) -> (T, Vec<T>) {
        let n = self.dim();
        let mut v: Vec<T> = (0..n).map(|i| T::one() + T::c(0.37) * T::c(((i * 7919) % 101) as f64 / 101.0)).collect();
        normalize(&mut v);
        let mut sigma = T::zero();
        for _ in 0..iterations.max(1) {
            let w = self.solve_transpose(&v);
            let mut z = self.solve(&w);
            let nz = norm2(&z);
            if nz == T::zero() || !nz.is_finite() {
                return (T::zero(), v);
            }
            sigma = (T::one() / nz).sqrt();
            for zi in &mut z {
                *zi = *zi / nz;
            }
            v = z;
        }
        (sigma, v)
    }
}

pub fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
}

pub fn norm_inf<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

fn normalize<T: Real>(v: &mut [T]) {
    let n = norm2(v);
    if n > T::zero() {
        for x in v {
            *x = *x / n;
        }
    }
}

/// Linear least squares `min |A c - b|` via Householder QR with column
/// equilibration.
#[derive(Clone, Debug)]
pub struct LeastSquares<T> {
    pub coefficients: Vec<T>,
    pub residual_norm: T,
    /// Diagonal of `(AᵀA)⁻¹`, used for standard errors.
    pub covariance_diag: Vec<T>,
    /// `‖R‖_F ‖R⁻¹‖_F` of the equilibrated system.
    pub condition: T,
}

pub fn least_squares<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<LeastSquares<T>> {
    let m = a.rows();
    let n = a.cols();
    if m < n {
        return Err(Error::InvalidInput(format!("least squares needs rows >= cols ({m} < {n})")));
    }
    let scales: Vec<T> = (0..n)
        .map(|j| {
            let s = (0..m).fold(T::zero(), |s, i| s + a[(i, j)] * a[(i, j)]).sqrt();
            if s > T::zero() { s } else { T::one() }
        })
        .collect();
    let mut r = Matrix::from_fn(m, n, |i, j| a[(i, j)] / scales[j]);
    let mut rhs = b.to_vec();
    for k in 0..n {
        let alpha_sq = (k..m).fold(T::zero(), |s, i| s + r[(i, k)] * r[(i, k)]);
        let mut alpha = alpha_sq.sqrt();
        if alpha == T::zero() {
            return Err(Error::Singular);
        }
        if r[(k, k)] > T::zero() {
            alpha = -alpha;
        }
        let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm_sq = dot(&v, &v);
        if vnorm_sq == T::zero() {
            continue;
        }
        for j in k..n {
            let s = (k..m).fold(T::zero(), |s, i| s + v[i - k] * r[(i, j)]);
            let f = (s + s) / vnorm_sq;
            for i in k..m {
                r[(i, j)] -= f * v[i - k];
            }
        }
        let s = (k..m).fold(T::zero(), |s, i| s + v[i - k] * rhs[i]);
        let f = (s + s) / vnorm_sq;
        for i in k..m {
            rhs[i] -= f * v[i - k];
        }
    }
    // back substitution on the leading n x n block
    let mut c = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..n {
            s -= r[(i, j)] * c[j];
        }
        if r[(i, i)] == T::zero() {
            return Err(Error::Singular);
        }
        c[i] = s / r[(i, i)];
    }
    let residual_norm = rhs[n..].iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    // R⁻¹ for covariance and conditioning
    let mut rinv = Matrix::zeros(n, n);
    for col in 0..n {
        for i in (0..n).rev() {
            let mut s = if i == col { T::one() } else { T::zero() };
            for j in i + 1..n {
                s -= r[(i, j)] * rinv[(j, col)];
            }
            rinv[(i, col)] = s / r[(i, i)];
        }
    }
    let mut covariance_diag = vec![T::zero(); n];
    for (i, cd) in covariance_diag.iter_mut().enumerate() {
        let row_sq = (0..n).fold(T::zero(), |s, j| s + rinv[(i, j)] * rinv[(i, j)]);
        *cd = row_sq / (scales[i] * scales[i]);
    }
    let rf = (0..n).fold(T::zero(), |s, i| (i..n).fold(s, |s, j| s + r[(i, j)] * r[(i, j)])).sqrt();
    let rif = rinv.data.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    let coefficients = c.iter().zip(&scales).map(|(&ci, &s)| ci / s).collect();
    Ok(LeastSquares { coefficients, residual_norm, covariance_diag, condition: rf * rif })
}

/// Solve a small dense system in place (Gaussian elimination), for Newton
/// steps on 2x2 / 3x3 problems.
pub fn solve_small<T: Real, const N: usize>(mut a: [[T; N]; N], mut b: [T; N]) -> Option<[T; N]> {
    for k in 0..N {
        let p = (k..N).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())?;
        if a[p][k] == T::zero() {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..N {
            let f = a[i][k] / a[k][k];
            for j in k..N {
                let akj = a[k][j];
                a[i][j] -= f * akj;
            }
            let bk = b[k];
            b[i] -= f * bk;
        }
    }
    let mut x = [T::zero(); N];
    for i in (0..N).rev() {
        let mut s = b[i];
        for j in i + 1..N {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}
