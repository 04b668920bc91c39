//! Spectral building blocks: periodic Fourier collocation, Chebyshev
//! collocation on an interval, and Gauss–Legendre quadrature.

use crate::linalg::Matrix;
use crate::scalar::Real;

/// Equispaced nodes `t_j = 2πj/n` on one period.
pub fn periodic_nodes<T: Real>(n: usize) -> Vec<T> {
    (0..n).map(|j| T::TAU() * T::n(j) / T::n(n)).collect()
}

/// Real Fourier coefficients `(a_k, b_k)`, `k = 0..=n/2`, of equispaced
/// samples so that `f(t) = Σ a_k cos kt + b_k sin kt`.
pub fn real_dft<T: Real>(values: &[T]) -> (Vec<T>, Vec<T>) {
    let n = values.len();
    let m = n / 2;
    let mut a = vec![T::zero(); m + 1];
    let mut b = vec![T::zero(); m + 1];
    let nn = T::n(n);
    let table: Vec<(T, T)> = (0..n).map(|j| (T::TAU() * T::n(j) / nn).sin_cos()).collect();
    for k in 0..=m {
        let mut sa = T::zero();
        let mut sb = T::zero();
        for (j, &v) in values.iter().enumerate() {
            let (sn, cs) = table[(k * j) % n];
            sa += v * cs;
            sb += v * sn;
        }
        let two = T::c(2.0);
        if k == 0 || (n.is_multiple_of(2) && k == m) {
            a[k] = sa / nn;
            b[k] = T::zero();
        } else {
            a[k] = two * sa / nn;
            b[k] = two * sb / nn;
        }
    }
    (a, b)
}

/// Evaluates a real trigonometric series (coefficients as from
/// [`real_dft`]) and its first `D` derivatives at `t`.
pub fn trig_eval<T: Real, const D: usize>(a: &[T], b: &[T], t: T) -> [T; D] {
    let mut out = [T::zero(); D];
    for k in 0..a.len() {
        let kk = T::n(k);
        let (s, c) = (kk * t).sin_cos();
        // derivative cycle of cos/sin
        let mut ck = T::one();
        for (d, o) in out.iter_mut().enumerate() {
            let (dc, ds) = match d % 4 {
                0 => (c, s),
                1 => (-s, c),
                2 => (-c, -s),
                _ => (s, -c),
            };
            *o += ck * (a[k] * dc + b[k] * ds);
            ck *= kk;
        }
    }
    out
}

/// Trigonometric interpolation of equispaced samples at arbitrary `t`.
pub fn trig_interp<T: Real>(values: &[T], t: T) -> T {
    let (a, b) = real_dft(values);
    trig_eval::<T, 1>(&a, &b, t)[0]
}

/// Spectral derivative of periodic samples over a period of length `period`.
pub fn periodic_derivative<T: Real>(values: &[T], order: u32, period: T) -> Vec<T> {
    let n = values.len();
    let (a, b) = real_dft(values);
    let m = n / 2;
    let scale = T::TAU() / period;
    let nodes = periodic_nodes::<T>(n);
    nodes
        .iter()
        .map(|&t| {
            let mut s = T::zero();
            for k in 1..a.len() {
                if n.is_multiple_of(2) && k == m && order % 2 == 1 {
                    continue;
                }
                let kk = T::n(k);
                let (sn, cs) = (kk * t).sin_cos();
                let (dc, ds) = match order % 4 {
                    0 => (cs, sn),
                    1 => (-sn, cs),
                    2 => (-cs, -sn),
                    _ => (sn, -cs),
                };
                s += (kk * scale).powi(order as i32) * (a[k] * dc + b[k] * ds);
            }
            if order == 0 {
                s += a[0];
            }
            s
        })
        .collect()
}

/// First and second periodic differentiation matrices for an even number
/// of equispaced nodes on a period of length `period`.
pub fn periodic_diff_matrices<T: Real>(n: usize, period: T) -> (Matrix<T>, Matrix<T>) {
    assert!(n.is_multiple_of(2) && n >= 4, "periodic grid needs an even node count");
    let h = T::TAU() / T::n(n);
    let half = T::c(0.5);
    let scale = T::TAU() / period;
    let d1 = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            return T::zero();
        }
        let k = i as i64 - j as i64;
        let sign = if k.rem_euclid(2) == 0 { T::one() } else { -T::one() };
        let arg = T::c(k as f64) * h * half;
        sign * half / arg.tan() * scale
    });
    let d2 = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            return (-(T::PI() * T::PI()) / (T::c(3.0) * h * h) - T::c(1.0 / 6.0)) * scale * scale;
        }
        let k = i as i64 - j as i64;
        let sign = if k.rem_euclid(2) == 0 { T::one() } else { -T::one() };
        let sarg = (T::c(k as f64) * h * half).sin();
        -half * sign / (sarg * sarg) * scale * scale
    });
    (d1, d2)
}

/// Chebyshev–Gauss–Lobatto nodes mapped to `[lo, hi]`, increasing.
pub fn chebyshev_nodes<T: Real>(n: usize, lo: T, hi: T) -> Vec<T> {
    assert!(n >= 1);
    let half = T::c(0.5);
    (0..=n)
        .map(|j| {
            let c = -(T::PI() * T::n(j) / T::n(n)).cos();
            lo + (hi - lo) * half * (c + T::one())
        })
        .collect()
}

/// Chebyshev differentiation matrix on the increasing nodes of
/// [`chebyshev_nodes`].
pub fn chebyshev_diff_matrix<T: Real>(n: usize, lo: T, hi: T) -> Matrix<T> {
    let x: Vec<T> = chebyshev_nodes(n, -T::one(), T::one());
    let cw = |j: usize| {
        let e = if j == 0 || j == n { T::c(2.0) } else { T::one() };
        if j.is_multiple_of(2) { e } else { -e }
    };
    let mut d = Matrix::from_fn(n + 1, n + 1, |i, j| {
        if i == j {
            T::zero()
        } else {
            cw(i) / cw(j) / (x[i] - x[j])
        }
    });
    // negative-sum trick for the diagonal
    for i in 0..=n {
        let s = (0..=n).filter(|&j| j != i).fold(T::zero(), |s, j| s + d[(i, j)]);
        d[(i, i)] = -s;
    }
    let scale = T::c(2.0) / (hi - lo);
    for i in 0..=n {
        for j in 0..=n {
            d[(i, j)] *= scale;
        }
    }
    d
}

/// Barycentric interpolation on Chebyshev–Gauss–Lobatto nodes.
pub fn chebyshev_interp<T: Real>(nodes: &[T], values: &[T], x: T) -> T {
    let n = nodes.len() - 1;
    let mut num = T::zero();
    let mut den = T::zero();
    for j in 0..=n {
        let d = x - nodes[j];
        if d == T::zero() {
            return values[j];
        }
        let mut w = if j % 2 == 0 { T::one() } else { -T::one() };
        if j == 0 || j == n {
            w *= T::c(0.5);
        }
        let q = w / d;
        num += q * values[j];
        den += q;
    }
    num / den
}

/// Chebyshev coefficients of the interpolant through values on the nodes
/// of [`chebyshev_nodes`].
pub fn chebyshev_coefficients<T: Real>(values: &[T]) -> Vec<T> {
    let n = values.len() - 1;
    let nn = T::n(n);
    let table: Vec<T> = (0..2 * n).map(|k| (T::PI() * T::n(k) / nn).cos()).collect();
    let mut c = vec![T::zero(); n + 1];
    for (m, cm) in c.iter_mut().enumerate() {
        let mut acc = T::zero();
        for (k, &f) in values.iter().enumerate() {
            let w = if k == 0 || k == n { T::c(0.5) } else { T::one() };
            acc += w * f * table[(m * (n - k)) % (2 * n)];
        }
        let scale = if m == 0 || m == n { T::one() / nn } else { T::c(2.0) / nn };
        *cm = acc * scale;
    }
    c
}

/// Values of `T_m(t)`, `T_m'(t)`, `T_m''(t)` for `m = 0..len`.
pub fn chebyshev_basis<T: Real>(len: usize, t: T) -> [Vec<T>; 3] {
    let mut b = [vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len]];
    if len == 0 {
        return b;
    }
    b[0][0] = T::one();
    if len > 1 {
        b[0][1] = t;
        b[1][1] = T::one();
    }
    let two = T::c(2.0);
    for m in 1..len.saturating_sub(1) {
        b[0][m + 1] = two * t * b[0][m] - b[0][m - 1];
        b[1][m + 1] = two * b[0][m] + two * t * b[1][m] - b[1][m - 1];
        b[2][m + 1] = T::c(4.0) * b[1][m] + two * t * b[2][m] - b[2][m - 1];
    }
    b
}

/// Value and first two derivatives of a Chebyshev series on `[lo, hi]`.
pub fn chebyshev_eval<T: Real>(c: &[T], lo: T, hi: T, x: T) -> [T; 3] {
    let s = T::c(2.0) / (hi - lo);
    let t = (x - lo) * s - T::one();
    let b = chebyshev_basis(c.len(), t);
    let mut out = [T::zero(); 3];
    for (m, &cm) in c.iter().enumerate() {
        out[0] += cm * b[0][m];
        out[1] += cm * b[1][m];
        out[2] += cm * b[2][m];
    }
    [out[0], out[1] * s, out[2] * s * s]
}

/// Antiderivative of a Chebyshev series on `[lo, hi]`, vanishing at `lo`.
pub fn chebyshev_integral<T: Real>(c: &[T], lo: T, hi: T) -> Vec<T> {
    let n = c.len();
    let half_width = (hi - lo) * T::c(0.5);
    let get = |k: usize| if k < n { c[k] } else { T::zero() };
    let mut out = vec![T::zero(); n + 1];
    for k in 1..=n {
        let km1 = if k == 1 { T::c(2.0) * get(0) } else { get(k - 1) };
        out[k] = (km1 - get(k + 1)) / (T::c(2.0) * T::n(k)) * half_width;
    }
    // fix the constant so the value at t = -1 vanishes
    let mut at_lo = T::zero();
    for (k, &ck) in out.iter().enumerate().skip(1) {
        at_lo += if k % 2 == 0 { ck } else { -ck };
    }
    out[0] = -at_lo;
    out
}

/// Tensor Chebyshev (in `p` on `[lo, hi]`) × Fourier (in `q`, period
/// `period`) interpolant with second-order jets.
#[derive(Clone, Debug)]
pub struct ChebFourier<T> {
    pub lo: T,
    pub hi: T,
    pub period: T,
    /// For each Chebyshev index, Fourier coefficients `(a_k, b_k)`.
    coef: Vec<(Vec<T>, Vec<T>)>,
}

/// Chebyshev series in `p` along a fixed `q`, with `q`-derivatives.
#[derive(Clone, Debug)]
pub struct ChebLine<T> {
    lo: T,
    hi: T,
    c: [Vec<T>; 3],
}

impl<T: Real> ChebFourier<T> {
    /// `values[i][j]` on Chebyshev node `i` and periodic node `j`.
    pub fn from_grid(values: &[Vec<T>], lo: T, hi: T, period: T) -> Self {
        let np = values.len();
        let nq = values[0].len();
        let mut cheb = vec![vec![T::zero(); nq]; np];
        for j in 0..nq {
            let col: Vec<T> = values.iter().map(|r| r[j]).collect();
            for (i, c) in chebyshev_coefficients(&col).into_iter().enumerate() {
                cheb[i][j] = c;
            }
        }
        let coef = cheb.iter().map(|row| real_dft(row)).collect();
        Self { lo, hi, period, coef }
    }

    pub fn line(&self, q: T) -> ChebLine<T> {
        let w = T::TAU() / self.period;
        let t = q * w;
        let mut c = [Vec::with_capacity(self.coef.len()), Vec::with_capacity(self.coef.len()), Vec::with_capacity(self.coef.len())];
        for (a, b) in &self.coef {
            let d = trig_eval::<T, 3>(a, b, t);
            c[0].push(d[0]);
            c[1].push(d[1] * w);
            c[2].push(d[2] * w * w);
        }
        ChebLine { lo: self.lo, hi: self.hi, c }
    }

    /// `(f, f_p, f_q, f_pp, f_pq, f_qq)` at `(p, q)`.
    pub fn eval(&self, p: T, q: T) -> [T; 6] {
        self.line(q).eval(p)
    }
}

impl<T: Real> ChebLine<T> {
    /// `(f, f_p, f_q, f_pp, f_pq, f_qq)` at `p`.
    pub fn eval(&self, p: T) -> [T; 6] {
        let s = T::c(2.0) / (self.hi - self.lo);
        let b = chebyshev_basis(self.c[0].len(), (p - self.lo) * s - T::one());
        let mut o = [T::zero(); 6];
        for m in 0..self.c[0].len() {
            o[0] += self.c[0][m] * b[0][m];
            o[1] += self.c[0][m] * b[1][m];
            o[2] += self.c[1][m] * b[0][m];
            o[3] += self.c[0][m] * b[2][m];
            o[4] += self.c[1][m] * b[1][m];
            o[5] += self.c[2][m] * b[0][m];
        }
        [o[0], o[1] * s, o[2], o[3] * s * s, o[4] * s, o[5]]
    }
}

/// Clenshaw–Curtis weights for the nodes of [`chebyshev_nodes`].
pub fn clenshaw_curtis_weights<T: Real>(n: usize, lo: T, hi: T) -> Vec<T> {
    let theta: Vec<T> = (0..=n).map(|j| T::PI() * T::n(j) / T::n(n)).collect();
    let mut w = vec![T::zero(); n + 1];
    let nn = T::n(n);
    for (j, wj) in w.iter_mut().enumerate() {
        let mut v = T::one();
        let kmax = n / 2;
        for k in 1..=kmax {
            let b = if 2 * k == n { T::one() } else { T::c(2.0) };
            let kk = T::n(k);
            v -= b * (T::c(2.0) * kk * theta[j]).cos() / (T::c(4.0) * kk * kk - T::one());
        }
        let c = if j == 0 || j == n { T::one() } else { T::c(2.0) };
        *wj = c * v / nn * (hi - lo) * T::c(0.5);
    }
    w
}

/// Gauss–Legendre nodes and weights on `[lo, hi]`.
pub fn gauss_legendre<T: Real>(n: usize, lo: T, hi: T) -> (Vec<T>, Vec<T>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Newton iteration in f64 from the standard cosine guess
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0_f64, 0.0_f64);
            for k in 1..=n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p2) / k as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes.push(T::c(-z));
        weights.push(T::c(w));
    }
    let half = T::c(0.5);
    let nodes = nodes.iter().map(|&z| lo + (hi - lo) * half * (z + T::one())).collect();
    let weights = weights.iter().map(|&w| w * (hi - lo) * half).collect();
    (nodes, weights)
}

/// Adaptive Gauss–Kronrod-free quadrature: recursive Simpson bisection with
/// Richardson correction, to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_series_tools() {
        let nodes = chebyshev_nodes::<f64>(20, 0.0, 2.0);
        let vals: Vec<f64> = nodes.iter().map(|x| (1.5 * x).sin()).collect();
        let c = chebyshev_coefficients(&vals);
        let [f, d1, d2] = chebyshev_eval(&c, 0.0, 2.0, 0.7);
        assert!((f - (1.05f64).sin()).abs() < 1e-13);
        assert!((d1 - 1.5 * (1.05f64).cos()).abs() < 1e-12);
        assert!((d2 + 2.25 * (1.05f64).sin()).abs() < 1e-10);
        let ci = chebyshev_integral(&c, 0.0, 2.0);
        let [g, _, _] = chebyshev_eval(&ci, 0.0, 2.0, 1.3);
        assert!((g - (1.0 - (1.95f64).cos()) / 1.5).abs() < 1e-13);
    }

    #[test]
    fn tensor_field_jets() {
        let (lo, hi, per) = (0.0, 0.5, 3.0);
        let xs = chebyshev_nodes::<f64>(16, lo, hi);
        let w = std::f64::consts::TAU / per;
        let f = |p: f64, q: f64| (p * p + 1.0) * (w * q).cos() + p.exp() * (2.0 * w * q).sin();
        let grid: Vec<Vec<f64>> = xs.iter().map(|&p| (0..12).map(|j| f(p, per * j as f64 / 12.0)).collect()).collect();
        let cf = ChebFourier::from_grid(&grid, lo, hi, per);
        let (p, q) = (0.31, 1.7);
        let e = cf.eval(p, q);
        let h = 1e-4;
        let fd_pq = (f(p + h, q + h) - f(p + h, q - h) - f(p - h, q + h) + f(p - h, q - h)) / (4.0 * h * h);
        assert!((e[0] - f(p, q)).abs() < 1e-13);
        assert!((e[4] - fd_pq).abs() < 1e-6);
        let fd_qq = (f(p, q + h) - 2.0 * f(p, q) + f(p, q - h)) / (h * h);
        assert!((e[5] - fd_qq).abs() < 1e-5);
    }

    #[test]
    fn dft_roundtrip_and_derivative() {
        let n = 16;
        let t: Vec<f64> = periodic_nodes(n);
        let f: Vec<f64> = t.iter().map(|&t| 1.0 + 2.0 * (3.0 * t).cos() - 0.5 * t.sin()).collect();
        let (a, b) = real_dft(&f);
        assert!((a[0] - 1.0).abs() < 1e-14 && (a[3] - 2.0).abs() < 1e-14 && (b[1] + 0.5).abs() < 1e-14);
        let d = periodic_derivative(&f, 1, std::f64::consts::TAU);
        for (j, &tj) in t.iter().enumerate() {
            let exact = -6.0 * (3.0 * tj).sin() - 0.5 * tj.cos();
            assert!((d[j] - exact).abs() < 1e-12);
        }
        let v = trig_interp(&f, 0.3);
        assert!((v - (1.0 + 2.0 * 0.9f64.cos() - 0.5 * 0.3f64.sin())).abs() < 1e-13);
    }

    #[test]
    fn periodic_matrices_match_series() {
        let n = 24;
        let period = 5.0;
        let t: Vec<f64> = periodic_nodes::<f64>(n).iter().map(|t| t * period / std::f64::consts::TAU).collect();
        let w = std::f64::consts::TAU / period;
        let f: Vec<f64> = t.iter().map(|&t| (2.0 * w * t).sin()).collect();
        let (d1, d2) = periodic_diff_matrices(n, period);
        let f1 = d1.mul_vec(&f);
        let f2 = d2.mul_vec(&f);
        for j in 0..n {
            assert!((f1[j] - 2.0 * w * (2.0 * w * t[j]).cos()).abs() < 1e-11);
            assert!((f2[j] + 4.0 * w * w * (2.0 * w * t[j]).sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn chebyshev_differentiates_polynomials_exactly() {
        let n = 8;
        let x = chebyshev_nodes::<f64>(n, 0.0, 2.0);
        let d = chebyshev_diff_matrix::<f64>(n, 0.0, 2.0);
        let f: Vec<f64> = x.iter().map(|x| x.powi(5) - x).collect();
        let df = d.mul_vec(&f);
        for j in 0..=n {
            assert!((df[j] - (5.0 * x[j].powi(4) - 1.0)).abs() < 1e-10);
        }
        assert!((chebyshev_interp(&x, &f, 0.7) - (0.7f64.powi(5) - 0.7)).abs() < 1e-12);
        let w = clenshaw_curtis_weights::<f64>(n, 0.0, 2.0);
        let integral: f64 = w.iter().zip(&x).map(|(w, x)| w * x.powi(4)).sum();
        assert!((integral - 32.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_degree_2n_minus_1() {
        let (x, w) = gauss_legendre::<f64>(6, -1.0, 3.0);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(11)).sum();
        let exact = (3f64.powi(12) - 1.0) / 12.0;
        assert!((integral - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn simpson_integrates_smooth_function() {
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-12);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-11);
    }
}
