//! Boundary expansion `u ~ u₂x² + u₃x³ + …` of collar graphs: the forced
//! coefficient `u₂ = κ/2`, the formal recursion for `u₄, u₅, …` from the
//! Cauchy data `(γ, u₃)`, and extraction of `u₃` from numerical solutions.

use std::ops::{Add, Mul, Neg, Sub};

use crate::curves::LoopSamples;
use crate::error::{Error, Result};
use crate::scalar::{Real, Ring};
use crate::solver::operator::{mse, Local};
use crate::spectral::periodic_derivative;

/// Deepest order the series arithmetic supports.
pub const MAX_ORDER: usize = 24;

/// Truncated power series in `x` whose coefficients are sampled functions
/// of `s`. Coefficient vectors of length one broadcast over the samples.
#[derive(Clone, Debug)]
pub struct SampledSeries<T> {
    c: Vec<Vec<T>>,
    /// Polynomials (constants) are exact and never truncate a product.
    exact: bool,
}

fn bin<T: Real>(a: &[T], b: &[T], f: impl Fn(T, T) -> T) -> Vec<T> {
    match (a.len(), b.len()) {
        (1, _) => b.iter().map(|&y| f(a[0], y)).collect(),
        (_, 1) => a.iter().map(|&x| f(x, b[0])).collect(),
        _ => a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl<T: Real> SampledSeries<T> {
    pub fn new(c: Vec<Vec<T>>) -> Self {
        Self { c, exact: false }
    }

    pub fn coeff(&self, k: usize) -> Option<&[T]> {
        self.c.get(k).map(|v| v.as_slice())
    }

    fn truncated_len(a: &Self, b: &Self) -> Option<usize> {
        match (a.exact, b.exact) {
            (true, true) => None,
            (true, false) => Some(b.c.len()),
            (false, true) => Some(a.c.len()),
            (false, false) => Some(a.c.len().min(b.c.len())),
        }
    }

    fn zip(self, o: Self, f: impl Fn(T, T) -> T) -> Self {
        let len = Self::truncated_len(&self, &o).unwrap_or(self.c.len().max(o.c.len()));
        let zero = vec![T::zero()];
        let c = (0..len)
            .map(|k| bin(self.c.get(k).unwrap_or(&zero), o.c.get(k).unwrap_or(&zero), &f))
            .collect();
        Self { c, exact: self.exact && o.exact }
    }
}

impl<T: Real> Add for SampledSeries<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.zip(o, |a, b| a + b)
    }
}

impl<T: Real> Sub for SampledSeries<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.zip(o, |a, b| a - b)
    }
}

impl<T: Real> Neg for SampledSeries<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { c: self.c.into_iter().map(|v| v.into_iter().map(|x| -x).collect()).collect(), exact: self.exact }
    }
}

impl<T: Real> Mul for SampledSeries<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let len = Self::truncated_len(&self, &o).unwrap_or(self.c.len() + o.c.len() - 1);
        let mut c: Vec<Vec<T>> = vec![vec![T::zero()]; len];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                let p = bin(a, b, |x, y| x * y);
                c[i + j] = bin(&c[i + j], &p, |x, y| x + y);
            }
        }
        Self { c, exact: self.exact && o.exact }
    }
}

impl<T: Real> Ring<T> for SampledSeries<T> {
    fn constant(v: T) -> Self {
        Self { c: vec![vec![v]], exact: true }
    }

    fn scale(&self, k: T) -> Self {
        Self { c: self.c.iter().map(|v| v.iter().map(|&x| x * k).collect()).collect(), exact: self.exact }
    }
}

/// Sampled expansion coefficients of one loop: `coeffs[k]` holds `u_k(s_j)`.
#[derive(Clone, Debug)]
pub struct ExpansionCoefficients<T> {
    pub length: T,
    pub s: Vec<T>,
    pub kappa: Vec<T>,
    pub kappa_s: Vec<T>,
    pub coeffs: Vec<Vec<T>>,
}

/// `u₂ = κ/2` on the sample grid.
pub fn forced_u2<T: Real>(samples: &LoopSamples<T>) -> Vec<T> {
    samples.kappa.iter().map(|&k| k * T::c(0.5)).collect()
}

/// Differentiated series data of `u = Σ u_k x^k` entering `ℱ`.
fn local_series<T: Real>(
    coeffs: &[Vec<T>],
    kappa: &[T],
    kappa_s: &[T],
    length: T,
    len: usize,
) -> Local<SampledSeries<T>> {
    let ns = kappa.len();
    let zero = vec![T::zero(); ns];
    let get = |k: usize| coeffs.get(k).cloned().unwrap_or_else(|| zero.clone());
    let u: Vec<Vec<T>> = (0..len).map(get).collect();
    let ds = |v: &Vec<T>, o: u32| periodic_derivative(v, o, length);
    let u_s: Vec<Vec<T>> = u.iter().map(|v| ds(v, 1)).collect();
    let u_ss: Vec<Vec<T>> = u.iter().map(|v| ds(v, 2)).collect();
    let shift = |src: &[Vec<T>], p: usize| -> Vec<Vec<T>> {
        // coefficient k of x^{-p} d^p/dx^p style shifts: k u_k x^{k-1} etc.
        (0..len)
            .map(|k| {
                let idx = k + p;
                src.get(idx).map(|v| v.iter().map(|&a| a * T::n(idx)).collect()).unwrap_or_else(|| zero.clone())
            })
            .collect()
    };
    let u_x = shift(&u, 1);
    let u_sx = shift(&u_s, 1);
    let u_xx: Vec<Vec<T>> = (0..len)
        .map(|k| {
            let idx = k + 2;
            u.get(idx).map(|v| v.iter().map(|&a| a * T::n(idx * (idx - 1))).collect()).unwrap_or_else(|| zero.clone())
        })
        .collect();
    let ux_over_x = shift(&u, 2);
    Local {
        kappa: SampledSeries { c: vec![kappa.to_vec()], exact: true },
        kappa_s: SampledSeries { c: vec![kappa_s.to_vec()], exact: true },
        u: SampledSeries::new(u),
        u_s: SampledSeries::new(u_s),
        u_x: SampledSeries::new(u_x),
        u_ss: SampledSeries::new(u_ss),
        u_sx: SampledSeries::new(u_sx),
        u_xx: SampledSeries::new(u_xx),
        ux_over_x: SampledSeries::new(ux_over_x),
    }
}

fn series_coeff<T: Real>(coeffs: &[Vec<T>], kappa: &[T], kappa_s: &[T], length: T, len: usize, m: usize) -> Vec<T> {
    let f = mse(&local_series(coeffs, kappa, kappa_s, length, len));
    let ns = kappa.len();
    match f.coeff(m) {
        Some(v) if v.len() == ns => v.to_vec(),
        Some(v) => vec![v[0]; ns],
        None => vec![T::zero(); ns],
    }
}

/// Formal recursion: given `γ` (through its samples) and `u₃`, returns
/// `u₂, …, u_{K+1}` so that `ℱ(Σ u_k x^k) = O(x^K)`.
///
/// The coefficient of `x^{m-2}` in `ℱ` is affine in `u_m` with a factor
/// that vanishes for `m = 3`; the factor is measured numerically rather
/// than hard-coded.
pub fn formal_recursion<T: Real>(samples: &LoopSamples<T>, u3: &[T], order: usize) -> Result<ExpansionCoefficients<T>> {
    if order < 3 {
        return Err(Error::InvalidInput(format!("expansion order {order} < 3")));
    }
    if order + 1 > MAX_ORDER {
        return Err(Error::SeriesDepth { requested: order, depth: MAX_ORDER - 1 });
    }
    let ns = samples.kappa.len();
    if u3.len() != ns {
        return Err(Error::GridMismatch(format!("u3 has {} samples, curve grid has {ns}", u3.len())));
    }
    let kappa = samples.kappa.clone();
    let kappa_s = periodic_derivative(&kappa, 1, samples.length);
    let len = order + 2;
    let mut coeffs = vec![vec![T::zero(); ns]; order + 2];
    for m in (2..=order + 1).filter(|&m| m != 3) {
        if m == 4 {
            coeffs[3] = u3.to_vec();
        }
        coeffs[m] = vec![T::zero(); ns];
        let r0 = series_coeff(&coeffs, &kappa, &kappa_s, samples.length, len, m - 2);
        coeffs[m] = vec![T::one(); ns];
        let r1 = series_coeff(&coeffs, &kappa, &kappa_s, samples.length, len, m - 2);
        coeffs[m] = r0.iter().zip(&r1).map(|(&a, &b)| -a / (b - a)).collect();
    }
    if order == 3 {
        coeffs[3] = u3.to_vec();
    }
    Ok(ExpansionCoefficients { length: samples.length, s: samples.s.clone(), kappa, kappa_s, coeffs })
}

impl<T: Real> ExpansionCoefficients<T> {
    /// Highest power present.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Pointwise `ℱ` of the truncated series at sample `j` and height `x`.
    pub fn residual_at(&self, j: usize, x: T) -> T {
        let d1: Vec<Vec<T>> = self.coeffs.iter().map(|c| periodic_derivative(c, 1, self.length)).collect();
        let d2: Vec<Vec<T>> = self.coeffs.iter().map(|c| periodic_derivative(c, 2, self.length)).collect();
        self.residual_with(j, x, &d1, &d2)
    }

    fn residual_with(&self, j: usize, x: T, d1: &[Vec<T>], d2: &[Vec<T>]) -> T {
        let mut l = Local {
            kappa: self.kappa[j],
            kappa_s: self.kappa_s[j],
            u: T::zero(),
            u_s: T::zero(),
            u_x: T::zero(),
            u_ss: T::zero(),
            u_sx: T::zero(),
            u_xx: T::zero(),
            ux_over_x: T::zero(),
        };
        for (k, c) in self.coeffs.iter().enumerate() {
            let kk = T::n(k);
            let xk = x.powi(k as i32);
            l.u += c[j] * xk;
            l.u_s += d1[k][j] * xk;
            l.u_ss += d2[k][j] * xk;
            if k >= 1 {
                let xk1 = x.powi(k as i32 - 1);
                l.u_x += kk * c[j] * xk1;
                l.u_sx += kk * d1[k][j] * xk1;
            }
            if k >= 2 {
                let xk2 = x.powi(k as i32 - 2);
                l.u_xx += kk * (kk - T::one()) * c[j] * xk2;
                l.ux_over_x += kk * c[j] * xk2;
            }
        }
        mse(&l)
    }

    /// Max-norm of `ℱ` over the samples at each height.
    pub fn residual_certificate(&self, heights: &[T]) -> Vec<T> {
        let d1: Vec<Vec<T>> = self.coeffs.iter().map(|c| periodic_derivative(c, 1, self.length)).collect();
        let d2: Vec<Vec<T>> = self.coeffs.iter().map(|c| periodic_derivative(c, 2, self.length)).collect();
        heights
            .iter()
            .map(|&x| (0..self.s.len()).map(|j| self.residual_with(j, x, &d1, &d2).abs()).fold(T::zero(), T::max))
            .collect()
    }

    /// `u(s_j, x)` from the truncated series.
    pub fn u_at(&self, j: usize, x: T) -> T {
        self.coeffs.iter().enumerate().fold(T::zero(), |acc, (k, c)| acc + c[j] * x.powi(k as i32))
    }
}

/// Least-squares slope of `log r` against `log x`.
pub fn loglog_slope<T: Real>(x: &[T], r: &[T]) -> T {
    let n = T::n(x.len());
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let lr: Vec<T> = r.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = lr.iter().copied().sum::<T>() / n;
    let num: T = lx.iter().zip(&lr).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let den: T = lx.iter().map(|&a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Richardson estimate of `u₃` at one boundary sample from the
/// desingularized profile `v(x) = u/x²`.
#[derive(Clone, Copy, Debug)]
pub struct U3Estimate<T> {
    pub value: T,
    pub error: T,
}

/// Extrapolates `q(x) = (v(x) - κ/2)/x → u₃` over the heights
/// `h, h/2, h/4`, eliminating the `O(x)` and `O(x²)` terms.
pub fn richardson_u3<T: Real>(v: impl Fn(T) -> T, kappa: T, h: T) -> Result<U3Estimate<T>> {
    let half = T::c(0.5);
    let xs = [h, h * half, h * half * half];
    let q: Vec<T> = xs.iter().map(|&x| (v(x) - kappa * half) / x).collect();
    let r1 = [q[1] + q[1] - q[0], q[2] + q[2] - q[1]];
    let r2 = (T::c(4.0) * r1[1] - r1[0]) / T::c(3.0);
    let d1 = q[1] - q[0];
    let d2 = q[2] - q[1];
    let scale = T::one() + kappa.abs() + q[2].abs();
    let error = (r2 - r1[1]).abs();
    // differences may change sign where u₄ vanishes, but must contract
    if d2.abs() <= T::c(0.75) * d1.abs() + T::c(1e-9) * scale {
        return Ok(U3Estimate { value: r2, error });
    }
    // otherwise the sequence sits at the solver's noise floor; the spread
    // bounds the error, and a wide spread means the collar is too coarse
    let spread = error.max(T::c(2.0) * (d1.abs() + d2.abs()));
    if spread > T::c(1e-3) * scale {
        return Err(Error::IllResolvedCollar(format!(
            "non-contracting extrapolation sequence {:?}",
            q.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>()
        )));
    }
    Ok(U3Estimate { value: r2, error: spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::BoundaryCurve;
    use proptest::prelude::*;

    fn samples(c: &BoundaryCurve<f64>, n: usize) -> LoopSamples<f64> {
        c.arclength().unwrap()[0].samples(n)
    }

    #[test]
    fn forced_coefficient_is_half_curvature() {
        for r in [0.5, 2.0] {
            let s = samples(&BoundaryCurve::<f64>::circle([0.0, 0.0], r).unwrap(), 16);
            assert!(forced_u2(&s).iter().all(|&u| (u - 0.5 / r).abs() < 1e-14));
        }
        let e = BoundaryCurve::<f64>::ellipse(2.0, 1.0).unwrap();
        let maps = e.arclength().unwrap();
        let s = maps[0].samples(32);
        for (j, &u2) in forced_u2(&s).iter().enumerate() {
            let t = maps[0].t_of_s(s.s[j]);
            let k = 2.0 / (4.0 * t.sin().powi(2) + t.cos().powi(2)).powf(1.5);
            assert!((u2 - 0.5 * k).abs() < 1e-10);
        }
    }

    #[test]
    fn recursion_reproduces_hemisphere_taylor_series() {
        for r in [0.5f64, 1.0, 2.0] {
            let s = samples(&BoundaryCurve::<f64>::circle([0.0, 0.0], r).unwrap(), 8);
            let e = formal_recursion(&s, &[0.0; 8], 8).unwrap();
            // Taylor coefficients of R - sqrt(R² - x²)
            let exact = [(2, 0.5 / r), (4, 1.0 / (8.0 * r.powi(3))), (6, 1.0 / (16.0 * r.powi(5))), (8, 5.0 / (128.0 * r.powi(7)))];
            for (k, v) in exact {
                assert!((e.coeffs[k][3] - v).abs() < 1e-12 * v.abs().max(1.0), "R={r} k={k}: {} vs {v}", e.coeffs[k][3]);
            }
            for k in [3, 5, 7, 9] {
                assert!(e.coeffs[k][0].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flat_zero_data_gives_the_vertical_plane() {
        let s = LoopSamples {
            length: 2.0 * std::f64::consts::PI,
            s: (0..8).map(|j| j as f64 * std::f64::consts::PI / 4.0).collect(),
            point: vec![[0.0, 0.0]; 8],
            tangent: vec![[1.0, 0.0]; 8],
            normal: vec![[0.0, 1.0]; 8],
            kappa: vec![0.0; 8],
        };
        let e = formal_recursion(&s, &[0.0; 8], 7).unwrap();
        assert!(e.coeffs.iter().flatten().all(|&v| v == 0.0));
        let e = formal_recursion(&s, &[0.2; 8], 6).unwrap();
        // ℱ(c x³) = -54 c³ x⁵ is balanced by 7·4·u₇ x⁵
        assert!(e.coeffs[4][0].abs() < 1e-15 && e.coeffs[5][0].abs() < 1e-15);
        assert!((e.coeffs[7][0] - 54.0 * 0.008 / 28.0).abs() < 1e-14);
        let hs = [0.4, 0.2, 0.1];
        let r = e.residual_certificate(&hs);
        assert!(loglog_slope(&hs, &r) >= 0.95 * 6.0, "slope {}", loglog_slope(&hs, &r));
    }

    #[test]
    fn depth_limit_is_enforced() {
        let s = samples(&BoundaryCurve::<f64>::circle([0.0, 0.0], 1.0).unwrap(), 8);
        assert!(matches!(formal_recursion(&s, &[0.0; 8], MAX_ORDER), Err(Error::SeriesDepth { .. })));
    }

    #[test]
    fn truncation_at_second_order_leaves_first_order_residual() {
        let e = BoundaryCurve::<f64>::ellipse(2.0, 1.0).unwrap();
        let s = samples(&e, 32);
        let mut ex = formal_recursion(&s, &[0.0; 32], 3).unwrap();
        ex.coeffs.truncate(3);
        let hs = [0.02, 0.01, 0.005];
        let r = ex.residual_certificate(&hs);
        assert!(loglog_slope(&hs, &r) >= 0.95);
    }

    #[test]
    fn richardson_recovers_cubic_coefficient() {
        let v = |x: f64| 0.5 + 0.3 * x + 0.7 * x * x - 0.4 * x * x * x;
        let est = richardson_u3(v, 1.0, 0.05).unwrap();
        assert!((est.value - 0.3).abs() < 1e-5);
        assert!((est.value - 0.3).abs() <= 10.0 * est.error + 1e-12);
    }

    #[test]
    fn noise_floor_widens_the_error_bar() {
        let wiggle = |x: f64| if (x / 0.025 - 2.0).abs() < 1e-9 { 2e-7 } else { 0.0 };
        let v = |x: f64| 0.5 + 0.3 * x + wiggle(x);
        let est = richardson_u3(v, 1.0, 0.1).unwrap();
        assert!((est.value - 0.3).abs() <= est.error);
        assert!(est.error >= 1e-5);
        let rough = |x: f64| 0.5 + 0.3 * x + 1e-3 * x.sqrt();
        assert!(matches!(richardson_u3(rough, 1.0, 0.1), Err(Error::IllResolvedCollar(_))));
    }

    fn smooth_data() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (proptest::collection::vec(-0.1..0.1f64, 4), proptest::collection::vec(-0.5..0.5f64, 3))
            .prop_map(|(c, u)| (c, u))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn residual_exponent_reaches_the_order((c, u) in smooth_data()) {
            let mut l = crate::curves::Loop::circle([0.0, 0.0], 1.0);
            for v in [&mut l.ax, &mut l.bx, &mut l.ay, &mut l.by] {
                v.resize(3, 0.0);
            }
            l.ax[2] = c[0];
            l.bx[2] = c[1];
            l.ay[2] = c[2];
            l.by[2] = c[3];
            let curve = BoundaryCurve::<f64>::new(vec![l]).unwrap();
            let s = samples(&curve, 32);
            let u3: Vec<f64> = s.s.iter().map(|&t| u[0] + u[1] * (t * 2.0 * std::f64::consts::PI / s.length).cos() + u[2] * (t * 4.0 * std::f64::consts::PI / s.length).sin()).collect();
            let k = 6;
            let e = formal_recursion(&s, &u3, k).unwrap();
            let hs = [0.02, 0.014, 0.01];
            let r = e.residual_certificate(&hs);
            prop_assert!(loglog_slope(&hs, &r) >= 0.95 * k as f64, "slope {}", loglog_slope(&hs, &r));
        }

        #[test]
        fn u2_is_local_and_higher_terms_respond_to_u3((c, u) in smooth_data()) {
            let s = samples(&BoundaryCurve::<f64>::ellipse(1.0 + c[0].abs() * 3.0, 1.0).unwrap(), 16);
            let u3a = vec![u[0]; 16];
            let u3b = vec![u[0] + 0.3; 16];
            let a = formal_recursion(&s, &u3a, 6).unwrap();
            let b = formal_recursion(&s, &u3b, 6).unwrap();
            prop_assert!(a.coeffs[2].iter().zip(&b.coeffs[2]).all(|(x, y)| x == y));
            let diff: f64 = (4..=7).map(|k| a.coeffs[k].iter().zip(&b.coeffs[k]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)).sum();
            prop_assert!(diff > 1e-6);
        }
    }
}
