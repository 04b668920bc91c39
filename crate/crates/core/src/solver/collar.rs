//! Collar solutions of `ℱ(u) = 0` on a strip `s ∈ [0, L) × x ∈ [0, x_max]`.
//!
//! The unknown is `v = u/x²`, discretized by Fourier collocation in `s` and
//! Chebyshev collocation in `x`. The row `x = 0` carries the same operator
//! in its desingularized form, so `u₂ = κ/2` comes out of the solve rather
//! than being imposed.

use serde::Serialize;

use crate::curves::LoopSamples;
use crate::error::{Error, Result};
use crate::expansion::{richardson_u3, U3Estimate};
use crate::linalg::{norm_inf, Matrix};
use crate::scalar::{Dual, Real};
use crate::solver::operator::{mse, mse_v, mse_v_gradient, Local, VLocal};
use crate::spectral::{chebyshev_diff_matrix, chebyshev_interp, chebyshev_nodes, periodic_diff_matrices, periodic_derivative, trig_interp};

/// Tensor grid of the strip.
#[derive(Clone, Debug)]
pub struct CollarGrid<T> {
    pub ns: usize,
    pub nx: usize,
    pub length: T,
    pub x_max: T,
    pub s: Vec<T>,
    pub x: Vec<T>,
    ds1: Matrix<T>,
    ds2: Matrix<T>,
    dx1: Matrix<T>,
    dx2: Matrix<T>,
}

impl<T: Real> CollarGrid<T> {
    pub fn new(ns: usize, nx: usize, length: T, x_max: T) -> Self {
        let (ds1, ds2) = periodic_diff_matrices(ns, length);
        let dx1 = chebyshev_diff_matrix(nx, T::zero(), x_max);
        let dx2 = dx1.matmul(&dx1);
        let s = (0..ns).map(|j| length * T::n(j) / T::n(ns)).collect();
        let x = chebyshev_nodes(nx, T::zero(), x_max);
        Self { ns, nx, length, x_max, s, x, ds1, ds2, dx1, dx2 }
    }

    #[inline]
    pub fn idx(&self, j: usize, i: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn len(&self) -> usize {
        self.ns * (self.nx + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn apply_s(&self, d: &Matrix<T>, f: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); f.len()];
        for j in 0..self.ns {
            for k in 0..self.ns {
                let c = d[(j, k)];
                if c == T::zero() {
                    continue;
                }
                for i in 0..=self.nx {
                    out[self.idx(j, i)] += c * f[self.idx(k, i)];
                }
            }
        }
        out
    }

    fn apply_x(&self, d: &Matrix<T>, f: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); f.len()];
        for j in 0..self.ns {
            for i in 0..=self.nx {
                let mut acc = T::zero();
                for k in 0..=self.nx {
                    acc += d[(i, k)] * f[self.idx(j, k)];
                }
                out[self.idx(j, i)] = acc;
            }
        }
        out
    }

    /// `(f, f_s, f_x, f_ss, f_sx, f_xx)` of a grid field.
    pub fn derivatives(&self, f: &[T]) -> [Vec<T>; 6] {
        let fs = self.apply_s(&self.ds1, f);
        let fx = self.apply_x(&self.dx1, f);
        let fss = self.apply_s(&self.ds2, f);
        let fsx = self.apply_x(&self.dx1, &fs);
        let fxx = self.apply_x(&self.dx2, f);
        [f.to_vec(), fs, fx, fss, fsx, fxx]
    }

    /// Number of nodes (including `x = 0`) below `0.1 x_max`.
    pub fn boundary_nodes(&self) -> usize {
        self.x.iter().filter(|&&x| x < self.x_max * T::c(0.1)).count()
    }

    /// Chebyshev interpolation in `x` of a grid field along line `j`.
    pub fn interp_x(&self, f: &[T], j: usize, x: T) -> T {
        let line: Vec<T> = (0..=self.nx).map(|i| f[self.idx(j, i)]).collect();
        chebyshev_interp(&self.x, &line, x)
    }
}

/// Where the Dirichlet data at `x = x_max` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopSource {
    Exact,
    Manufactured,
    Rotational,
    HemisphereMatched,
}

/// Dirichlet data `u(s_j, x_max)` at the grid's `s` nodes.
#[derive(Clone, Debug)]
pub struct TopData<T> {
    pub source: TopSource,
    pub u: Vec<T>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CollarParams {
    pub ns: usize,
    pub nx: usize,
    pub x_max: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CollarParams {
    fn default() -> Self {
        Self { ns: 32, nx: 16, x_max: 0.25, tol: 1e-11, max_iter: 40 }
    }
}

#[derive(Clone, Debug)]
pub struct CollarSolution<T> {
    pub grid: CollarGrid<T>,
    pub kappa: Vec<T>,
    pub kappa_s: Vec<T>,
    pub v: Vec<T>,
    pub source: TopSource,
    pub residual: T,
    pub history: Vec<T>,
}

/// Smallest admissible `w = 1 - κu`; below it the cylinder graph folds.
const W_FLOOR: f64 = 0.05;

fn residual<T: Real>(g: &CollarGrid<T>, kappa: &[T], kappa_s: &[T], v: &[T], forcing: Option<&[T]>) -> Vec<T> {
    let d = g.derivatives(v);
    let mut r = vec![T::zero(); g.len()];
    for j in 0..g.ns {
        for i in 0..g.nx {
            let k = g.idx(j, i);
            let val = mse_v::<T, T>(kappa[j], kappa_s[j], g.x[i], [d[0][k], d[1][k], d[2][k], d[3][k], d[4][k], d[5][k]]);
            r[k] = val - forcing.map_or(T::zero(), |f| f[k]);
        }
    }
    r
}

fn jacobian<T: Real>(g: &CollarGrid<T>, kappa: &[T], kappa_s: &[T], v: &[T]) -> Matrix<T> {
    let d = g.derivatives(v);
    let nu = g.ns * g.nx;
    let unk = |j: usize, i: usize| j * g.nx + i;
    let mut jac = Matrix::zeros(nu, nu);
    for j in 0..g.ns {
        for i in 0..g.nx {
            let k = g.idx(j, i);
            let local = VLocal { v: d[0][k], v_s: d[1][k], v_x: d[2][k], v_ss: d[3][k], v_sx: d[4][k], v_xx: d[5][k] };
            let (_, a) = mse_v_gradient(kappa[j], kappa_s[j], g.x[i], &local);
            let row = unk(j, i);
            jac[(row, unk(j, i))] += a[0];
            for jj in 0..g.ns {
                let c = a[1] * g.ds1[(j, jj)] + a[3] * g.ds2[(j, jj)];
                jac[(row, unk(jj, i))] += c;
            }
            for ii in 0..g.nx {
                jac[(row, unk(j, ii))] += a[2] * g.dx1[(i, ii)] + a[5] * g.dx2[(i, ii)];
            }
            if a[4] != T::zero() {
                for jj in 0..g.ns {
                    let cs = a[4] * g.ds1[(j, jj)];
                    if cs == T::zero() {
                        continue;
                    }
                    for ii in 0..g.nx {
                        jac[(row, unk(jj, ii))] += cs * g.dx1[(i, ii)];
                    }
                }
            }
        }
    }
    jac
}

/// Solves the collar problem with Dirichlet data at `x_max`.
pub fn solve_collar<T: Real>(samples: &LoopSamples<T>, top: &TopData<T>, params: &CollarParams) -> Result<CollarSolution<T>> {
    solve_collar_forced(samples, top, params, None)
}

/// Solves `ℱ(x²v) = f` for a forcing `f` sampled on the grid (used for
/// manufactured solutions).
pub fn solve_collar_forced<T: Real>(
    samples: &LoopSamples<T>,
    top: &TopData<T>,
    params: &CollarParams,
    forcing: Option<&[T]>,
) -> Result<CollarSolution<T>> {
    let ns = params.ns;
    if samples.kappa.len() != ns || top.u.len() != ns {
        return Err(Error::GridMismatch(format!(
            "curve samples {} / top data {} vs ns = {ns}",
            samples.kappa.len(),
            top.u.len()
        )));
    }
    let x_max = T::c(params.x_max);
    let g = CollarGrid::new(ns, params.nx, samples.length, x_max);
    if let Some(f) = forcing {
        if f.len() != g.len() {
            return Err(Error::GridMismatch("forcing size".into()));
        }
    }
    let kappa = samples.kappa.clone();
    let kappa_s = periodic_derivative(&kappa, 1, samples.length);
    for (j, &ut) in top.u.iter().enumerate() {
        if T::one() - kappa[j] * ut < T::c(W_FLOOR) {
            return Err(Error::CollarTooTall(format!("w = 1 - κu degenerates in the top data at sample {j}")));
        }
    }
    let half = T::c(0.5);
    let mut v = vec![T::zero(); g.len()];
    for j in 0..ns {
        let vt = top.u[j] / (x_max * x_max);
        for i in 0..=params.nx {
            let t = g.x[i] / x_max;
            v[g.idx(j, i)] = kappa[j] * half * (T::one() - t) + vt * t;
        }
    }
    let tol = T::c(params.tol);
    let mut r = residual(&g, &kappa, &kappa_s, &v, forcing);
    let mut rn = norm_inf(&r);
    let mut history = vec![rn];
    let mut iter = 0;
    while rn > tol {
        if iter >= params.max_iter {
            return Err(Error::NewtonStagnation { iterations: iter, residual: rn.to_f64_lossy() });
        }
        iter += 1;
        let jac = jacobian(&g, &kappa, &kappa_s, &v);
        let rhs: Vec<T> = (0..ns).flat_map(|j| (0..params.nx).map(move |i| (j, i))).map(|(j, i)| -r[g.idx(j, i)]).collect();
        let delta = jac.lu()?.solve(&rhs);
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..12 {
            let mut trial = v.clone();
            for j in 0..ns {
                for i in 0..params.nx {
                    trial[g.idx(j, i)] += alpha * delta[j * params.nx + i];
                }
            }
            let rt = residual(&g, &kappa, &kappa_s, &trial, forcing);
            let rtn = norm_inf(&rt);
            if rtn.is_finite() && rtn < (T::one() - T::c(1e-4) * alpha) * rn {
                v = trial;
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            alpha *= half;
        }
        history.push(rn);
        if !accepted {
            if rn < tol * T::c(100.0) {
                break;
            }
            return Err(Error::NewtonStagnation { iterations: iter, residual: rn.to_f64_lossy() });
        }
    }
    let sol = CollarSolution { grid: g, kappa, kappa_s, v, source: top.source, residual: rn, history };
    sol.check_representable()?;
    Ok(sol)
}

/// Pointwise `u` and derivatives at a collar point.
#[derive(Clone, Copy, Debug)]
pub struct UJet<T> {
    pub u: T,
    pub u_s: T,
    pub u_x: T,
    pub u_ss: T,
    pub u_sx: T,
    pub u_xx: T,
}

impl<T: Real> CollarSolution<T> {
    fn check_representable(&self) -> Result<()> {
        let g = &self.grid;
        for j in 0..g.ns {
            for i in 0..=g.nx {
                let u = g.x[i] * g.x[i] * self.v[g.idx(j, i)];
                if T::one() - self.kappa[j] * u < T::c(W_FLOOR) {
                    return Err(Error::CollarTooTall(format!(
                        "w = 1 - κu degenerates at s = {:.4}, x = {:.4}",
                        g.s[j].to_f64_lossy(),
                        g.x[i].to_f64_lossy()
                    )));
                }
            }
        }
        Ok(())
    }

    /// `max_j |v(s_j, 0) - κ_j/2|`, the monitored boundary law.
    pub fn u2_defect(&self) -> T {
        let g = &self.grid;
        (0..g.ns).map(|j| (self.v[g.idx(j, 0)] - self.kappa[j] * T::c(0.5)).abs()).fold(T::zero(), T::max)
    }

    pub fn v_at(&self, j: usize, x: T) -> T {
        self.grid.interp_x(&self.v, j, x)
    }

    pub fn u_at(&self, j: usize, x: T) -> T {
        x * x * self.v_at(j, x)
    }

    /// `u` at an arbitrary arclength by trigonometric interpolation.
    pub fn u_at_s(&self, s: T, x: T) -> T {
        let line: Vec<T> = (0..self.grid.ns).map(|j| self.u_at(j, x)).collect();
        trig_interp(&line, T::TAU() * s / self.grid.length)
    }

    /// Derivative fields of `v` on the grid.
    pub fn v_derivatives(&self) -> [Vec<T>; 6] {
        self.grid.derivatives(&self.v)
    }

    /// `u` and its derivatives on line `j` at height `x`.
    pub fn jet(&self, d: &[Vec<T>; 6], j: usize, x: T) -> UJet<T> {
        let g = &self.grid;
        let e = |f: &Vec<T>| g.interp_x(f, j, x);
        let (v, vs, vx, vss, vsx, vxx) = (e(&d[0]), e(&d[1]), e(&d[2]), e(&d[3]), e(&d[4]), e(&d[5]));
        let two = T::c(2.0);
        let x2 = x * x;
        UJet {
            u: x2 * v,
            u_s: x2 * vs,
            u_x: two * x * v + x2 * vx,
            u_ss: x2 * vss,
            u_sx: two * x * vs + x2 * vsx,
            u_xx: two * v + T::c(4.0) * x * vx + x2 * vxx,
        }
    }

    /// Richardson extraction of `u₃` on every `s` line.
    pub fn extract_u3(&self) -> Result<U3Profile<T>> {
        let g = &self.grid;
        if g.boundary_nodes() < 4 {
            return Err(Error::IllResolvedCollar(format!(
                "only {} nodes below 0.1 x_max; raise nx",
                g.boundary_nodes()
            )));
        }
        let h = g.x_max * T::c(0.1);
        let est: Vec<U3Estimate<T>> =
            (0..g.ns).map(|j| richardson_u3(|x| self.v_at(j, x), self.kappa[j], h)).collect::<Result<_>>()?;
        Ok(U3Profile {
            s: g.s.clone(),
            length: g.length,
            value: est.iter().map(|e| e.value).collect(),
            error: est.iter().map(|e| e.error).collect(),
        })
    }

    /// `ℱ(u)` at every node with `x > 0`, from the solved field.
    pub fn residual_field(&self) -> Vec<T> {
        residual(&self.grid, &self.kappa, &self.kappa_s, &self.v, None)
    }
}

/// Sampled `u₃(s)` with per-sample extrapolation error.
#[derive(Clone, Debug, Serialize)]
pub struct U3Profile<T> {
    pub s: Vec<T>,
    pub length: T,
    pub value: Vec<T>,
    pub error: Vec<T>,
}

impl<T: Real> U3Profile<T> {
    pub fn max_abs(&self) -> T {
        self.value.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn max_error(&self) -> T {
        self.error.iter().fold(T::zero(), |m, v| m.max(*v))
    }
}

/// `ℱ(u)` evaluated from a `u`-field on a collar grid: the form with the
/// `1/x` term at `x > 0`, and the limit `κ - u_xx` at `x = 0`.
pub fn residual_u<T: Real>(g: &CollarGrid<T>, kappa: &[T], kappa_s: &[T], u: &[T]) -> Vec<T> {
    let d = g.derivatives(u);
    let mut out = vec![T::zero(); g.len()];
    for j in 0..g.ns {
        for i in 0..=g.nx {
            let k = g.idx(j, i);
            let x = g.x[i];
            out[k] = if x == T::zero() {
                kappa[j] - d[5][k]
            } else {
                mse(&Local {
                    kappa: kappa[j],
                    kappa_s: kappa_s[j],
                    u: d[0][k],
                    u_s: d[1][k],
                    u_x: d[2][k],
                    u_ss: d[3][k],
                    u_sx: d[4][k],
                    u_xx: d[5][k],
                    ux_over_x: d[2][k] / x,
                })
            };
        }
    }
    out
}

/// Matrix-free linearization `L_u φ = d/dt ℱ(u + tφ)|₀`, evaluated with
/// dual numbers.
pub fn linearize_u<T: Real>(g: &CollarGrid<T>, kappa: &[T], kappa_s: &[T], u: &[T], phi: &[T]) -> Vec<T> {
    let du = g.derivatives(u);
    let dp = g.derivatives(phi);
    let mut out = vec![T::zero(); g.len()];
    for j in 0..g.ns {
        for i in 0..=g.nx {
            let k = g.idx(j, i);
            let x = g.x[i];
            let dl = |m: usize| Dual::new(du[m][k], dp[m][k]);
            out[k] = if x == T::zero() {
                -dp[5][k]
            } else {
                mse(&Local {
                    kappa: Dual::cst(kappa[j]),
                    kappa_s: Dual::cst(kappa_s[j]),
                    u: dl(0),
                    u_s: dl(1),
                    u_x: dl(2),
                    u_ss: dl(3),
                    u_sx: dl(4),
                    u_xx: dl(5),
                    ux_over_x: Dual::new(du[2][k] / x, dp[2][k] / x),
                })
                .eps
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::BoundaryCurve;

    fn circle_samples(r: f64, ns: usize) -> LoopSamples<f64> {
        BoundaryCurve::<f64>::circle([0.0, 0.0], r).unwrap().arclength().unwrap()[0].samples(ns)
    }

    fn hemisphere_u(r: f64, x: f64) -> f64 {
        r - (r * r - x * x).sqrt()
    }

    #[test]
    fn recovers_the_hemisphere() {
        let r = 1.0;
        let params = CollarParams { ns: 16, nx: 20, x_max: 0.5, ..Default::default() };
        let s = circle_samples(r, 16);
        let top = TopData { source: TopSource::Exact, u: vec![hemisphere_u(r, 0.5); 16] };
        let sol = solve_collar(&s, &top, &params).unwrap();
        assert!(sol.residual < 1e-9);
        let mut err: f64 = 0.0;
        for j in 0..16 {
            for k in 0..50 {
                let x = 0.5 * k as f64 / 49.0;
                err = err.max((sol.u_at(j, x) - hemisphere_u(r, x)).abs());
            }
        }
        assert!(err < 1e-8, "max error {err}");
        assert!(sol.u2_defect() < 1e-6);
        let u3 = sol.extract_u3().unwrap();
        assert!(u3.max_abs() < 1e-6);
    }

    #[test]
    fn manufactured_solution_converges_at_the_analytic_rate() {
        // v* = κ/2 + 0.3 x cos s + x²/(1 + 4x); the pole at x = -1/4 sets the
        // Chebyshev rate on [0, 1/2] to ρ = 2 + √3
        let exact = |s: f64, x: f64| {
            let e = 1.0 + 4.0 * x;
            [
                0.5 + 0.3 * x * s.cos() + x * x / e,
                -0.3 * x * s.sin(),
                0.3 * s.cos() + 0.25 - 0.25 / (e * e),
                -0.3 * x * s.cos(),
                -0.3 * s.sin(),
                2.0 / (e * e * e),
            ]
        };
        let ns = 16;
        let samples = circle_samples(1.0, ns);
        let mut errors = Vec::new();
        for nx in [8, 12, 16] {
            let params = CollarParams { ns, nx, x_max: 0.5, ..Default::default() };
            let g = CollarGrid::new(ns, nx, samples.length, 0.5);
            let forcing: Vec<f64> = (0..g.len())
                .map(|k| {
                    let (j, i) = (k / (nx + 1), k % (nx + 1));
                    mse_v::<f64, f64>(1.0, 0.0, g.x[i], exact(g.s[j], g.x[i]))
                })
                .collect();
            let top = TopData { source: TopSource::Manufactured, u: g.s.iter().map(|&s| 0.25 * exact(s, 0.5)[0]).collect() };
            let sol = solve_collar_forced(&samples, &top, &params, Some(&forcing)).unwrap();
            let err = (0..g.len())
                .map(|k| (sol.v[k] - exact(g.s[k / (nx + 1)], g.x[k % (nx + 1)])[0]).abs())
                .fold(0.0, f64::max);
            errors.push(err);
        }
        let rate = (errors[0] / errors[2]).ln() / 8.0;
        let expected = (2.0 + 3f64.sqrt()).ln();
        assert!((rate - expected).abs() < 0.2 * expected, "errors {errors:?}, rate {rate} vs {expected}");
    }

    #[test]
    fn exact_residuals_vanish() {
        let g = CollarGrid::new(8, 16, 2.0 * std::f64::consts::PI, 0.5);
        let kappa = vec![1.0; 8];
        let ks = vec![0.0; 8];
        let u: Vec<f64> = (0..g.len()).map(|k| hemisphere_u(1.0, g.x[k % 17])).collect();
        assert!(norm_inf(&residual_u(&g, &kappa, &ks, &u)) < 1e-9);
        let zero = vec![0.0; g.len()];
        assert_eq!(norm_inf(&residual_u(&g, &[0.0; 8], &ks, &zero)), 0.0);
    }

    #[test]
    fn second_order_truncation_leaves_first_order_residual() {
        let g = CollarGrid::new(8, 24, 2.0 * std::f64::consts::PI, 0.4);
        let kappa = vec![1.0; 8];
        let ks = vec![0.0; 8];
        let u: Vec<f64> = (0..g.len()).map(|k| 0.5 * g.x[k % 25].powi(2)).collect();
        let r = residual_u(&g, &kappa, &ks, &u);
        // exact residual of u = x²/2 over the unit circle: 3x²/2 … measure slope
        let xs: Vec<f64> = (1..4).map(|i| g.x[i]).collect();
        let rs: Vec<f64> = (1..4).map(|i| r[i].abs()).collect();
        assert!(crate::expansion::loglog_slope(&xs, &rs) >= 1.0 - 1e-6);
    }

    #[test]
    fn linearization_matches_flat_model_and_central_differences() {
        let n = 12;
        let g = CollarGrid::new(n, 14, 2.0 * std::f64::consts::PI, 0.5);
        let zero = vec![0.0; g.len()];
        let phi: Vec<f64> = (0..g.len()).map(|k| {
            let (j, i) = (k / 15, k % 15);
            g.x[i].powi(3) * g.s[j].cos() + g.x[i].powi(2)
        }).collect();
        let l0 = linearize_u(&g, &vec![0.0; n], &vec![0.0; n], &zero, &phi);
        let d = g.derivatives(&phi);
        for k in 0..g.len() {
            let x = g.x[k % 15];
            if x > 0.0 {
                let flat = d[3][k] + d[5][k] - 2.0 / x * d[2][k];
                assert!((l0[k] - flat).abs() < 1e-10);
            }
        }
        assert!(norm_inf(&linearize_u(&g, &vec![1.0; n], &vec![0.0; n], &phi, &zero)) == 0.0);
        // random-ish base state and direction: dual vs central difference
        let kappa: Vec<f64> = g.s.iter().map(|s| 1.0 + 0.2 * s.cos()).collect();
        let ks: Vec<f64> = g.s.iter().map(|s| -0.2 * s.sin()).collect();
        let u: Vec<f64> = (0..g.len()).map(|k| {
            let (j, i) = (k / 15, k % 15);
            0.5 * g.x[i].powi(2) * kappa[j] + 0.1 * g.x[i].powi(3) * (2.0 * g.s[j]).sin()
        }).collect();
        let lu = linearize_u(&g, &kappa, &ks, &u, &phi);
        let h = 1e-4;
        let up: Vec<f64> = u.iter().zip(&phi).map(|(a, b)| a + h * b).collect();
        let um: Vec<f64> = u.iter().zip(&phi).map(|(a, b)| a - h * b).collect();
        let rp = residual_u(&g, &kappa, &ks, &up);
        let rm = residual_u(&g, &kappa, &ks, &um);
        let scale = norm_inf(&lu);
        for k in 0..g.len() {
            let fd = (rp[k] - rm[k]) / (2.0 * h);
            assert!((fd - lu[k]).abs() <= 1e-6 * scale, "{fd} vs {}", lu[k]);
        }
    }
}
