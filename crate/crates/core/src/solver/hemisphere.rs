//! Minimal disks as radial graphs over a geodesic hemisphere.
//!
//! The surface is `P(r, θ) = c + e^{ψ(r, θ)} ω(r, θ)`, where `ω` is the
//! stereographic image of the unit disk on the upper unit hemisphere and
//! `c` the centre of the best-fit circle. Dilations about `c` are
//! isometries of ℍ³, so `ψ ≡ log R` is the geodesic hemisphere and the
//! minimal surface equation for `ψ` is a uniformly degenerate elliptic
//! equation on the unit disk with Dirichlet data `ψ(1, θ) = log ρ(θ)`,
//! `ρ` the polar radius of the boundary curve about `c`.
//!
//! Discretization: Chebyshev in `r ∈ [-1, 1]` with the parity
//! identification `(r, θ) ~ (-r, θ + π)` and Fourier in `θ`.

use serde::Serialize;

use crate::curves::{BoundaryCurve, Loop, Point};
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Lu, Matrix};
use crate::scalar::{gradient, Real, Ring};
use crate::spectral::{chebyshev_diff_matrix, chebyshev_nodes, periodic_diff_matrices, ChebFourier};

#[derive(Clone, Debug, Serialize)]
pub struct PolarParams {
    /// Chebyshev degree in `r` over `[-1, 1]`; odd, so `r = 0` is not a node.
    pub nr: usize,
    /// Number of angular nodes; even.
    pub ntheta: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Initial number of continuation steps from the best-fit circle.
    pub steps: usize,
    /// How often a failed continuation step may be halved.
    pub max_refinements: usize,
}

impl Default for PolarParams {
    fn default() -> Self {
        Self { nr: 31, ntheta: 64, tol: 1e-10, max_iter: 30, steps: 2, max_refinements: 5 }
    }
}

/// Killing-graph residual multiplied by `1 - r⁴`, for local data
/// `[ψ, ψ_r, ψ_θ, ψ_rr, ψ_rθ, ψ_θθ]` at radius `r`.
pub fn killing_residual<T: Real, R: Ring<T>>(r: T, d: &[R; 6]) -> R {
    let [_, pr, pt, prr, prt, ptt] = d.clone();
    let one = T::one();
    let mu = (one + r * r) * T::c(0.5);
    let q = pt.scale(one / r);
    let lap = prr.clone() + pr.scale(one / r) + ptt.scale(one / (r * r));
    let h_rt = prt.scale(one / r) - pt.scale(one / (r * r));
    let h_tt = ptt.scale(one / (r * r)) + pr.scale(one / r);
    let grad2 = pr.clone() * pr.clone() + q.clone() * q.clone();
    let hess = q.clone() * q.clone() * prr - (pr.clone() * q * h_rt).scale(T::c(2.0)) + pr.clone() * pr.clone() * h_tt;
    let w2 = R::constant(one) + grad2.scale(mu * mu);
    let bulk = lap + hess.scale(mu * mu) - (pr.clone() * grad2).scale(mu * r);
    bulk.scale(one - r.powi(4)) + (w2 * pr).scale(T::c(8.0) * r)
}

/// The polar collocation grid.
#[derive(Clone, Debug)]
pub struct PolarGrid<T> {
    pub nr: usize,
    pub ntheta: usize,
    /// All Chebyshev nodes on `[-1, 1]`, increasing.
    pub r: Vec<T>,
    pub theta: Vec<T>,
    /// Index of the first positive node.
    pub half: usize,
    dr: Matrix<T>,
    drr: Matrix<T>,
    dt: Matrix<T>,
    dtt: Matrix<T>,
}

impl<T: Real> PolarGrid<T> {
    pub fn new(nr: usize, ntheta: usize) -> Result<Self> {
        if nr.is_multiple_of(2) || !ntheta.is_multiple_of(2) || nr < 5 || ntheta < 8 {
            return Err(Error::InvalidInput(format!("polar grid needs odd nr ≥ 5 and even ntheta ≥ 8, got {nr}×{ntheta}")));
        }
        let r = chebyshev_nodes(nr, -T::one(), T::one());
        let dr = chebyshev_diff_matrix(nr, -T::one(), T::one());
        let drr = dr.matmul(&dr);
        let (dt, dtt) = periodic_diff_matrices(ntheta, T::TAU());
        let theta = (0..ntheta).map(|j| T::TAU() * T::n(j) / T::n(ntheta)).collect();
        Ok(Self { nr, ntheta, r, theta, half: nr.div_ceil(2), dr, drr, dt, dtt })
    }

    /// Number of positive radial nodes, including `r = 1`.
    pub fn positive(&self) -> usize {
        self.nr + 1 - self.half
    }

    /// Index into a positive-node field.
    #[inline]
    pub fn idx(&self, k: usize, j: usize) -> usize {
        (k - self.half) * self.ntheta + j
    }

    /// Positive-node field index holding the value at full node `(k, j)`.
    #[inline]
    fn mapped(&self, k: usize, j: usize) -> usize {
        if k >= self.half {
            self.idx(k, j)
        } else {
            self.idx(self.nr - k, (j + self.ntheta / 2) % self.ntheta)
        }
    }

    pub fn unknowns(&self) -> usize {
        (self.positive() - 1) * self.ntheta
    }

    /// `[f, f_r, f_θ, f_rr, f_rθ, f_θθ]` on the positive nodes.
    pub fn derivatives(&self, f: &[T]) -> [Vec<T>; 6] {
        let n = f.len();
        let m = self.ntheta;
        let mut ft = vec![T::zero(); n];
        let mut ftt = vec![T::zero(); n];
        for k in self.half..=self.nr {
            for j in 0..m {
                let (mut a, mut b) = (T::zero(), T::zero());
                for jj in 0..m {
                    let v = f[self.idx(k, jj)];
                    a += self.dt[(j, jj)] * v;
                    b += self.dtt[(j, jj)] * v;
                }
                ft[self.idx(k, j)] = a;
                ftt[self.idx(k, j)] = b;
            }
        }
        let mut fr = vec![T::zero(); n];
        let mut frr = vec![T::zero(); n];
        let mut frt = vec![T::zero(); n];
        for k in self.half..=self.nr {
            for j in 0..m {
                let (mut a, mut b, mut c) = (T::zero(), T::zero(), T::zero());
                for kk in 0..=self.nr {
                    let src = self.mapped(kk, j);
                    a += self.dr[(k, kk)] * f[src];
                    b += self.drr[(k, kk)] * f[src];
                    c += self.dr[(k, kk)] * ft[src];
                }
                let i = self.idx(k, j);
                fr[i] = a;
                frr[i] = b;
                frt[i] = c;
            }
        }
        [f.to_vec(), fr, ft, frr, frt, ftt]
    }

    /// Residual at the unknown (interior) nodes.
    pub fn residual(&self, f: &[T]) -> Vec<T> {
        let d = self.derivatives(f);
        (0..self.unknowns())
            .map(|i| {
                let k = self.half + i / self.ntheta;
                killing_residual::<T, T>(self.r[k], &std::array::from_fn(|m| d[m][i]))
            })
            .collect()
    }

    /// Jacobian of [`Self::residual`] with respect to every positive-node
    /// value (interior columns first, then the boundary ring).
    pub fn jacobian(&self, f: &[T]) -> Matrix<T> {
        let d = self.derivatives(f);
        let m = self.ntheta;
        let cols = self.positive() * m;
        let mut jac = Matrix::zeros(self.unknowns(), cols);
        for row in 0..self.unknowns() {
            let k = self.half + row / m;
            let j = row % m;
            let (_, a) = gradient::<T, 6>(std::array::from_fn(|q| d[q][row]), |x| killing_residual(self.r[k], x));
            let out = jac.row_mut(row);
            out[row] += a[0];
            for jj in 0..m {
                out[self.idx(k, jj)] += a[2] * self.dt[(j, jj)] + a[5] * self.dtt[(j, jj)];
            }
            for kk in 0..=self.nr {
                out[self.mapped(kk, j)] += a[1] * self.dr[(k, kk)] + a[3] * self.drr[(k, kk)];
                let c = a[4] * self.dr[(k, kk)];
                if c != T::zero() {
                    let (kb, shift) = if kk >= self.half { (kk, 0) } else { (self.nr - kk, m / 2) };
                    let jm = (j + shift) % m;
                    for jj in 0..m {
                        out[self.idx(kb, (jj + shift) % m)] += c * self.dt[(jm, (jj + shift) % m)];
                    }
                }
            }
        }
        jac
    }

    pub fn interior_block(&self, jac: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
        let u = self.unknowns();
        let m = self.ntheta;
        let a = Matrix::from_fn(u, u, |i, j| jac[(i, j)]);
        let b = Matrix::from_fn(u, m, |i, j| jac[(i, u + j)]);
        (a, b)
    }

    /// Full-grid values `(nr + 1) × ntheta` from a positive-node field.
    pub fn full_grid(&self, f: &[T]) -> Vec<Vec<T>> {
        (0..=self.nr).map(|k| (0..self.ntheta).map(|j| f[self.mapped(k, j)]).collect()).collect()
    }

    pub fn interpolant(&self, f: &[T]) -> ChebFourier<T> {
        ChebFourier::from_grid(&self.full_grid(f), -T::one(), T::one(), T::TAU())
    }
}

/// Polar radius `ρ(θ)` of a loop about `c`, for a loop star-shaped about `c`.
pub fn polar_radius<T: Real>(l: &Loop<T>, c: Point<T>, thetas: &[T]) -> Result<Vec<T>> {
    Ok(polar_parameter(l, c, thetas)?
        .into_iter()
        .map(|t| {
            let p = l.point(t);
            ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt()
        })
        .collect())
}

/// Loop parameter `t` whose point has polar angle `θ` about `c`.
pub fn polar_parameter<T: Real>(l: &Loop<T>, c: Point<T>, thetas: &[T]) -> Result<Vec<T>> {
    let m = 4 * l.sample_count();
    let ts: Vec<T> = (0..=m).map(|i| T::TAU() * T::n(i) / T::n(m)).collect();
    let ang = |t: T| {
        let p = l.point(t);
        (p[1] - c[1]).atan2(p[0] - c[0])
    };
    let mut unwrapped = Vec::with_capacity(m + 1);
    let mut prev = ang(T::zero());
    let mut acc = prev;
    unwrapped.push(acc);
    for &t in &ts[1..] {
        let a = ang(t);
        let mut da = a - prev;
        if da > T::PI() {
            da -= T::TAU();
        } else if da < -T::PI() {
            da += T::TAU();
        }
        if da <= T::zero() {
            return Err(Error::InvalidInput("boundary curve is not star-shaped about its best-fit centre".into()));
        }
        acc += da;
        prev = a;
        unwrapped.push(acc);
    }
    let a0 = unwrapped[0];
    thetas
        .iter()
        .map(|&th| {
            let mut target = th;
            while target < a0 {
                target += T::TAU();
            }
            while target >= a0 + T::TAU() {
                target -= T::TAU();
            }
            let i = unwrapped.partition_point(|&u| u <= target).clamp(1, m);
            let (mut lo, mut hi) = (ts[i - 1], ts[i]);
            let g = |t: T| {
                let d = ang(t) - target;
                d - T::TAU() * (d / T::TAU()).round()
            };
            for _ in 0..200 {
                let mid = (lo + hi) * T::c(0.5);
                if g(mid) < T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < T::epsilon() * T::c(8.0) {
                    break;
                }
            }
            Ok((lo + hi) * T::c(0.5))
        })
        .collect()
}

/// A converged radial graph over the best-fit hemisphere.
#[derive(Clone, Debug)]
pub struct HemisphereGraph<T> {
    pub center: Point<T>,
    /// Radius of the best-fit circle.
    pub radius: T,
    pub grid: PolarGrid<T>,
    /// `ψ` on the positive nodes.
    pub psi: Vec<T>,
    pub field: ChebFourier<T>,
    pub residual: T,
    /// Residual after each Newton step, over all continuation steps.
    pub history: Vec<T>,
    /// Continuation parameters visited.
    pub path: Vec<T>,
    /// Max deviation of `e^{ψ(1, θ)}` from `ρ(θ)` between grid angles.
    pub boundary_error: T,
    /// Loop the graph spans.
    pub boundary: Loop<T>,
}

fn newton<T: Real>(grid: &PolarGrid<T>, f: &mut [T], params: &PolarParams, history: &mut Vec<T>) -> Result<()> {
    let u = grid.unknowns();
    let tol = T::c(params.tol);
    let mut r = grid.residual(f);
    let mut rn = norm_inf(&r);
    history.push(rn);
    let mut iter = 0;
    while rn > tol {
        if iter >= params.max_iter {
            return Err(Error::NewtonStagnation { iterations: iter, residual: rn.to_f64_lossy() });
        }
        iter += 1;
        let (a, _) = grid.interior_block(&grid.jacobian(f));
        let rhs: Vec<T> = r.iter().map(|&v| -v).collect();
        let delta = a.lu()?.solve(&rhs);
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..10 {
            let mut trial = f.to_vec();
            for i in 0..u {
                trial[i] += alpha * delta[i];
            }
            let rt = grid.residual(&trial);
            let rtn = norm_inf(&rt);
            if rtn.is_finite() && rtn < (T::one() - T::c(1e-4) * alpha) * rn {
                f.copy_from_slice(&trial);
                r = rt;
                rn = rtn;
                accepted = true;
                break;
            }
            alpha *= T::c(0.5);
        }
        history.push(rn);
        if !accepted {
            if rn < tol * T::c(100.0) {
                return Ok(());
            }
            return Err(Error::NewtonStagnation { iterations: iter, residual: rn.to_f64_lossy() });
        }
    }
    Ok(())
}

/// Solves for the minimal disk spanning a single star-shaped loop, with
/// continuation from the best-fit circle.
pub fn solve_hemisphere_graph<T: Real>(curve: &BoundaryCurve<T>, params: &PolarParams) -> Result<HemisphereGraph<T>> {
    if curve.loop_count() != 1 {
        return Err(Error::InvalidInput("hemisphere graphs need a single boundary loop".into()));
    }
    let grid = PolarGrid::new(params.nr, params.ntheta)?;
    let (center, radius) = curve.best_fit_circle(0);
    let l = curve.loops()[0].clone();
    let rho = polar_radius(&l, center, &grid.theta)?;
    let target: Vec<T> = rho.iter().map(|r| r.ln()).collect();
    let base = radius.ln();
    let m = grid.ntheta;
    let u = grid.unknowns();
    let mut psi = vec![base; grid.positive() * m];
    let mut history = Vec::new();
    let mut path = vec![T::zero()];
    let mut t = T::zero();
    let mut step = T::one() / T::n(params.steps.max(1));
    let mut refinements = 0;
    while t < T::one() {
        let t_next = (t + step).min(T::one());
        let mut trial = psi.clone();
        for j in 0..m {
            let b = t_next * target[j] + (T::one() - t_next) * base;
            // shift the interior by the change in boundary data along each ray
            let old = trial[u + j];
            trial[u + j] = b;
            for k in grid.half..grid.nr {
                let i = grid.idx(k, j);
                let w = (grid.r[k] * grid.r[k]).min(T::one());
                trial[i] += w * (b - old);
            }
        }
        match newton(&grid, &mut trial, params, &mut history) {
            Ok(()) => {
                psi = trial;
                t = t_next;
                path.push(t);
            }
            Err(e) => {
                refinements += 1;
                if refinements > params.max_refinements {
                    return Err(Error::OutOfBasin(format!(
                        "Newton failed at continuation parameter {:.4} after {} step halvings ({e}); try more steps or a finer grid",
                        t_next.to_f64_lossy(),
                        params.max_refinements
                    )));
                }
                step *= T::c(0.5);
            }
        }
    }
    let residual = norm_inf(&grid.residual(&psi));
    let field = grid.interpolant(&psi);
    let mids: Vec<T> = (0..m).map(|j| grid.theta[j] + T::PI() / T::n(m)).collect();
    let rho_mid = polar_radius(&l, center, &mids)?;
    let boundary_error =
        mids.iter().zip(&rho_mid).map(|(&th, &r)| (field.eval(T::one(), th)[0].exp() - r).abs()).fold(T::zero(), T::max);
    Ok(HemisphereGraph { center, radius, grid, psi, field, residual, history, path, boundary_error, boundary: l })
}

impl<T: Real> HemisphereGraph<T> {
    /// The exact geodesic hemisphere over a circle.
    pub fn hemisphere(center: Point<T>, radius: T, params: &PolarParams) -> Result<Self> {
        let grid = PolarGrid::new(params.nr, params.ntheta)?;
        let psi = vec![radius.ln(); grid.positive() * grid.ntheta];
        let field = grid.interpolant(&psi);
        Ok(Self {
            center,
            radius,
            grid,
            psi,
            field,
            residual: T::zero(),
            history: vec![T::zero()],
            path: vec![T::one()],
            boundary_error: T::zero(),
            boundary: Loop::circle(center, radius),
        })
    }

    /// Linearized operator at the solution: interior block (LU) and the
    /// coupling to boundary values.
    pub fn linearization(&self) -> Result<(Lu<T>, Matrix<T>)> {
        let jac = self.grid.jacobian(&self.psi);
        let (a, b) = self.grid.interior_block(&jac);
        Ok((a.lu()?, b))
    }

    /// Solves the linearized equation with Dirichlet data `δψ(1, θ_j)`.
    pub fn linear_response(&self, lu: &Lu<T>, coupling: &Matrix<T>, boundary: &[T]) -> ChebFourier<T> {
        let rhs: Vec<T> = coupling.mul_vec(boundary).into_iter().map(|v| -v).collect();
        let inner = lu.solve(&rhs);
        let mut f = inner;
        f.extend_from_slice(boundary);
        self.grid.interpolant(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm_inf;

    #[test]
    fn off_centre_hemisphere_solves_the_killing_equation() {
        // sphere of radius R centred at (a, 0, 0), seen from the origin
        let (a, rr) = (0.3, 1.0);
        let grid = PolarGrid::<f64>::new(41, 48).unwrap();
        let mut f = vec![0.0; grid.positive() * grid.ntheta];
        for k in grid.half..=grid.nr {
            for j in 0..grid.ntheta {
                let (r, th) = (grid.r[k], grid.theta[j]);
                let w1 = 2.0 * r * th.cos() / (1.0 + r * r);
                f[grid.idx(k, j)] = (a * w1 + (a * a * w1 * w1 + rr * rr - a * a).sqrt()).ln();
            }
        }
        let res = norm_inf(&grid.residual(&f));
        assert!(res < 1e-8, "{res}");
    }

    #[test]
    fn circle_gives_the_constant_graph_and_offset_circle_converges() {
        let c = BoundaryCurve::circle([0.0, 0.0], 1.0).unwrap();
        let p = PolarParams { nr: 15, ntheta: 16, ..Default::default() };
        let g = solve_hemisphere_graph(&c, &p).unwrap();
        assert!(g.psi.iter().all(|v: &f64| v.abs() < 1e-12));
        let shifted = BoundaryCurve::circle([0.2, -0.1], 1.5).unwrap();
        let g = solve_hemisphere_graph(&shifted, &p).unwrap();
        assert!((g.field.eval(0.3, 1.0)[0] - 1.5f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let grid = PolarGrid::<f64>::new(9, 8).unwrap();
        let n = grid.positive() * grid.ntheta;
        let f: Vec<f64> = (0..n).map(|i| 0.1 * ((i * 7 % 13) as f64 / 13.0 - 0.5)).collect();
        let jac = grid.jacobian(&f);
        let h = 1e-6;
        for col in [0, 5, 17, n - 3] {
            let mut fp = f.clone();
            fp[col] += h;
            let mut fm = f.clone();
            fm[col] -= h;
            let rp = grid.residual(&fp);
            let rm = grid.residual(&fm);
            for row in 0..grid.unknowns() {
                let fd = (rp[row] - rm[row]) / (2.0 * h);
                assert!((fd - jac[(row, col)]).abs() < 1e-5 * (1.0 + fd.abs()), "({row},{col}) {fd} vs {}", jac[(row, col)]);
            }
        }
    }
}
