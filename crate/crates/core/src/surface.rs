//! Parametrized surfaces in the upper half-space `(y₁, y₂, x)`.
//!
//! Every surface is a map `F(p, q)` with `p` in an interval and `q`
//! periodic. The ends of the `p` interval are either on the boundary plane
//! `x = 0`, a pole of the parametrization, or an artificial cut.

use serde::Serialize;

use crate::curves::{BoundaryCurve, Loop, LoopSamples};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solver::collar::{solve_collar, CollarParams, CollarSolution, TopData, TopSource, U3Profile};
use crate::solver::hemisphere::HemisphereGraph;
use crate::solver::rotational::{ProfileKind, RotationalProfile};
use crate::spectral::ChebFourier;

pub type Vec3<T> = [T; 3];

/// Position and derivatives up to second order.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceJet<T> {
    pub f: Vec3<T>,
    pub fp: Vec3<T>,
    pub fq: Vec3<T>,
    pub fpp: Vec3<T>,
    pub fpq: Vec3<T>,
    pub fqq: Vec3<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainTag {
    CollarStrip,
    HemispherePolar,
    RotationalProfile,
    DoubledMesh,
}

/// What lies at an end of the `p` interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum End {
    Boundary,
    Pole,
    Cut,
}

pub type Line<'a, T> = Box<dyn Fn(T) -> SurfaceJet<T> + Send + Sync + 'a>;

pub trait Surface<T: Real>: Send + Sync {
    fn tag(&self) -> DomainTag;
    fn p_range(&self) -> (T, T);
    fn q_period(&self) -> T;
    fn ends(&self) -> (End, End);
    fn jet(&self, p: T, q: T) -> SurfaceJet<T>;
    /// Euler characteristic; `None` when a cut makes it meaningless.
    fn euler_characteristic(&self) -> Option<i32>;
    fn boundary_loops(&self) -> usize;
    /// `±1` so that `sign · F_p × F_q` is the normal that agrees with the
    /// inward curve normal `N̄` at the boundary.
    fn normal_sign(&self) -> T;
    /// Euclidean length of the boundary curve.
    fn boundary_length(&self) -> T;
    /// Whether the surface is a solution of the minimal surface equation.
    fn is_minimal(&self) -> bool {
        true
    }
    /// Jets along `q = const`, for surfaces that can precompute per line.
    fn line(&self, q: T) -> Line<'_, T> {
        Box::new(move |p| self.jet(p, q))
    }
}

pub fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot3<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `ω` on the upper unit hemisphere and its derivatives in `(r, θ)`.
fn omega_jet<T: Real>(r: T, th: T) -> [Vec3<T>; 6] {
    let one = T::one();
    let d = one + r * r;
    let f = T::c(2.0) * r / d;
    let f1 = T::c(2.0) * (one - r * r) / (d * d);
    let f2 = T::c(4.0) * r * (r * r - T::c(3.0)) / (d * d * d);
    let g = (one - r * r) / d;
    let g1 = -T::c(4.0) * r / (d * d);
    let g2 = T::c(4.0) * (T::c(3.0) * r * r - one) / (d * d * d);
    let (s, c) = th.sin_cos();
    let z = T::zero();
    [
        [f * c, f * s, g],
        [f1 * c, f1 * s, g1],
        [-f * s, f * c, z],
        [f2 * c, f2 * s, g2],
        [-f1 * s, f1 * c, z],
        [-f * c, -f * s, z],
    ]
}

fn polar_jet<T: Real>(center: [T; 2], psi: [T; 6], r: T, th: T) -> SurfaceJet<T> {
    let [w, wr, wt, wrr, wrt, wtt] = omega_jet(r, th);
    let [p, pr, pt, prr, prt, ptt] = psi;
    let e = p.exp();
    let comb = |f: &dyn Fn(usize) -> T| -> Vec3<T> { [e * f(0), e * f(1), e * f(2)] };
    SurfaceJet {
        f: [center[0] + e * w[0], center[1] + e * w[1], e * w[2]],
        fp: comb(&|i| pr * w[i] + wr[i]),
        fq: comb(&|i| pt * w[i] + wt[i]),
        fpp: comb(&|i| (pr * pr + prr) * w[i] + T::c(2.0) * pr * wr[i] + wrr[i]),
        fpq: comb(&|i| (pr * pt + prt) * w[i] + pr * wt[i] + pt * wr[i] + wrt[i]),
        fqq: comb(&|i| (pt * pt + ptt) * w[i] + T::c(2.0) * pt * wt[i] + wtt[i]),
    }
}

impl<T: Real> Surface<T> for HemisphereGraph<T> {
    fn tag(&self) -> DomainTag {
        DomainTag::HemispherePolar
    }
    fn p_range(&self) -> (T, T) {
        (T::zero(), T::one())
    }
    fn q_period(&self) -> T {
        T::TAU()
    }
    fn ends(&self) -> (End, End) {
        (End::Pole, End::Boundary)
    }
    fn jet(&self, p: T, q: T) -> SurfaceJet<T> {
        polar_jet(self.center, self.field.eval(p, q), p, q)
    }
    fn line(&self, q: T) -> Line<'_, T> {
        let line = self.field.line(q);
        let c = self.center;
        Box::new(move |p| polar_jet(c, line.eval(p), p, q))
    }
    fn euler_characteristic(&self) -> Option<i32> {
        Some(1)
    }
    fn boundary_loops(&self) -> usize {
        1
    }
    fn normal_sign(&self) -> T {
        -T::one()
    }
    fn boundary_length(&self) -> T {
        self.boundary.length()
    }
}

impl<T: Real> Surface<T> for RotationalProfile<T> {
    fn tag(&self) -> DomainTag {
        DomainTag::RotationalProfile
    }
    fn p_range(&self) -> (T, T) {
        self.s_range()
    }
    fn q_period(&self) -> T {
        T::TAU()
    }
    fn ends(&self) -> (End, End) {
        match self.kind {
            ProfileKind::Hemisphere { .. } => (End::Boundary, End::Pole),
            ProfileKind::Annulus { .. } => (End::Boundary, End::Boundary),
        }
    }
    fn jet(&self, p: T, q: T) -> SurfaceJet<T> {
        let [[r, x], [r1, x1], [r2, x2]] = RotationalProfile::jet(self, p);
        let (s, c) = q.sin_cos();
        let z = T::zero();
        SurfaceJet {
            f: [r * c, r * s, x],
            fp: [r1 * c, r1 * s, x1],
            fq: [-r * s, r * c, z],
            fpp: [r2 * c, r2 * s, x2],
            fpq: [-r1 * s, r1 * c, z],
            fqq: [-r * c, -r * s, z],
        }
    }
    fn euler_characteristic(&self) -> Option<i32> {
        Some(match self.kind {
            ProfileKind::Hemisphere { .. } => 1,
            ProfileKind::Annulus { .. } => 0,
        })
    }
    fn boundary_loops(&self) -> usize {
        match self.kind {
            ProfileKind::Hemisphere { .. } => 1,
            ProfileKind::Annulus { .. } => 2,
        }
    }
    fn normal_sign(&self) -> T {
        match self.kind {
            ProfileKind::Hemisphere { .. } => T::one(),
            ProfileKind::Annulus { .. } => -T::one(),
        }
    }
    fn boundary_length(&self) -> T {
        T::TAU() * (self.r1 + self.r2.unwrap_or(T::zero()))
    }
}

/// The graph `u = a·x` over a straight line, one period `length` in `s`,
/// cut at `x_max`. It meets the boundary plane at a nonzero angle.
#[derive(Clone, Debug)]
pub struct TiltedStrip<T> {
    pub slope: T,
    pub length: T,
    pub x_max: T,
}

impl<T: Real> Surface<T> for TiltedStrip<T> {
    fn tag(&self) -> DomainTag {
        DomainTag::CollarStrip
    }
    fn p_range(&self) -> (T, T) {
        (T::zero(), self.x_max)
    }
    fn q_period(&self) -> T {
        self.length
    }
    fn ends(&self) -> (End, End) {
        (End::Boundary, End::Cut)
    }
    fn jet(&self, p: T, q: T) -> SurfaceJet<T> {
        let z = T::zero();
        SurfaceJet {
            f: [q, self.slope * p, p],
            fp: [z, self.slope, T::one()],
            fq: [T::one(), z, z],
            fpp: [z; 3],
            fpq: [z; 3],
            fqq: [z; 3],
        }
    }
    fn euler_characteristic(&self) -> Option<i32> {
        None
    }
    fn boundary_loops(&self) -> usize {
        1
    }
    fn normal_sign(&self) -> T {
        T::one()
    }
    fn boundary_length(&self) -> T {
        self.length
    }
    fn is_minimal(&self) -> bool {
        false
    }
}

/// The graph `y = b(x, s)` over the vertical plane `y = 0`, one period
/// `length` in `s`, cut at `x_max`, with a compactly supported bump
/// `b = A (1 - r²)⁴ (1 + m cos(2πs/L))`, `r = (x - c)/w`. Not minimal.
#[derive(Clone, Debug)]
pub struct BumpStrip<T> {
    pub length: T,
    pub x_max: T,
    pub amplitude: T,
    pub center: T,
    pub width: T,
    pub modulation: T,
}

impl<T: Real> BumpStrip<T> {
    /// `b` and its derivatives `[b, b_x, b_s, b_xx, b_xs, b_ss]`.
    pub fn height(&self, x: T, s: T) -> [T; 6] {
        let r = (x - self.center) / self.width;
        if r.abs() >= T::one() {
            return [T::zero(); 6];
        }
        let one = T::one();
        let e = one - r * r;
        let (e3, e2) = (e * e * e, e * e);
        let bump = e3 * e;
        let d1 = -T::c(8.0) * r * e3 / self.width;
        let d2 = (T::c(48.0) * r * r * e2 - T::c(8.0) * e3) / (self.width * self.width);
        let k = T::TAU() / self.length;
        let (sn, cs) = (k * s).sin_cos();
        let m = one + self.modulation * cs;
        let ms = -self.modulation * k * sn;
        let mss = -self.modulation * k * k * cs;
        let a = self.amplitude;
        [a * bump * m, a * d1 * m, a * bump * ms, a * d2 * m, a * d1 * ms, a * bump * mss]
    }
}

impl<T: Real> Surface<T> for BumpStrip<T> {
    fn tag(&self) -> DomainTag {
        DomainTag::CollarStrip
    }
    fn p_range(&self) -> (T, T) {
        (T::zero(), self.x_max)
    }
    fn q_period(&self) -> T {
        self.length
    }
    fn ends(&self) -> (End, End) {
        (End::Boundary, End::Cut)
    }
    fn jet(&self, p: T, q: T) -> SurfaceJet<T> {
        let z = T::zero();
        let [b, bx, bs, bxx, bxs, bss] = self.height(p, q);
        SurfaceJet {
            f: [q, b, p],
            fp: [z, bx, T::one()],
            fq: [T::one(), bs, z],
            fpp: [z, bxx, z],
            fpq: [z, bxs, z],
            fqq: [z, bss, z],
        }
    }
    fn euler_characteristic(&self) -> Option<i32> {
        None
    }
    fn boundary_loops(&self) -> usize {
        1
    }
    fn normal_sign(&self) -> T {
        T::one()
    }
    fn boundary_length(&self) -> T {
        self.length
    }
    fn is_minimal(&self) -> bool {
        self.amplitude == T::zero()
    }
}

/// A collar solution `F(x, s) = γ(s) + u(s, x) N̄(s) + x ∂ₓ` as a surface
/// (`p = x`, `q = s`).
#[derive(Clone, Debug)]
pub struct CollarSurface<T> {
    pub boundary: Loop<T>,
    pub length: T,
    pub x_max: T,
    v: ChebFourier<T>,
}

impl<T: Real> CollarSurface<T> {
    /// `boundary` must be the arclength-reparametrized loop the collar was
    /// solved on.
    pub fn new(boundary: Loop<T>, sol: &CollarSolution<T>) -> Self {
        let g = &sol.grid;
        let values: Vec<Vec<T>> = (0..=g.nx).map(|i| (0..g.ns).map(|j| sol.v[g.idx(j, i)]).collect()).collect();
        let v = ChebFourier::from_grid(&values, T::zero(), g.x_max, g.length);
        Self { boundary, length: g.length, x_max: g.x_max, v }
    }
}

impl<T: Real> Surface<T> for CollarSurface<T> {
    fn tag(&self) -> DomainTag {
        DomainTag::CollarStrip
    }
    fn p_range(&self) -> (T, T) {
        (T::zero(), self.x_max)
    }
    fn q_period(&self) -> T {
        self.length
    }
    fn ends(&self) -> (End, End) {
        (End::Boundary, End::Cut)
    }
    fn jet(&self, x: T, s: T) -> SurfaceJet<T> {
        let [v, vx, vs, vxx, vsx, vss] = self.v.eval(x, s);
        let two = T::c(2.0);
        let x2 = x * x;
        let (u, us, ux, uss, usx, uxx) =
            (x2 * v, x2 * vs, two * x * v + x2 * vx, x2 * vss, two * x * vs + x2 * vsx, two * v + T::c(4.0) * x * vx + x2 * vxx);
        let sig = T::TAU() * s / self.length;
        let gamma = self.boundary.point(sig);
        let t = self.boundary.unit_tangent(sig);
        let n = self.boundary.normal(sig);
        let k = self.boundary.curvature(sig);
        let w = T::one() - k * u;
        let ks = self.boundary.curvature_s(sig);
        let ws = -ks * u - k * us;
        let z = T::zero();
        let lift = |a: T, b: T| [a * t[0] + b * n[0], a * t[1] + b * n[1], z];
        let fs = lift(w, us);
        let mut fx = lift(z, ux);
        fx[2] = T::one();
        SurfaceJet {
            f: [gamma[0] + u * n[0], gamma[1] + u * n[1], x],
            fp: fx,
            fq: fs,
            fpp: lift(z, uxx),
            fpq: lift(-k * ux, usx),
            fqq: lift(ws - k * us, uss + k * w),
        }
    }
    fn euler_characteristic(&self) -> Option<i32> {
        None
    }
    fn boundary_loops(&self) -> usize {
        1
    }
    fn normal_sign(&self) -> T {
        T::one()
    }
    fn boundary_length(&self) -> T {
        self.length
    }
}

/// Locates the point of `surface` at collar coordinates `(s, x)` over a
/// boundary sample: solves `F(p, q) = γ + u N̄ + x ∂ₓ` for `(p, q, u)`.
pub fn locate_collar_point<T: Real, S: Surface<T> + ?Sized>(
    surface: &S,
    gamma: [T; 2],
    normal: [T; 2],
    x: T,
    guess: (T, T),
) -> Result<(T, T, T)> {
    let (mut p, mut q) = guess;
    let mut u = T::zero();
    let (lo, hi) = surface.p_range();
    for _ in 0..60 {
        let j = surface.jet(p, q);
        let res = [j.f[0] - gamma[0] - u * normal[0], j.f[1] - gamma[1] - u * normal[1], j.f[2] - x];
        let a = [[j.fp[0], j.fq[0], -normal[0]], [j.fp[1], j.fq[1], -normal[1]], [j.fp[2], j.fq[2], T::zero()]];
        let Some(d) = crate::linalg::solve_small(a, [-res[0], -res[1], -res[2]]) else {
            return Err(Error::DegenerateParametrization("singular collar inversion".into()));
        };
        p = (p + d[0]).max(lo).min(hi);
        q += d[1];
        u += d[2];
        let step = d[0].abs() + d[1].abs() + d[2].abs();
        if step < T::epsilon() * T::c(64.0) {
            return Ok((p, q, u));
        }
    }
    let j = surface.jet(p, q);
    let err = (j.f[2] - x).abs() + (j.f[0] - gamma[0] - u * normal[0]).abs() + (j.f[1] - gamma[1] - u * normal[1]).abs();
    if err < T::c(1e-10) {
        Ok((p, q, u))
    } else {
        Err(Error::DegenerateParametrization(format!("collar inversion did not converge ({:.2e})", err.to_f64_lossy())))
    }
}

/// Collar top data `u(s_j, x_max)` read off a polar graph.
pub fn hemisphere_top_data<T: Real>(graph: &HemisphereGraph<T>, samples: &LoopSamples<T>, x_max: T) -> Result<TopData<T>> {
    let mut u = Vec::with_capacity(samples.s.len());
    let mut guess = (T::one(), T::zero());
    for j in 0..samples.s.len() {
        let g = samples.point[j];
        let th = (g[1] - graph.center[1]).atan2(g[0] - graph.center[0]);
        let rho = ((g[0] - graph.center[0]).powi(2) + (g[1] - graph.center[1]).powi(2)).sqrt();
        // hemisphere estimate of the radius at height x_max
        let h = (x_max / rho).min(T::c(0.99));
        let r0 = ((T::one() - h) / (T::one() + h)).sqrt();
        guess = (if j == 0 { r0 } else { guess.0 }, th);
        let (p, q, uu) = locate_collar_point(graph, g, samples.normal[j], x_max, guess)?;
        guess = (p, q);
        u.push(uu);
    }
    Ok(TopData { source: TopSource::HemisphereMatched, u })
}

/// Collar solve over the boundary of a polar graph, matched to the graph at
/// `params.x_max`, and the `u₃` profile extracted from it.
pub fn graph_collar<T: Real>(graph: &HemisphereGraph<T>, params: &CollarParams) -> Result<(CollarSolution<T>, U3Profile<T>)> {
    let curve = BoundaryCurve::new(vec![graph.boundary.clone()])?;
    let samples = curve.arclength()?[0].samples(params.ns);
    let top = hemisphere_top_data(graph, &samples, T::c(params.x_max))?;
    let sol = solve_collar(&samples, &top, params)?;
    let u3 = sol.extract_u3()?;
    Ok((sol, u3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::BoundaryCurve;
    use crate::solver::hemisphere::PolarParams;

    fn fd_check<S: Surface<f64>>(s: &S, p: f64, q: f64) {
        let h = 1e-5;
        let j = s.jet(p, q);
        let jp = s.jet(p + h, q);
        let jm = s.jet(p - h, q);
        let kp = s.jet(p, q + h);
        let km = s.jet(p, q - h);
        for i in 0..3 {
            assert!(((jp.f[i] - jm.f[i]) / (2.0 * h) - j.fp[i]).abs() < 1e-7);
            assert!(((kp.f[i] - km.f[i]) / (2.0 * h) - j.fq[i]).abs() < 1e-7);
            assert!(((jp.fp[i] - jm.fp[i]) / (2.0 * h) - j.fpp[i]).abs() < 1e-6);
            assert!(((kp.fp[i] - km.fp[i]) / (2.0 * h) - j.fpq[i]).abs() < 1e-6);
            assert!(((kp.fq[i] - km.fq[i]) / (2.0 * h) - j.fqq[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn jets_are_consistent() {
        let c = BoundaryCurve::<f64>::ellipse(1.3, 1.0).unwrap();
        let g = crate::solver::hemisphere::solve_hemisphere_graph(&c, &PolarParams { nr: 15, ntheta: 24, ..Default::default() }).unwrap();
        fd_check(&g, 0.6, 0.4);
        let ann = crate::solver::rotational::solve_rotational(1.0f64, Some(1.5), crate::solver::rotational::Branch::Shallow).unwrap();
        fd_check(&ann, 0.3, 1.1);
        fd_check(&TiltedStrip { slope: 0.3, length: 2.0, x_max: 0.5 }, 0.2, 0.3);
        fd_check(&BumpStrip { length: 2.0, x_max: 1.0, amplitude: 0.1, center: 0.5, width: 0.3, modulation: 0.4 }, 0.45, 0.3);
    }

    #[test]
    fn hemisphere_points_lie_on_the_sphere() {
        let g = HemisphereGraph::<f64>::hemisphere([0.5, -0.2], 2.0, &PolarParams::default()).unwrap();
        let j = g.jet(0.37, 2.1);
        let r2 = (j.f[0] - 0.5).powi(2) + (j.f[1] + 0.2).powi(2) + j.f[2].powi(2);
        assert!((r2 - 4.0).abs() < 1e-13);
        let c = BoundaryCurve::circle([0.5, -0.2], 2.0).unwrap();
        let samples = c.arclength().unwrap()[0].samples(8);
        let top = hemisphere_top_data(&g, &samples, 0.5).unwrap();
        for u in top.u {
            assert!((u - (2.0 - (4.0f64 - 0.25).sqrt())).abs() < 1e-12);
        }
    }
}
