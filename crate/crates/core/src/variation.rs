//! Jacobi operator, indicial roots, the Dirichlet-to-Neumann map and the
//! first and second variation of the renormalized area.
//!
//! Boundary data of Jacobi fields are stored in the compactified collar
//! normalization `φ̄ = φ̇₀ + φ̇₂x² + φ̇₃x³ + …`, where `φ̄` is the `ḡ`-normal
//! component of the variation field. The hyperbolic normal component is
//! `x⁻¹φ̄`.

use serde::{Deserialize, Serialize};

use crate::curves::{ArclengthLoop, BoundaryCurve};
use crate::error::{Error, Result};
use crate::geometry::point_forms;
use crate::linalg::{least_squares, Lu, Matrix};
use crate::renarea::{integrate, level_points, Quadrature};
use crate::scalar::Real;
use crate::solver::collar::U3Profile;
use crate::solver::hemisphere::{polar_parameter, HemisphereGraph};
use crate::spectral::{chebyshev_diff_matrix, chebyshev_nodes, clenshaw_curtis_weights, periodic_diff_matrices};
use crate::surface::{dot3, locate_collar_point, Surface, SurfaceJet};

/// `L = Δ_g + |A|² - 2` discretized on a Chebyshev × Fourier patch
/// `p ∈ [a, b]` of a surface.
#[derive(Clone, Debug)]
pub struct JacobiOperator<T> {
    pub np: usize,
    pub nq: usize,
    pub p: Vec<T>,
    pub q: Vec<T>,
    /// Surface points at the nodes, `idx = i·nq + j`.
    pub points: Vec<[T; 3]>,
    /// `|A|²` at the nodes.
    pub a2: Vec<T>,
    /// `√det g` at the nodes.
    pub area: Vec<T>,
    /// Fields are read as `x^weight φ` by [`JacobiOperator::apply_weighted`].
    pub weight: T,
    ginv: Vec<[[T; 2]; 2]>,
    dp: Matrix<T>,
    dq: Matrix<T>,
    quad_weights: Vec<T>,
}

impl<T: Real> JacobiOperator<T> {
    /// `np` Chebyshev intervals on `[a, b]`, `nq` (even) periodic nodes.
    pub fn new<S: Surface<T> + ?Sized>(surface: &S, a: T, b: T, np: usize, nq: usize) -> Result<Self> {
        if nq < 4 || nq % 2 == 1 {
            return Err(Error::InvalidInput(format!("periodic node count must be even and at least 4, got {nq}")));
        }
        let p = chebyshev_nodes(np, a, b);
        let period = surface.q_period();
        let q: Vec<T> = (0..nq).map(|j| period * T::n(j) / T::n(nq)).collect();
        let sign = surface.normal_sign();
        let cc = clenshaw_curtis_weights(np, a, b);
        let n = (np + 1) * nq;
        let (mut points, mut a2, mut area, mut ginv, mut quad_weights) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for (i, &pi) in p.iter().enumerate() {
            for &qj in &q {
                let jet = surface.jet(pi, qj);
                let f = point_forms(&jet, sign)?;
                let det = f.g[0][0] * f.g[1][1] - f.g[0][1] * f.g[1][0];
                ginv.push([[f.g[1][1] / det, -f.g[0][1] / det], [-f.g[1][0] / det, f.g[0][0] / det]]);
                points.push(jet.f);
                a2.push(f.a2);
                area.push(f.area);
                quad_weights.push(cc[i] * period / T::n(nq) * f.area);
            }
        }
        Ok(Self {
            np,
            nq,
            dp: chebyshev_diff_matrix(np, a, b),
            dq: periodic_diff_matrices(nq, period).0,
            p,
            q,
            points,
            a2,
            area,
            weight: T::zero(),
            ginv,
            quad_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Samples `f(point)` at the nodes.
    pub fn sample(&self, f: impl Fn([T; 3]) -> T) -> Vec<T> {
        self.points.iter().map(|&x| f(x)).collect()
    }

    fn diff(&self, f: &[T]) -> (Vec<T>, Vec<T>) {
        let (np, nq) = (self.np + 1, self.nq);
        let mut fp = vec![T::zero(); f.len()];
        let mut fq = vec![T::zero(); f.len()];
        for i in 0..np {
            for j in 0..nq {
                let mut a = T::zero();
                for k in 0..np {
                    a += self.dp[(i, k)] * f[k * nq + j];
                }
                let mut b = T::zero();
                for k in 0..nq {
                    b += self.dq[(j, k)] * f[i * nq + k];
                }
                fp[i * nq + j] = a;
                fq[i * nq + j] = b;
            }
        }
        (fp, fq)
    }

    /// `L φ` in divergence form, `Δφ = (√g)⁻¹ ∂_i(√g g^{ij} ∂_j φ)`.
    pub fn apply(&self, phi: &[T]) -> Vec<T> {
        let (fp, fq) = self.diff(phi);
        let n = phi.len();
        let mut flux_p = vec![T::zero(); n];
        let mut flux_q = vec![T::zero(); n];
        for k in 0..n {
            let gi = &self.ginv[k];
            flux_p[k] = self.area[k] * (gi[0][0] * fp[k] + gi[0][1] * fq[k]);
            flux_q[k] = self.area[k] * (gi[1][0] * fp[k] + gi[1][1] * fq[k]);
        }
        let (dpp, _) = self.diff(&flux_p);
        let (_, dqq) = self.diff(&flux_q);
        (0..n).map(|k| (dpp[k] + dqq[k]) / self.area[k] + (self.a2[k] - T::c(2.0)) * phi[k]).collect()
    }

    /// `x^{-μ} L(x^μ φ)` with `μ = self.weight`.
    pub fn apply_weighted(&self, phi: &[T]) -> Vec<T> {
        let w: Vec<T> = self.points.iter().map(|p| p[2].powf(self.weight)).collect();
        let lifted: Vec<T> = phi.iter().zip(&w).map(|(a, b)| *a * *b).collect();
        self.apply(&lifted).iter().zip(&w).map(|(a, b)| *a / *b).collect()
    }

    /// `∫ f h dA` over the patch.
    pub fn inner(&self, f: &[T], h: &[T]) -> T {
        f.iter().zip(h).zip(&self.quad_weights).fold(T::zero(), |s, ((a, b), w)| s + *a * *b * *w)
    }
}

pub fn jacobi_apply<T: Real>(op: &JacobiOperator<T>, phi: &[T]) -> Vec<T> {
    op.apply(phi)
}

/// Characteristic exponents of `L φ = 0` at the boundary in the hyperbolic
/// normalization (`+1` in the collar normalization).
#[derive(Clone, Debug, Serialize)]
pub struct IndicialRoots<T> {
    pub roots: (T, T),
    /// Largest deviation of the per-sample roots from the mean.
    pub spread: T,
    pub samples: usize,
}

/// Heights used to extrapolate the normal operator to `x = 0`, relative to
/// the boundary scale.
const INDICIAL_HEIGHTS: [f64; 7] = [2e-2, 1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4];

/// For `φ = x^μ`, `x^{-μ} L φ = μ(μ-1)(1 - (ν̄ˣ)²) - 2μ x H̄ ν̄ˣ + |A|² - 2`.
/// The three coefficient fields are extrapolated to the boundary along each
/// line and the roots of the limiting quadratic returned.
pub fn indicial_roots<T: Real, S: Surface<T> + ?Sized>(surface: &S, nq: usize) -> Result<IndicialRoots<T>> {
    let scale = surface.boundary_length() / T::TAU();
    let sign = surface.normal_sign();
    let heights: Vec<T> = INDICIAL_HEIGHTS.iter().map(|&h| scale * T::c(h)).collect();
    let levels: Vec<Vec<(T, T)>> = heights.iter().map(|&h| level_points(surface, h, nq)).collect();
    let count = levels[0].len();
    if count == 0 || levels.iter().any(|l| l.len() != count) {
        return Err(Error::IndicialSeparation("level sets near the boundary are not resolved consistently".into()));
    }
    let design = Matrix::from_fn(heights.len(), 4, |i, k| (heights[i] / heights[0]).powi(k as i32));
    let mut roots = Vec::with_capacity(count);
    for m in 0..count {
        let mut cols = [vec![], vec![], vec![]];
        for (h, level) in heights.iter().zip(&levels) {
            let (p, q) = level[m];
            let f = point_forms(&surface.jet(p, q), sign)?;
            let nx = f.nu[2];
            cols[0].push(T::one() - nx * nx);
            cols[1].push(-T::c(2.0) * *h * f.hbar * nx);
            cols[2].push(f.a2 - T::c(2.0));
        }
        let mut c = [T::zero(); 3];
        for k in 0..3 {
            c[k] = least_squares(&design, &cols[k])?.coefficients[0];
        }
        // a μ² + (b - a) μ + c
        let (a, b) = (c[0], c[1] - c[0]);
        let disc = b * b - T::c(4.0) * a * c[2];
        if !(disc > T::c(1e-6)) || a.abs() < T::c(1e-12) {
            return Err(Error::IndicialSeparation(format!("discriminant {:.3e}", disc.to_f64_lossy())));
        }
        let sq = disc.sqrt();
        roots.push(((-b - sq) / (T::c(2.0) * a), (-b + sq) / (T::c(2.0) * a)));
    }
    let n = T::n(count);
    let mean = (roots.iter().fold(T::zero(), |s, r| s + r.0) / n, roots.iter().fold(T::zero(), |s, r| s + r.1) / n);
    let spread = roots.iter().fold(T::zero(), |s, r| s.max((r.0 - mean.0).abs()).max((r.1 - mean.1).abs()));
    Ok(IndicialRoots { roots: mean, spread, samples: count })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `ḡ`-normal component, `φ̄ = φ̇₀ + φ̇₂x² + φ̇₃x³`.
    CompactifiedCollar,
    /// `g`-normal component `x⁻¹φ̄`.
    HyperbolicNormal,
}

/// Boundary coefficients of a Jacobi field on arclength samples.
#[derive(Clone, Debug, Serialize)]
pub struct JacobiBoundaryData<T> {
    pub normalization: Normalization,
    pub length: T,
    pub s: Vec<T>,
    pub phi0: Vec<T>,
    /// Vanishes for Jacobi fields; kept as a consistency check.
    pub phi1: Vec<T>,
    pub phi2: Vec<T>,
    pub phi3: Vec<T>,
    /// Estimated extraction error of `φ̇₃`.
    pub error: Vec<T>,
}

impl<T: Real> JacobiBoundaryData<T> {
    /// `∮ f g ds` by the trapezoid rule on the samples.
    pub fn integrate(&self, f: &[T], g: &[T]) -> T {
        let ds = self.length / T::n(self.s.len());
        f.iter().zip(g).fold(T::zero(), |s, (a, b)| s + *a * *b) * ds
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DnParams {
    /// Arclength samples on the boundary.
    pub samples: usize,
    /// Collar height used for extraction, relative to the best-fit radius.
    pub collar: f64,
    /// Chebyshev intervals on `[0, collar]`.
    pub nodes: usize,
    /// Polynomial degree of the collar fit.
    pub degree: usize,
}

impl Default for DnParams {
    fn default() -> Self {
        Self { samples: 64, collar: 0.25, nodes: 16, degree: 10 }
    }
}

/// Relative smallest-singular-value threshold of the nondegeneracy check.
const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Dirichlet-to-Neumann map of a polar minimal graph: boundary
/// displacement `φ̇₀` to the third collar coefficient `φ̇₃`.
pub struct DnMap<'a, T> {
    graph: &'a HemisphereGraph<T>,
    lu: Lu<T>,
    coupling: Matrix<T>,
    params: DnParams,
    pub length: T,
    /// Arclength of the boundary point on each grid ray.
    ray_s: Vec<T>,
    /// `1/(ρ⟨e_r, N̄⟩)` on each grid ray.
    ray_factor: Vec<T>,
    pub s: Vec<T>,
    pub heights: Vec<T>,
    /// Per sample and height: `(p, q, ⟨F - c, ν̄⟩, u)`.
    collar: Vec<Vec<(T, T, T, T)>>,
    design: Matrix<T>,
    design_low: Matrix<T>,
    /// Smallest singular value of the linearized interior operator.
    pub sigma_min: T,
}

impl<'a, T: Real> DnMap<'a, T> {
    pub fn new(graph: &'a HemisphereGraph<T>, params: &DnParams) -> Result<Self> {
        let jac = graph.grid.jacobian(&graph.psi);
        let (a, coupling) = graph.grid.interior_block(&jac);
        let mut scale = T::zero();
        for i in 0..a.rows() {
            for v in a.row(i) {
                scale = scale.max(v.abs());
            }
        }
        let lu = a.lu()?;
        let (sigma_min, _) = lu.smallest_singular(30);
        if sigma_min < T::c(DEGENERACY_THRESHOLD) * scale {
            return Err(Error::DegenerateSurface { sigma: sigma_min.to_f64_lossy() });
        }
        let curve = BoundaryCurve::new(vec![graph.boundary.clone()])?;
        let arc: ArclengthLoop<T> = curve.arclength()?.remove(0);
        let length = arc.length;
        let ts = polar_parameter(&graph.boundary, graph.center, &graph.grid.theta)?;
        let mut ray_s = Vec::with_capacity(ts.len());
        let mut ray_factor = Vec::with_capacity(ts.len());
        for (&t, &th) in ts.iter().zip(&graph.grid.theta) {
            let pt = graph.boundary.point(t);
            let n = graph.boundary.normal(t);
            let (d0, d1) = (pt[0] - graph.center[0], pt[1] - graph.center[1]);
            let rho = (d0 * d0 + d1 * d1).sqrt();
            let s = arc.s_of_t(t);
            ray_s.push(s - length * (s / length).floor());
            ray_factor.push(T::one() / (rho * (th.cos() * n[0] + th.sin() * n[1])));
        }
        let samples = arc.samples(params.samples);
        let x_c = graph.radius * T::c(params.collar);
        let heights = chebyshev_nodes(params.nodes, T::zero(), x_c);
        let sign = graph.normal_sign();
        let mut collar = Vec::with_capacity(params.samples);
        for j in 0..params.samples {
            let g = samples.point[j];
            let mut guess = (T::one(), (g[1] - graph.center[1]).atan2(g[0] - graph.center[0]));
            let mut line = Vec::with_capacity(heights.len());
            for &x in &heights {
                let (p, q, u) = locate_collar_point(graph, g, samples.normal[j], x, guess)?;
                guess = (p, q);
                let jet = graph.jet(p, q);
                let f = point_forms(&jet, sign)?;
                let rel = [jet.f[0] - graph.center[0], jet.f[1] - graph.center[1], jet.f[2]];
                line.push((p, q, dot3(rel, f.nu), u));
            }
            collar.push(line);
        }
        let vander = |deg: usize| Matrix::from_fn(heights.len(), deg + 1, |i, k| (heights[i] / x_c).powi(k as i32));
        let degree = params.degree.max(5);
        let (design, design_low) = (vander(degree), vander(degree - 2));
        Ok(Self {
            graph,
            lu,
            coupling,
            params: DnParams { degree, ..params.clone() },
            length,
            ray_s,
            ray_factor,
            s: samples.s,
            heights,
            collar,
            design,
            design_low,
            sigma_min,
        })
    }

    /// Taylor coefficients `c₀..c₃` of samples on the collar heights, and
    /// the change in `c₃` when the fit degree drops by two.
    fn taylor(&self, values: &[T]) -> Result<([T; 4], T)> {
        let x_c = graph_collar(self.graph, &self.params);
        let hi = least_squares(&self.design, values)?.coefficients;
        let lo = least_squares(&self.design_low, values)?.coefficients;
        let c: [T; 4] = std::array::from_fn(|k| hi[k] / x_c.powi(k as i32));
        Ok((c, (hi[3] - lo[3]).abs() / x_c.powi(3)))
    }

    /// Solves the Jacobi equation with boundary displacement `φ̇₀(s)` and
    /// reads off its collar coefficients.
    pub fn apply(&self, phi0: &dyn Fn(T) -> T) -> Result<JacobiBoundaryData<T>> {
        let boundary: Vec<T> = self.ray_s.iter().zip(&self.ray_factor).map(|(&s, &f)| phi0(s) * f).collect();
        let dpsi = self.graph.linear_response(&self.lu, &self.coupling, &boundary);
        let n = self.s.len();
        let mut out = JacobiBoundaryData {
            normalization: Normalization::CompactifiedCollar,
            length: self.length,
            s: self.s.clone(),
            phi0: Vec::with_capacity(n),
            phi1: Vec::with_capacity(n),
            phi2: Vec::with_capacity(n),
            phi3: Vec::with_capacity(n),
            error: Vec::with_capacity(n),
        };
        for line in &self.collar {
            let values: Vec<T> = line.iter().map(|&(p, q, radial, _)| dpsi.eval(p, q)[0] * radial).collect();
            let (c, err) = self.taylor(&values)?;
            out.phi0.push(c[0]);
            out.phi1.push(c[1]);
            out.phi2.push(c[2]);
            out.phi3.push(c[3]);
            out.error.push(err);
        }
        Ok(out)
    }

    /// `u₃` of the base graph from the same collar fit.
    pub fn u3_profile(&self) -> Result<U3Profile<T>> {
        let mut value = Vec::with_capacity(self.collar.len());
        let mut error = Vec::with_capacity(self.collar.len());
        for line in &self.collar {
            let values: Vec<T> = line.iter().map(|v| v.3).collect();
            let (c, err) = self.taylor(&values)?;
            value.push(c[3]);
            error.push(err);
        }
        Ok(U3Profile { s: self.s.clone(), length: self.length, value, error })
    }
}

fn graph_collar<T: Real>(graph: &HemisphereGraph<T>, params: &DnParams) -> T {
    graph.radius * T::c(params.collar)
}

pub fn dn_map<T: Real>(dn: &DnMap<'_, T>, phi0: &dyn Fn(T) -> T) -> Result<JacobiBoundaryData<T>> {
    dn.apply(phi0)
}

/// Test hook that corrupts the first variation formula.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    #[default]
    None,
    FlipFirstVariationSign,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: T,
}

/// `-3 ∮ φ̇₀ u₃ ds` on the samples of a `u₃` profile.
pub fn first_variation<T: Real>(u3: &U3Profile<T>, phi0: &dyn Fn(T) -> T) -> Result<Estimate<T>> {
    first_variation_with(u3, phi0, Mutation::None)
}

pub fn first_variation_with<T: Real>(u3: &U3Profile<T>, phi0: &dyn Fn(T) -> T, mutation: Mutation) -> Result<Estimate<T>> {
    if u3.value.is_empty() || u3.value.len() != u3.s.len() {
        return Err(Error::MissingU3);
    }
    let ds = u3.length / T::n(u3.s.len());
    let mut value = T::zero();
    let mut error = T::zero();
    for ((&s, &u), &e) in u3.s.iter().zip(&u3.value).zip(&u3.error) {
        let f = phi0(s);
        value += f * u;
        error += f.abs() * e;
    }
    let sign = if mutation == Mutation::FlipFirstVariationSign { T::c(3.0) } else { -T::c(3.0) };
    Ok(Estimate { value: sign * value * ds, error: T::c(3.0) * error * ds })
}

/// `2 ∫ H φ̇ dA` for a variation `φ̇(p, q, jet)` (hyperbolic normal
/// component) supported in `{x ≥ min_height}`.
pub fn first_variation_nonminimal<T: Real, S: Surface<T> + ?Sized>(
    surface: &S,
    phi: &(dyn Fn(T, T, &SurfaceJet<T>) -> T + Sync),
    min_height: T,
    quad: &Quadrature,
) -> Result<T> {
    if !(min_height > T::zero()) {
        return Err(Error::SupportTouchesBoundary(min_height.to_f64_lossy()));
    }
    let sign = surface.normal_sign();
    let (lo, hi) = surface.p_range();
    let period = surface.q_period();
    // quadrature lines do not expose (p, q), so recover them from the jet
    let touched = std::sync::Mutex::new(None);
    let density = |j: &SurfaceJet<T>| -> Result<T> {
        let (p, q) = parameter_of(surface, j, lo, hi, period);
        let v = phi(p, q, j);
        if j.f[2] < min_height && v != T::zero() {
            *touched.lock().expect("poisoned") = Some(j.f[2]);
        }
        let f = point_forms(j, sign)?;
        Ok(T::c(2.0) * f.h * v * f.area)
    };
    let value = integrate(surface, Some(min_height * T::c(0.5)), &|x| x, quad, &density)?;
    if let Some(x) = touched.into_inner().expect("poisoned") {
        return Err(Error::SupportTouchesBoundary(x.to_f64_lossy()));
    }
    Ok(value)
}

fn parameter_of<T: Real, S: Surface<T> + ?Sized>(surface: &S, j: &SurfaceJet<T>, lo: T, hi: T, period: T) -> (T, T) {
    // Newton on F(p, q) = j.f from the nearest of a coarse set of guesses
    let mut best = (lo, T::zero());
    let mut dist = T::infinity();
    for a in 0..9 {
        for b in 0..16 {
            let p = lo + (hi - lo) * T::n(a) / T::c(8.0);
            let q = period * T::n(b) / T::c(16.0);
            let f = surface.jet(p, q).f;
            let d = (0..3).fold(T::zero(), |s, i| s + (f[i] - j.f[i]).powi(2));
            if d < dist {
                dist = d;
                best = (p, q);
            }
        }
    }
    let (mut p, mut q) = best;
    for _ in 0..30 {
        let k = surface.jet(p, q);
        let r: [T; 3] = std::array::from_fn(|i| k.f[i] - j.f[i]);
        let (a, b, c) = (dot3(k.fp, k.fp), dot3(k.fp, k.fq), dot3(k.fq, k.fq));
        let (ra, rb) = (dot3(k.fp, r), dot3(k.fq, r));
        let det = a * c - b * b;
        if det == T::zero() {
            break;
        }
        let dp = (c * ra - b * rb) / det;
        let dq = (a * rb - b * ra) / det;
        p = (p - dp).max(lo).min(hi);
        q -= dq;
        if dp.abs() + dq.abs() < T::epsilon() * T::c(16.0) {
            break;
        }
    }
    (p, q)
}

/// `-3 ∮ φ̇₀ 𝒟φ̇₀ ds`.
pub fn second_variation<T: Real>(dn: &DnMap<'_, T>, phi0: &dyn Fn(T) -> T) -> Result<Estimate<T>> {
    second_variation_bilinear(dn, phi0, phi0)
}

/// `-3 ∮ φ̇₀ 𝒟ψ̇₀ ds`.
pub fn second_variation_bilinear<T: Real>(dn: &DnMap<'_, T>, phi0: &dyn Fn(T) -> T, psi0: &dyn Fn(T) -> T) -> Result<Estimate<T>> {
    let d = dn.apply(psi0)?;
    let f: Vec<T> = d.s.iter().map(|&s| phi0(s)).collect();
    let abs_f: Vec<T> = f.iter().map(|v| v.abs()).collect();
    Ok(Estimate { value: -T::c(3.0) * d.integrate(&f, &d.phi3), error: T::c(3.0) * d.integrate(&abs_f, &d.error) })
}

/// Central differences of a one-parameter family at `t = 0` from the
/// values at `t ∈ {-2h, -h, 0, h, 2h}`.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyDifferences<T> {
    pub steps: Vec<T>,
    pub values: Vec<T>,
    /// Four-point first derivative and its change from the two-point one.
    pub first: Estimate<T>,
    /// Five-point second derivative and its change from the three-point one.
    pub second: Estimate<T>,
}

pub fn family_differences<T: Real>(h: T, mut eval: impl FnMut(T) -> Result<T>) -> Result<FamilyDifferences<T>> {
    let two = T::c(2.0);
    let steps = vec![-two * h, -h, T::zero(), h, two * h];
    let values = steps.iter().map(|&t| eval(t)).collect::<Result<Vec<T>>>()?;
    let [m2, m1, z, p1, p2] = [values[0], values[1], values[2], values[3], values[4]];
    let twelve = T::c(12.0);
    let d4 = (m2 - T::c(8.0) * m1 + T::c(8.0) * p1 - p2) / (twelve * h);
    let d2 = (p1 - m1) / (two * h);
    let s5 = (-m2 + T::c(16.0) * m1 - T::c(30.0) * z + T::c(16.0) * p1 - p2) / (twelve * h * h);
    let s3 = (p1 - two * z + m1) / (h * h);
    Ok(FamilyDifferences {
        steps,
        values,
        first: Estimate { value: d4, error: (d4 - d2).abs() },
        second: Estimate { value: s5, error: (s5 - s3).abs() },
    })
}

/// Analytic value against a finite-difference estimate.
#[derive(Clone, Debug, Serialize)]
pub struct VariationCheck<T> {
    pub analytic: Estimate<T>,
    pub finite_difference: Estimate<T>,
    pub steps: Vec<T>,
    pub discrepancy: T,
}

impl<T: Real> VariationCheck<T> {
    pub fn new(analytic: Estimate<T>, finite_difference: Estimate<T>, steps: Vec<T>) -> Self {
        Self { discrepancy: (analytic.value - finite_difference.value).abs(), analytic, finite_difference, steps }
    }

    /// Within `rel` relative, or `abs` when the reference is near zero.
    pub fn agrees(&self, rel: T, abs: T) -> bool {
        self.discrepancy <= abs.max(rel * self.finite_difference.value.abs())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VariationReport<T> {
    pub label: String,
    pub first: Option<VariationCheck<T>>,
    pub second: Option<VariationCheck<T>>,
}
