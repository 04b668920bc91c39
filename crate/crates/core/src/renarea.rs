//! Renormalized area: Hadamard regularization of truncated areas and the
//! local Gauss–Bonnet formula.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::point_forms;
use crate::linalg::{least_squares, Matrix};
use crate::scalar::Real;
use crate::spectral::{chebyshev_nodes, gauss_legendre};
use crate::surface::{cross, dot3, Surface, SurfaceJet};

/// Quadrature resolution for surface integrals.
#[derive(Clone, Debug, Serialize)]
pub struct Quadrature {
    /// Trapezoid nodes in the periodic direction.
    pub nq: usize,
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Panels for integrals over the whole parameter interval.
    pub panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { nq: 128, order: 16, panels: 8 }
    }
}

impl Quadrature {
    fn nq_for<T: Real, S: Surface<T> + ?Sized>(&self, s: &S) -> usize {
        if s.tag() == crate::surface::DomainTag::RotationalProfile {
            1
        } else {
            self.nq
        }
    }
}

/// Smallest truncation height accepted, relative to the boundary scale.
const MIN_RELATIVE_EPS: f64 = 1e-7;

fn crossing<T: Real>(line: &dyn Fn(T) -> SurfaceJet<T>, height: &dyn Fn(T) -> T, eps: T, a: T, b: T) -> T {
    let ga = height(line(a).f[2]) - eps;
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = (lo + hi) * T::c(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = height(line(mid).f[2]) - eps;
        if (gm < T::zero()) == (ga < T::zero()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * T::c(0.5)
}

/// Sub-intervals of `[lo, hi]` where `height(x) ≥ ε`, with the crossing
/// points flagged.
fn intervals<T: Real>(line: &dyn Fn(T) -> SurfaceJet<T>, lo: T, hi: T, height: &dyn Fn(T) -> T, eps: T) -> Vec<(T, T, bool, bool)> {
    let ps = chebyshev_nodes(96, lo, hi);
    let vals: Vec<T> = ps.iter().map(|&p| height(line(p).f[2]) - eps).collect();
    let mut out = Vec::new();
    let mut start: Option<(T, bool)> = if vals[0] >= T::zero() { Some((lo, false)) } else { None };
    for i in 1..ps.len() {
        let (a, b) = (vals[i - 1] >= T::zero(), vals[i] >= T::zero());
        if a != b {
            let c = crossing(line, height, eps, ps[i - 1], ps[i]);
            if b {
                start = Some((c, true));
            } else if let Some((s, sc)) = start.take() {
                out.push((s, c, sc, true));
            }
        }
    }
    if let Some((s, sc)) = start {
        out.push((s, hi, sc, false));
    }
    out
}

/// Panels on `[a, b]` graded geometrically towards flagged ends, starting
/// from widths `wa`, `wb`.
fn graded_panels<T: Real>(a: T, b: T, wa: Option<T>, wb: Option<T>, uniform: usize) -> Vec<(T, T)> {
    let one_side = |from: T, to: T, w0: T| -> Vec<(T, T)> {
        let len = (to - from).abs();
        let dir = if to > from { T::one() } else { -T::one() };
        let mut out = Vec::new();
        let mut pos = T::zero();
        let mut w = w0.max(len * T::c(1e-15)).min(len);
        while pos < len {
            let mut next = (pos + w).min(len);
            if len - next < w {
                next = len;
            }
            out.push((from + dir * pos, from + dir * next));
            pos = next;
            w *= T::c(2.0);
        }
        out
    };
    match (wa, wb) {
        (None, None) => {
            let n = uniform.max(1);
            (0..n).map(|i| (a + (b - a) * T::n(i) / T::n(n), a + (b - a) * T::n(i + 1) / T::n(n))).collect()
        }
        (Some(w), None) => one_side(a, b, w),
        (None, Some(w)) => {
            let mut v: Vec<(T, T)> = one_side(b, a, w).into_iter().map(|(x, y)| (y, x)).collect();
            v.reverse();
            v
        }
        (Some(w1), Some(w2)) => {
            let m = (a + b) * T::c(0.5);
            let mut v = one_side(a, m, w1);
            let mut r: Vec<(T, T)> = one_side(b, m, w2).into_iter().map(|(x, y)| (y, x)).collect();
            r.reverse();
            v.extend(r);
            v
        }
    }
}

/// Integrates `density(jet) dp dq` over `{height(x) ≥ ε}` (or the whole
/// domain when `eps` is `None`).
pub fn integrate<T: Real, S: Surface<T> + ?Sized>(
    surface: &S,
    eps: Option<T>,
    height: &(dyn Fn(T) -> T + Sync),
    quad: &Quadrature,
    density: &(dyn Fn(&SurfaceJet<T>) -> Result<T> + Sync),
) -> Result<T> {
    let nq = quad.nq_for(surface);
    let period = surface.q_period();
    let (lo, hi) = surface.p_range();
    let (gx, gw) = gauss_legendre::<T>(quad.order, -T::one(), T::one());
    let per_line: Vec<Result<T>> = (0..nq)
        .into_par_iter()
        .map(|j| {
            let q = period * T::n(j) / T::n(nq);
            let line = surface.line(q);
            let spans = match eps {
                Some(e) => intervals(&*line, lo, hi, height, e),
                None => vec![(lo, hi, false, false)],
            };
            let mut total = T::zero();
            for (a, b, ca, cb) in spans {
                let width = |p: T| {
                    let slope = line(p).fp[2].abs();
                    eps.map(|e| e * T::c(0.25) / slope.max(T::epsilon()))
                };
                let wa = if ca { width(a) } else { None };
                let wb = if cb { width(b) } else { None };
                for (pa, pb) in graded_panels(a, b, wa, wb, quad.panels) {
                    let half = (pb - pa) * T::c(0.5);
                    let mid = (pb + pa) * T::c(0.5);
                    for k in 0..gx.len() {
                        let jet = line(mid + half * gx[k]);
                        total += gw[k] * half * density(&jet)?;
                    }
                }
            }
            Ok(total)
        })
        .collect();
    let mut sum = T::zero();
    for v in per_line {
        sum += v?;
    }
    Ok(sum * period / T::n(nq))
}

fn area_density<T: Real>(j: &SurfaceJet<T>) -> Result<T> {
    let n = cross(j.fp, j.fq);
    Ok(dot3(n, n).sqrt() / (j.f[2] * j.f[2]))
}

fn check_eps<T: Real, S: Surface<T> + ?Sized>(surface: &S, eps: T) -> Result<()> {
    let min = surface.boundary_length() / T::TAU() * T::c(MIN_RELATIVE_EPS);
    if !(eps >= min) {
        return Err(Error::EpsilonBelowResolution { eps: eps.to_f64_lossy(), min: min.to_f64_lossy() });
    }
    Ok(())
}

/// Hyperbolic area of `Y ∩ {x ≥ ε}`.
pub fn truncated_area<T: Real, S: Surface<T> + ?Sized>(surface: &S, eps: T, quad: &Quadrature) -> Result<T> {
    truncated_area_with(surface, eps, &|x| x, quad)
}

/// Hyperbolic area of `Y ∩ {x̂ ≥ ε}` for another defining function `x̂(x)`.
pub fn truncated_area_with<T: Real, S: Surface<T> + ?Sized>(
    surface: &S,
    eps: T,
    height: &(dyn Fn(T) -> T + Sync),
    quad: &Quadrature,
) -> Result<T> {
    check_eps(surface, eps)?;
    integrate(surface, Some(eps), height, quad, &area_density)
}

/// Euclidean length of the level set `{x = ε}`.
pub fn level_length<T: Real, S: Surface<T> + ?Sized>(surface: &S, eps: T, quad: &Quadrature) -> Result<T> {
    check_eps(surface, eps)?;
    let nq = quad.nq_for(surface);
    let period = surface.q_period();
    let (lo, hi) = surface.p_range();
    let id = |x: T| x;
    let mut total = T::zero();
    for j in 0..nq {
        let q = period * T::n(j) / T::n(nq);
        let line = surface.line(q);
        for (a, b, ca, cb) in intervals(&*line, lo, hi, &id, eps) {
            for (p, c) in [(a, ca), (b, cb)] {
                if c {
                    let jt = line(p);
                    let dpdq = -jt.fq[2] / jt.fp[2];
                    let t: [T; 3] = std::array::from_fn(|i| jt.fq[i] + jt.fp[i] * dpdq);
                    total += dot3(t, t).sqrt();
                }
            }
        }
    }
    Ok(total * period / T::n(nq))
}

/// Parameters `(p, q)` of the level set `{x = ε}` on `nq` lines.
pub(crate) fn level_points<T: Real, S: Surface<T> + ?Sized>(surface: &S, eps: T, nq: usize) -> Vec<(T, T)> {
    let period = surface.q_period();
    let (lo, hi) = surface.p_range();
    let id = |x: T| x;
    let mut out = Vec::new();
    for j in 0..nq {
        let q = period * T::n(j) / T::n(nq);
        let line = surface.line(q);
        for (a, b, ca, cb) in intervals(&*line, lo, hi, &id, eps) {
            if ca {
                out.push((a, q));
            }
            if cb {
                out.push((b, q));
            }
        }
    }
    out
}

/// `ε_k = ε_max · ratio^k`, `k = 0..n`.
pub fn geometric_schedule<T: Real>(eps_max: T, ratio: T, n: usize) -> Vec<T> {
    (0..n).map(|k| eps_max * ratio.powi(k as i32)).collect()
}

/// Largest height `x` on `nq` parameter lines.
pub fn max_height<T: Real, S: Surface<T> + ?Sized>(surface: &S, nq: usize) -> T {
    let (lo, hi) = surface.p_range();
    let period = surface.q_period();
    let ps = chebyshev_nodes(64, lo, hi);
    let mut best = T::zero();
    for j in 0..nq {
        let line = surface.line(period * T::n(j) / T::n(nq));
        for &p in &ps {
            best = best.max(line(p).f[2]);
        }
    }
    best
}

/// Geometric schedule starting at a fixed fraction of the surface height,
/// so that every `ε` lies in the boundary-asymptotic regime.
pub fn default_schedule<T: Real, S: Surface<T> + ?Sized>(surface: &S) -> Vec<T> {
    let scale = surface.boundary_length() / T::TAU();
    let top = max_height(surface, 16).min(scale);
    geometric_schedule(top * T::c(0.02), T::c(0.5), 8)
}

/// Least-squares fit of `Area(ε) = a/ε + b + c ε + d ε log(1/ε)`.
#[derive(Clone, Debug, Serialize)]
pub struct HadamardFit<T> {
    pub eps: Vec<T>,
    pub areas: Vec<T>,
    /// `[a, b, c, d]`
    pub coefficients: [T; 4],
    /// `b`, the renormalized area.
    pub renarea: T,
    pub error_bar: T,
    pub fit_residual: T,
    pub condition: T,
    pub boundary_length: T,
    /// `a - length(γ)`.
    pub divergent_excess: T,
    /// False when the divergent term does not match `length(γ)/ε`.
    pub well_defined: bool,
    /// Fitted exponent of the excess over `length(γ)/ε`, when flagged.
    pub divergent_exponent: Option<T>,
}

/// Largest condition estimate accepted for the Hadamard fit.
const MAX_CONDITION: f64 = 1e12;
/// Relative mismatch of `a` against `length(γ)` that flags a surface.
const EXCESS_TOLERANCE: f64 = 1e-5;

fn fit_model<T: Real>(eps: &[T], areas: &[T]) -> Result<crate::linalg::LeastSquares<T>> {
    let a = Matrix::from_fn(eps.len(), 4, |i, j| {
        let e = eps[i];
        match j {
            0 => T::one() / e,
            1 => T::one(),
            2 => e,
            _ => -e * e.ln(),
        }
    });
    let fit = least_squares(&a, areas)?;
    if fit.condition.to_f64_lossy() > MAX_CONDITION {
        return Err(Error::IllConditionedFit(fit.condition.to_f64_lossy()));
    }
    Ok(fit)
}

/// Hadamard renormalized area from truncated areas on an `ε` schedule.
pub fn hadamard_renarea<T: Real, S: Surface<T> + ?Sized>(surface: &S, schedule: &[T], quad: &Quadrature) -> Result<HadamardFit<T>> {
    hadamard_renarea_with(surface, schedule, &|x| x, quad)
}

/// As [`hadamard_renarea`], truncating with a different defining function.
pub fn hadamard_renarea_with<T: Real, S: Surface<T> + ?Sized>(
    surface: &S,
    schedule: &[T],
    height: &(dyn Fn(T) -> T + Sync),
    quad: &Quadrature,
) -> Result<HadamardFit<T>> {
    if schedule.len() < 6 {
        return Err(Error::InvalidInput(format!("ε schedule needs at least 6 points, got {}", schedule.len())));
    }
    let areas = schedule.iter().map(|&e| truncated_area_with(surface, e, height, quad)).collect::<Result<Vec<T>>>()?;
    fit_areas(surface.boundary_length(), schedule, areas)
}

/// Fits precomputed truncated areas.
pub fn fit_areas<T: Real>(boundary_length: T, eps: &[T], areas: Vec<T>) -> Result<HadamardFit<T>> {
    let fit = fit_model(eps, &areas)?;
    let n = eps.len();
    let c = [fit.coefficients[0], fit.coefficients[1], fit.coefficients[2], fit.coefficients[3]];
    // dropping the smallest ε probes the sensitivity of b
    let (e2, a2) = drop_smallest(eps, &areas);
    let loo = if e2.len() >= 5 { (fit_model(&e2, &a2)?.coefficients[1] - c[1]).abs() } else { T::zero() };
    let dof = T::n(n.saturating_sub(4).max(1));
    let stat = fit.residual_norm / dof.sqrt() * fit.covariance_diag[1].abs().sqrt();
    let excess = c[0] - boundary_length;
    let well_defined = excess.abs() <= T::c(EXCESS_TOLERANCE) * boundary_length;
    let divergent_exponent = if well_defined { None } else { Some(excess_exponent(boundary_length, eps, &areas)) };
    Ok(HadamardFit {
        eps: eps.to_vec(),
        areas,
        coefficients: c,
        renarea: c[1],
        error_bar: stat.max(loo),
        fit_residual: fit.residual_norm,
        condition: fit.condition,
        boundary_length,
        divergent_excess: excess,
        well_defined,
        divergent_exponent,
    })
}

fn drop_smallest<T: Real>(eps: &[T], areas: &[T]) -> (Vec<T>, Vec<T>) {
    let imin = (0..eps.len()).fold(0, |m, i| if eps[i] < eps[m] { i } else { m });
    let keep: Vec<usize> = (0..eps.len()).filter(|&i| i != imin).collect();
    (keep.iter().map(|&i| eps[i]).collect(), keep.iter().map(|&i| areas[i]).collect())
}

/// Log–log slope of successive differences of `Area(ε) - length/ε`,
/// which removes the constant term.
fn excess_exponent<T: Real>(length: T, eps: &[T], areas: &[T]) -> T {
    let mut idx: Vec<usize> = (0..eps.len()).collect();
    idx.sort_by(|&a, &b| eps[b].partial_cmp(&eps[a]).unwrap_or(std::cmp::Ordering::Equal));
    let e: Vec<T> = idx.iter().map(|&i| areas[i] - length / eps[i]).collect();
    let xs: Vec<T> = idx.windows(2).map(|w| eps[w[0]]).collect();
    let ds: Vec<T> = e.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    crate::expansion::loglog_slope(&xs, &ds)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GbMode {
    Minimal,
    Extended,
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussBonnet<T> {
    pub value: T,
    pub euler_characteristic: i32,
    /// `∫ |k̂|² dA`, evaluated as `∫ |k̂|²_ḡ dA_ḡ`.
    pub khat_integral: T,
    /// `∫ H² dA` (extended mode only).
    pub h2_integral: Option<T>,
    pub quadrature_error: T,
}

/// Height windows for the orthogonality test, relative to the boundary scale.
const ORTHOGONALITY_WINDOWS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// `-2πχ - ½∫|k̂|² dA` (minimal) or `-2πχ + ½∫(2H² - |k̂|²) dA` (extended).
pub fn gauss_bonnet_renarea<T: Real, S: Surface<T> + ?Sized>(surface: &S, mode: GbMode, quad: &Quadrature) -> Result<GaussBonnet<T>> {
    let sign = surface.normal_sign();
    let scale = surface.boundary_length() / T::TAU();
    let id = |x: T| x;
    // H = O(x) at the boundary is what makes |k̂|² dA integrable
    let h2 = |j: &SurfaceJet<T>| -> Result<T> {
        let f = point_forms(j, sign)?;
        Ok(f.h * f.h * f.area)
    };
    let windows: Vec<T> = ORTHOGONALITY_WINDOWS
        .iter()
        .map(|&w| integrate(surface, Some(scale * T::c(w)), &id, quad, &h2))
        .collect::<Result<_>>()?;
    let growth = [windows[1] - windows[0], windows[2] - windows[1]];
    let diverging = growth[1] > T::c(3.0) * growth[0].abs() && growth[1] > T::c(1e-6) * (T::one() + windows[0].abs());
    if diverging {
        return Err(Error::NonOrthogonal(format!(
            "∫H² dA over x ≥ ε grows like 1/ε: {:.3e}, {:.3e}, {:.3e}",
            windows[0].to_f64_lossy(),
            windows[1].to_f64_lossy(),
            windows[2].to_f64_lossy()
        )));
    }
    let chi = surface
        .euler_characteristic()
        .ok_or_else(|| Error::InvalidInput("Gauss–Bonnet needs a surface without cuts".into()))?;
    let khat = |j: &SurfaceJet<T>| -> Result<T> {
        let f = point_forms(j, sign)?;
        Ok(f.khat2_bar * f.area_bar)
    };
    let fine = integrate(surface, None, &id, quad, &khat)?;
    let coarse_quad = Quadrature { order: quad.order * 3 / 4, ..quad.clone() };
    let coarse = integrate(surface, None, &id, &coarse_quad, &khat)?;
    let base = -T::TAU() * T::c(chi as f64) - T::c(0.5) * fine;
    let (value, h2_integral) = match mode {
        GbMode::Minimal => (base, None),
        GbMode::Extended => (base + windows[2], Some(windows[2])),
    };
    Ok(GaussBonnet { value, euler_characteristic: chi, khat_integral: fine, h2_integral, quadrature_error: (fine - coarse).abs() * T::c(0.5) })
}

/// Upper end of the renormalized area spectrum, `2π(2k + ℓ - 2)`.
pub fn spectrum_bounds(genus: u32, loops: u32) -> Result<f64> {
    if loops == 0 {
        return Err(Error::InvalidInput("need at least one boundary component".into()));
    }
    Ok(std::f64::consts::TAU * (2.0 * genus as f64 + loops as f64 - 2.0))
}

/// Combined renormalized area report for one surface.
#[derive(Clone, Debug, Serialize)]
pub struct RenAreaReport<T> {
    /// Identifies the boundary curve; compared surfaces must agree.
    pub boundary_id: String,
    pub label: String,
    pub euler_characteristic: i32,
    pub boundary_loops: usize,
    pub genus: u32,
    pub hadamard: HadamardFit<T>,
    pub gauss_bonnet: GaussBonnet<T>,
    pub discrepancy: T,
    pub spectrum_bound: f64,
    /// `bound - 𝒜`; zero only for hemispheres.
    pub spectrum_margin: f64,
}

/// Runs both methods on a surface.
pub fn renarea_report<T: Real, S: Surface<T> + ?Sized>(
    surface: &S,
    boundary_id: &str,
    label: &str,
    schedule: &[T],
    quad: &Quadrature,
) -> Result<RenAreaReport<T>> {
    let hadamard = hadamard_renarea(surface, schedule, quad)?;
    let gauss_bonnet = gauss_bonnet_renarea(surface, GbMode::Minimal, quad)?;
    let chi = gauss_bonnet.euler_characteristic;
    let loops = surface.boundary_loops();
    let genus = ((2 - chi - loops as i32) / 2).max(0) as u32;
    let bound = spectrum_bounds(genus, loops as u32)?;
    Ok(RenAreaReport {
        boundary_id: boundary_id.into(),
        label: label.into(),
        euler_characteristic: chi,
        boundary_loops: loops,
        genus,
        discrepancy: (hadamard.renarea - gauss_bonnet.value).abs(),
        spectrum_margin: bound - gauss_bonnet.value.to_f64_lossy(),
        spectrum_bound: bound,
        hadamard,
        gauss_bonnet,
    })
}

impl<T: Real> RenAreaReport<T> {
    /// Report for a disjoint union of two surfaces spanning the union of
    /// their boundaries; both must share the `ε` schedule.
    pub fn disjoint_union(&self, other: &Self, boundary_id: &str, label: &str) -> Result<Self> {
        if self.hadamard.eps != other.hadamard.eps {
            return Err(Error::GridMismatch("ε schedules differ".into()));
        }
        let areas = self.hadamard.areas.iter().zip(&other.hadamard.areas).map(|(a, b)| *a + *b).collect();
        let hadamard = fit_areas(self.hadamard.boundary_length + other.hadamard.boundary_length, &self.hadamard.eps, areas)?;
        let gb = GaussBonnet {
            value: self.gauss_bonnet.value + other.gauss_bonnet.value,
            euler_characteristic: self.euler_characteristic + other.euler_characteristic,
            khat_integral: self.gauss_bonnet.khat_integral + other.gauss_bonnet.khat_integral,
            h2_integral: None,
            quadrature_error: self.gauss_bonnet.quadrature_error + other.gauss_bonnet.quadrature_error,
        };
        let loops = self.boundary_loops + other.boundary_loops;
        Ok(Self {
            boundary_id: boundary_id.into(),
            label: label.into(),
            euler_characteristic: gb.euler_characteristic,
            boundary_loops: loops,
            genus: 0,
            discrepancy: (hadamard.renarea - gb.value).abs(),
            spectrum_bound: f64::NAN,
            spectrum_margin: f64::NAN,
            hadamard,
            gauss_bonnet: gb,
        })
    }

    /// Best estimate of 𝒜 (Gauss–Bonnet, the better conditioned method).
    pub fn value(&self) -> T {
        self.gauss_bonnet.value
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizerComparison {
    /// Labels in increasing order of renormalized area.
    pub order: Vec<String>,
    pub values: Vec<f64>,
    /// Inconsistencies between the 𝒜 ordering and the truncated-area
    /// ordering at the smallest common `ε`.
    pub flags: Vec<String>,
}

/// Orders competing surfaces with the same boundary. With equal
/// divergent terms, the truncated-area ordering at small `ε` must agree
/// with the 𝒜 ordering once the gap exceeds `tol`.
pub fn compare_minimizers<T: Real>(reports: &[RenAreaReport<T>], tol: T) -> Result<MinimizerComparison> {
    let Some(first) = reports.first() else {
        return Err(Error::InvalidInput("no reports to compare".into()));
    };
    if reports.iter().any(|r| r.boundary_id != first.boundary_id) {
        return Err(Error::BoundaryMismatch);
    }
    let mut idx: Vec<usize> = (0..reports.len()).collect();
    idx.sort_by(|&a, &b| reports[a].value().partial_cmp(&reports[b].value()).unwrap_or(std::cmp::Ordering::Equal));
    let mut flags = Vec::new();
    for w in idx.windows(2) {
        let (a, b) = (&reports[w[0]], &reports[w[1]]);
        if b.value() - a.value() <= tol || a.hadamard.eps != b.hadamard.eps {
            continue;
        }
        let k = (0..a.hadamard.eps.len()).fold(0, |m, i| if a.hadamard.eps[i] < a.hadamard.eps[m] { i } else { m });
        if a.hadamard.areas[k] > b.hadamard.areas[k] {
            flags.push(format!("{} has smaller 𝒜 than {} but larger truncated area at ε = {:.3e}", a.label, b.label, a.hadamard.eps[k].to_f64_lossy()));
        }
    }
    Ok(MinimizerComparison {
        order: idx.iter().map(|&i| reports[i].label.clone()).collect(),
        values: idx.iter().map(|&i| reports[i].value().to_f64_lossy()).collect(),
        flags,
    })
}

/// Change of the Hadamard constant when truncating by `x̂ = x(1 + βx²)`,
/// another defining function inducing the same boundary metric.
pub fn representative_shift<T: Real, S: Surface<T> + ?Sized>(surface: &S, schedule: &[T], beta: T, quad: &Quadrature) -> Result<T> {
    let base = hadamard_renarea(surface, schedule, quad)?;
    let alt = hadamard_renarea_with(surface, schedule, &|x| x * (T::one() + beta * x * x), quad)?;
    Ok((alt.renarea - base.renarea).abs())
}
