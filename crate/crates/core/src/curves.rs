//! Closed embedded plane curves stored as truncated Fourier series.
//!
//! Every loop is stored counterclockwise. The normal `N̄` is the left normal,
//! pointing into the region the loop encloses, so a counterclockwise circle
//! of radius `R` has curvature `κ = 1/R`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{periodic_nodes, real_dft, trig_eval};

pub type Point<T> = [T; 2];

/// One closed loop: `x(t) = Σ ax_k cos kt + bx_k sin kt`, same for `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct Loop<T> {
    pub ax: Vec<T>,
    pub bx: Vec<T>,
    pub ay: Vec<T>,
    pub by: Vec<T>,
}

/// Position and first three parameter derivatives.
#[derive(Clone, Copy, Debug)]
pub struct Jet<T> {
    pub p: Point<T>,
    pub d1: Point<T>,
    pub d2: Point<T>,
    pub d3: Point<T>,
}

impl<T: Real> Loop<T> {
    pub fn circle(center: Point<T>, radius: T) -> Self {
        Self {
            ax: vec![center[0], radius],
            bx: vec![T::zero(), T::zero()],
            ay: vec![center[1], T::zero()],
            by: vec![T::zero(), radius],
        }
    }

    /// Axis-aligned ellipse with semi-axes `a` (along y₁) and `b`.
    pub fn ellipse(center: Point<T>, a: T, b: T) -> Self {
        Self {
            ax: vec![center[0], a],
            bx: vec![T::zero(), T::zero()],
            ay: vec![center[1], T::zero()],
            by: vec![T::zero(), b],
        }
    }

    /// Interpolating loop through equispaced samples `p(2πj/n)`.
    pub fn from_samples(points: &[Point<T>]) -> Self {
        let xs: Vec<T> = points.iter().map(|p| p[0]).collect();
        let ys: Vec<T> = points.iter().map(|p| p[1]).collect();
        let (mut ax, mut bx) = real_dft(&xs);
        let (mut ay, mut by) = real_dft(&ys);
        if points.len().is_multiple_of(2) {
            // drop the Nyquist term, which is not a real trigonometric mode
            for v in [&mut ax, &mut bx, &mut ay, &mut by] {
                v.pop();
            }
        }
        let mut l = Self { ax, bx, ay, by };
        l.trim(T::c(1e-14));
        l
    }

    fn trim(&mut self, rel: T) {
        let scale = self.ax.iter().chain(&self.bx).chain(&self.ay).chain(&self.by).fold(T::zero(), |m, v| m.max(v.abs()));
        while self.ax.len() > 2 {
            let k = self.ax.len() - 1;
            let m = self.ax[k].abs().max(self.bx[k].abs()).max(self.ay[k].abs()).max(self.by[k].abs());
            if m > rel * scale {
                break;
            }
            for v in [&mut self.ax, &mut self.bx, &mut self.ay, &mut self.by] {
                v.pop();
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.ax.len().saturating_sub(1)
    }

    pub fn jet(&self, t: T) -> Jet<T> {
        let x = trig_eval::<T, 4>(&self.ax, &self.bx, t);
        let y = trig_eval::<T, 4>(&self.ay, &self.by, t);
        Jet { p: [x[0], y[0]], d1: [x[1], y[1]], d2: [x[2], y[2]], d3: [x[3], y[3]] }
    }

    pub fn point(&self, t: T) -> Point<T> {
        self.jet(t).p
    }

    pub fn speed(&self, t: T) -> T {
        let j = self.jet(t);
        j.d1[0].hypot(j.d1[1])
    }

    /// Signed curvature, positive for a counterclockwise convex loop.
    pub fn curvature(&self, t: T) -> T {
        let j = self.jet(t);
        let sp = j.d1[0].hypot(j.d1[1]);
        (j.d1[0] * j.d2[1] - j.d1[1] * j.d2[0]) / (sp * sp * sp)
    }

    /// Derivative of curvature with respect to arclength.
    pub fn curvature_s(&self, t: T) -> T {
        let j = self.jet(t);
        let sp2 = j.d1[0] * j.d1[0] + j.d1[1] * j.d1[1];
        let sp = sp2.sqrt();
        let cross = j.d1[0] * j.d2[1] - j.d1[1] * j.d2[0];
        let dcross = j.d1[0] * j.d3[1] - j.d1[1] * j.d3[0];
        let dsp2 = T::c(2.0) * (j.d1[0] * j.d2[0] + j.d1[1] * j.d2[1]);
        let dk = dcross / (sp2 * sp) - T::c(1.5) * cross * dsp2 / (sp2 * sp2 * sp);
        dk / sp
    }

    pub fn unit_tangent(&self, t: T) -> Point<T> {
        let j = self.jet(t);
        let sp = j.d1[0].hypot(j.d1[1]);
        [j.d1[0] / sp, j.d1[1] / sp]
    }

    /// Left unit normal; points into the enclosed region for a
    /// counterclockwise loop.
    pub fn normal(&self, t: T) -> Point<T> {
        let tg = self.unit_tangent(t);
        [-tg[1], tg[0]]
    }

    /// Enclosed signed area, positive for counterclockwise loops.
    pub fn signed_area(&self) -> T {
        let mut a = T::zero();
        for k in 1..self.ax.len() {
            a += T::n(k) * (self.ax[k] * self.by[k] - self.bx[k] * self.ay[k]);
        }
        a * T::PI()
    }

    fn reversed(&self) -> Self {
        Self {
            ax: self.ax.clone(),
            bx: self.bx.iter().map(|&v| -v).collect(),
            ay: self.ay.clone(),
            by: self.by.iter().map(|&v| -v).collect(),
        }
    }

    /// Number of samples used for quadratures and polylines on this loop.
    pub fn sample_count(&self) -> usize {
        (16 * self.degree()).clamp(64, 1024)
    }

    /// Length by the periodic trapezoid rule, which converges spectrally.
    pub fn length(&self) -> T {
        let m = 8 * self.sample_count();
        let ts = periodic_nodes::<T>(m);
        let sum: T = ts.iter().map(|&t| self.speed(t)).sum();
        sum * T::TAU() / T::n(m)
    }

    /// Total curvature `∮ κ ds`.
    pub fn total_curvature(&self) -> T {
        let m = 8 * self.sample_count();
        let ts = periodic_nodes::<T>(m);
        let sum: T = ts.iter().map(|&t| self.curvature(t) * self.speed(t)).sum();
        sum * T::TAU() / T::n(m)
    }

    fn is_constant(&self) -> bool {
        (1..self.ax.len()).all(|k| {
            self.ax[k] == T::zero() && self.bx[k] == T::zero() && self.ay[k] == T::zero() && self.by[k] == T::zero()
        })
    }

    fn polyline(&self, m: usize) -> Vec<Point<T>> {
        periodic_nodes::<T>(m).into_iter().map(|t| self.point(t)).collect()
    }
}

/// A boundary curve with one or more disjoint loops.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + serde::de::DeserializeOwned")]
pub struct BoundaryCurve<T> {
    loops: Vec<Loop<T>>,
}

impl<T: Real> BoundaryCurve<T> {
    /// Validates closedness, regularity and embedding; reorients loops
    /// counterclockwise.
    pub fn new(loops: Vec<Loop<T>>) -> Result<Self> {
        if loops.is_empty() {
            return Err(Error::InvalidInput("curve has no loops".into()));
        }
        let mut out = Vec::with_capacity(loops.len());
        for (i, l) in loops.into_iter().enumerate() {
            let n = l.ax.len();
            if n == 0 || l.bx.len() != n || l.ay.len() != n || l.by.len() != n {
                return Err(Error::InvalidInput(format!("loop {i}: coefficient arrays differ in length")));
            }
            if l.ax.iter().chain(&l.bx).chain(&l.ay).chain(&l.by).any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("loop {i}: non-finite coefficient")));
            }
            if l.is_constant() {
                return Err(Error::NotClosed { loop_index: i, reason: "no harmonic of degree >= 1; the loop is a point".into() });
            }
            let l = if l.signed_area() < T::zero() { l.reversed() } else { l };
            check_regular(i, &l)?;
            out.push(l);
        }
        check_embedded(&out)?;
        Ok(Self { loops: out })
    }

    pub fn circle(center: Point<T>, radius: T) -> Result<Self> {
        Self::new(vec![Loop::circle(center, radius)])
    }

    pub fn ellipse(a: T, b: T) -> Result<Self> {
        Self::new(vec![Loop::ellipse([T::zero(), T::zero()], a, b)])
    }

    /// Two concentric circles about the origin.
    pub fn concentric(r1: T, r2: T) -> Result<Self> {
        let o = [T::zero(), T::zero()];
        Self::new(vec![Loop::circle(o, r1), Loop::circle(o, r2)])
    }

    pub fn loops(&self) -> &[Loop<T>] {
        &self.loops
    }

    pub fn loop_count(&self) -> usize {
        self.loops.len()
    }

    pub fn curvature(&self, loop_index: usize, t: T) -> Result<T> {
        let l = &self.loops[loop_index];
        let sp = l.speed(t);
        if sp <= regularity_floor(l) {
            return Err(Error::Regularity { loop_index, t: t.to_f64_lossy(), speed: sp.to_f64_lossy() });
        }
        Ok(l.curvature(t))
    }

    pub fn length(&self) -> T {
        self.loops.iter().map(|l| l.length()).sum()
    }

    /// Arclength data for every loop.
    pub fn arclength(&self) -> Result<Vec<ArclengthLoop<T>>> {
        self.loops.iter().enumerate().map(|(i, l)| ArclengthLoop::new(i, l)).collect()
    }

    /// Arclength reparametrization: each returned loop has constant speed
    /// `L/2π`, so `s = L t / 2π`.
    pub fn arclength_reparametrize(&self) -> Result<(Self, Vec<ArclengthLoop<T>>)> {
        let maps = self.arclength()?;
        let loops = maps.iter().map(|m| m.reparametrized.clone()).collect();
        Ok((Self { loops }, maps))
    }

    /// Offsets every point by `ψ(loop, s) N̄(s)` (arclength `s`), then
    /// re-projects onto the Fourier basis.
    pub fn normal_offset(&self, psi: impl Fn(usize, T) -> T) -> Result<Self> {
        let maps = self.arclength()?;
        let mut loops = Vec::with_capacity(maps.len());
        for (i, m) in maps.iter().enumerate() {
            let l = &m.reparametrized;
            let count = 2 * l.sample_count().max(2 * l.degree() + 64);
            let ts = periodic_nodes::<T>(count);
            let mut focal = T::infinity();
            let mut pts = Vec::with_capacity(count);
            let mut max_psi = T::zero();
            for &t in &ts {
                let s = m.length * t / T::TAU();
                let k = l.curvature(t);
                if k != T::zero() {
                    focal = focal.min(T::one() / k.abs());
                }
                let v = psi(i, s);
                max_psi = max_psi.max(v.abs());
                let p = l.point(t);
                let nrm = l.normal(t);
                pts.push([p[0] + v * nrm[0], p[1] + v * nrm[1]]);
            }
            let safety = T::c(0.9);
            if max_psi >= safety * focal {
                return Err(Error::Geometry(format!(
                    "offset {:e} exceeds focal bound {:e} on loop {i}",
                    max_psi.to_f64_lossy(),
                    (safety * focal).to_f64_lossy()
                )));
            }
            loops.push(Loop::from_samples(&pts));
        }
        Self::new(loops)
    }

    /// Best-fit circle (algebraic least squares) of a loop.
    pub fn best_fit_circle(&self, loop_index: usize) -> (Point<T>, T) {
        let l = &self.loops[loop_index];
        let m = l.sample_count();
        let pts = l.polyline(m);
        // minimize Σ (x² + y² + D x + E y + F)²
        let a = crate::linalg::Matrix::from_fn(m, 3, |i, j| match j {
            0 => pts[i][0],
            1 => pts[i][1],
            _ => T::one(),
        });
        let b: Vec<T> = pts.iter().map(|p| -(p[0] * p[0] + p[1] * p[1])).collect();
        let fit = crate::linalg::least_squares(&a, &b).expect("circle fit on a regular loop");
        let c = fit.coefficients;
        let half = T::c(0.5);
        let center = [-c[0] * half, -c[1] * half];
        let r = (center[0] * center[0] + center[1] * center[1] - c[2]).sqrt();
        (center, r)
    }

    /// Searches for a parameter whose osculating circle lies on the selected
    /// side of a single-loop curve.
    pub fn find_inscribed_osculating(&self, side: Side) -> Result<OsculatingReport<T>> {
        if self.loops.len() != 1 {
            return Err(Error::InvalidInput("osculating search needs a single loop".into()));
        }
        find_osculating(&self.loops[0], side)
    }
}

fn regularity_floor<T: Real>(l: &Loop<T>) -> T {
    let scale = l.ax.iter().chain(&l.bx).chain(&l.ay).chain(&l.by).skip(1).fold(T::zero(), |m, v| m.max(v.abs()));
    scale * T::c(1e-8)
}

fn check_regular<T: Real>(i: usize, l: &Loop<T>) -> Result<()> {
    let floor = regularity_floor(l);
    let m = 4 * l.sample_count();
    for t in periodic_nodes::<T>(m) {
        let sp = l.speed(t);
        if !(sp > floor) {
            return Err(Error::Regularity { loop_index: i, t: t.to_f64_lossy(), speed: sp.to_f64_lossy() });
        }
    }
    Ok(())
}

fn orient<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross<T: Real>(p1: Point<T>, p2: Point<T>, q1: Point<T>, q2: Point<T>) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > T::zero()) != (d2 > T::zero())) && ((d3 > T::zero()) != (d4 > T::zero()))
}

fn segment_distance<T: Real>(p1: Point<T>, p2: Point<T>, q1: Point<T>, q2: Point<T>) -> T {
    fn pt_seg<T: Real>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
        let ab = [b[0] - a[0], b[1] - a[1]];
        let ap = [p[0] - a[0], p[1] - a[1]];
        let l2 = ab[0] * ab[0] + ab[1] * ab[1];
        let t = if l2 > T::zero() { ((ap[0] * ab[0] + ap[1] * ab[1]) / l2).max(T::zero()).min(T::one()) } else { T::zero() };
        (ap[0] - t * ab[0]).hypot(ap[1] - t * ab[1])
    }
    if segments_cross(p1, p2, q1, q2) {
        return T::zero();
    }
    pt_seg(p1, q1, q2).min(pt_seg(p2, q1, q2)).min(pt_seg(q1, p1, p2)).min(pt_seg(q2, p1, p2))
}

fn check_embedded<T: Real>(loops: &[Loop<T>]) -> Result<()> {
    let polys: Vec<Vec<Point<T>>> = loops.iter().map(|l| l.polyline(l.sample_count())).collect();
    let seg_len = |poly: &[Point<T>]| {
        let n = poly.len();
        (0..n).map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            (b[0] - a[0]).hypot(b[1] - a[1])
        })
        .fold(T::zero(), |m, v| m.max(v))
    };
    for (li, poly) in polys.iter().enumerate() {
        let n = poly.len();
        let gap = seg_len(poly) * T::c(1e-3);
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let d = segment_distance(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]);
                if d <= gap {
                    return Err(Error::Embedding(format!("loop {li} self-intersects or nearly touches near samples {i} and {j}")));
                }
            }
        }
    }
    for a in 0..polys.len() {
        for b in a + 1..polys.len() {
            let (pa, pb) = (&polys[a], &polys[b]);
            let gap = seg_len(pa).max(seg_len(pb)) * T::c(1e-3);
            for i in 0..pa.len() {
                for j in 0..pb.len() {
                    let d = segment_distance(pa[i], pa[(i + 1) % pa.len()], pb[j], pb[(j + 1) % pb.len()]);
                    if d <= gap {
                        return Err(Error::Embedding(format!("loops {a} and {b} intersect or nearly touch")));
                    }
                }
            }
        }
    }
    Ok(())
}

impl<T: Real + Serialize + serde::de::DeserializeOwned> BoundaryCurve<T> {
    /// Parses `{ "loops": [ { "ax": [...], "bx": [...], "ay": [...], "by": [...] } ] }`
    /// and validates the result.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(text)?;
        Self::new(raw.loops)
    }
}

/// Arclength data of one loop.
#[derive(Clone, Debug)]
pub struct ArclengthLoop<T> {
    pub length: T,
    /// Fourier coefficients of the periodic part of `s(t) - L t / 2π`.
    sa: Vec<T>,
    sb: Vec<T>,
    original: Loop<T>,
    /// Constant-speed parametrization by `σ = 2π s / L`.
    pub reparametrized: Loop<T>,
}

impl<T: Real> ArclengthLoop<T> {
    fn new(index: usize, l: &Loop<T>) -> Result<Self> {
        check_regular(index, l)?;
        let m = 4 * l.sample_count();
        let ts = periodic_nodes::<T>(m);
        let speeds: Vec<T> = ts.iter().map(|&t| l.speed(t)).collect();
        let (a, b) = real_dft(&speeds);
        let length = a[0] * T::TAU();
        // integrate the oscillating part term by term
        let mut sa = vec![T::zero(); a.len()];
        let mut sb = vec![T::zero(); a.len()];
        for k in 1..a.len() {
            if 2 * k == m {
                continue;
            }
            let kk = T::n(k);
            sa[k] = -b[k] / kk;
            sb[k] = a[k] / kk;
        }
        let floor = length * T::c(1e-17);
        while sa.len() > 1 && sa[sa.len() - 1].abs().max(sb[sb.len() - 1].abs()) < floor {
            sa.pop();
            sb.pop();
        }
        let mut out = Self { length, sa, sb, original: l.clone(), reparametrized: l.clone() };
        let count = m;
        let pts: Vec<Point<T>> = periodic_nodes::<T>(count)
            .into_iter()
            .map(|sig| l.point(out.t_of_s(length * sig / T::TAU())))
            .collect();
        out.reparametrized = Loop::from_samples(&pts);
        Ok(out)
    }

    /// Arclength from `t = 0`.
    pub fn s_of_t(&self, t: T) -> T {
        let osc = trig_eval::<T, 1>(&self.sa, &self.sb, t)[0] - trig_eval::<T, 1>(&self.sa, &self.sb, T::zero())[0];
        self.length * t / T::TAU() + osc
    }

    /// Inverse of [`Self::s_of_t`] by safeguarded Newton iteration.
    pub fn t_of_s(&self, s: T) -> T {
        let mut t = s / self.length * T::TAU();
        for _ in 0..50 {
            let f = self.s_of_t(t) - s;
            let d = self.original.speed(t);
            let step = f / d;
            t -= step;
            if step.abs() < T::epsilon() * T::c(4.0) {
                break;
            }
        }
        t
    }

    /// Samples at `n` equispaced arclength nodes `s_j = jL/n`.
    pub fn samples(&self, n: usize) -> LoopSamples<T> {
        let l = &self.reparametrized;
        let ds = self.length / T::n(n);
        let mut out = LoopSamples {
            length: self.length,
            s: Vec::with_capacity(n),
            point: Vec::with_capacity(n),
            tangent: Vec::with_capacity(n),
            normal: Vec::with_capacity(n),
            kappa: Vec::with_capacity(n),
        };
        for j in 0..n {
            let s = ds * T::n(j);
            let sig = T::TAU() * T::n(j) / T::n(n);
            out.s.push(s);
            out.point.push(l.point(sig));
            out.tangent.push(l.unit_tangent(sig));
            out.normal.push(l.normal(sig));
            out.kappa.push(l.curvature(sig));
        }
        out
    }
}

/// Arclength-equispaced samples of one loop.
#[derive(Clone, Debug)]
pub struct LoopSamples<T> {
    pub length: T,
    pub s: Vec<T>,
    pub point: Vec<Point<T>>,
    pub tangent: Vec<Point<T>>,
    pub normal: Vec<Point<T>>,
    pub kappa: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Inside,
    Outside,
}

#[derive(Clone, Debug, Serialize)]
pub struct OsculatingReport<T> {
    pub t: T,
    pub center: Point<T>,
    pub radius: T,
    pub side: Side,
    /// Largest signed penetration of the circle into the forbidden side.
    pub penetration: T,
}

/// Penetration of the osculating circle at `t` into the forbidden side;
/// `None` when no circle of the right orientation exists there.
fn penetration<T: Real>(l: &Loop<T>, poly: &[Point<T>], t: T, side: Side) -> Option<(Point<T>, T, T)> {
    let k = l.curvature(t);
    if k == T::zero() {
        return None;
    }
    if side == Side::Inside && k < T::zero() {
        return None;
    }
    let p = l.point(t);
    let n = l.normal(t);
    let r = T::one() / k.abs();
    let sgn = if k > T::zero() { T::one() } else { -T::one() };
    let c = [p[0] + sgn * r * n[0], p[1] + sgn * r * n[1]];
    // inside: the curve stays out of the disk; outside with κ > 0: the curve
    // stays inside the disk; outside with κ < 0: out of the disk
    let curve_outside_disk = !(side == Side::Outside && k > T::zero());
    let pen = poly
        .iter()
        .map(|q| {
            let d = (q[0] - c[0]).hypot(q[1] - c[1]);
            if curve_outside_disk { r - d } else { d - r }
        })
        .fold(T::neg_infinity(), |m, v| m.max(v));
    Some((c, r, pen))
}

fn find_osculating<T: Real>(l: &Loop<T>, side: Side) -> Result<OsculatingReport<T>> {
    let m = 8 * l.sample_count();
    let poly = l.polyline(4 * m);
    let ts = periodic_nodes::<T>(m);
    let h = T::TAU() / T::n(m);
    let score = |t: T| penetration(l, &poly, t, side).map(|(_, _, p)| p).unwrap_or(T::infinity());
    let (mut best_t, mut best) = (T::zero(), T::infinity());
    for &t in &ts {
        let v = score(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    // golden-section refinement around the grid minimum
    let g = T::c(0.618_033_988_749_894_9);
    let (mut a, mut b) = (best_t - h, best_t + h);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (score(c), score(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = score(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = score(d);
        }
    }
    let t_ref = T::c(0.5) * (a + b);
    if score(t_ref) < best {
        best_t = t_ref;
    }
    let t_star = best_t - T::TAU() * (best_t / T::TAU()).floor();
    let scale = l.length();
    let tol = T::c(1e-8) * scale;
    // exact local contact evaluation on a dense polyline around t*
    let local: Vec<Point<T>> = (0..=400)
        .map(|i| l.point(t_star + h * T::c((i as f64 - 200.0) / 100.0)))
        .chain(poly.iter().copied())
        .collect();
    match penetration(l, &local, t_star, side) {
        Some((center, radius, pen)) if pen <= tol => {
            Ok(OsculatingReport { t: t_star, center, radius, side, penetration: pen.max(T::zero()) })
        }
        Some((_, _, pen)) => Err(Error::Resolution { t: t_star.to_f64_lossy(), penetration: pen.to_f64_lossy() }),
        None => Err(Error::Resolution { t: t_star.to_f64_lossy(), penetration: f64::INFINITY }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    fn ellipse_kappa(a: f64, b: f64, t: f64) -> f64 {
        a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5)
    }

    #[test]
    fn circle_curvature_and_length() {
        let c = BoundaryCurve::<f64>::circle([0.3, -0.2], 2.0).unwrap();
        for t in [0.0, 1.0, 4.0] {
            assert!((c.curvature(0, t).unwrap() - 0.5).abs() < 1e-14);
        }
        assert!((c.length() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn ellipse_curvature_matches_closed_form() {
        let e = BoundaryCurve::<f64>::ellipse(2.0, 1.0).unwrap();
        assert!((e.curvature(0, 0.0).unwrap() - 2.0).abs() < 1e-13);
        for t in [0.3, 1.1, 2.5] {
            assert!((e.curvature(0, t).unwrap() - ellipse_kappa(2.0, 1.0, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let mut l = Loop::<f64>::circle([0.0, 0.0], 1.0);
        l.by[1] = -1.0;
        let c = BoundaryCurve::<f64>::new(vec![l]).unwrap();
        assert!(c.loops()[0].signed_area() > 0.0);
        assert!((c.curvature(0, 0.4).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_loop_is_not_closed() {
        let l = Loop { ax: vec![1.0, 0.0], bx: vec![0.0, 0.0], ay: vec![0.0, 0.0], by: vec![0.0, 0.0] };
        assert!(matches!(BoundaryCurve::<f64>::new(vec![l]), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn collapsed_loop_is_irregular() {
        let l = Loop { ax: vec![0.0, 1.0], bx: vec![0.0, 0.0], ay: vec![0.0, 0.0], by: vec![0.0, 0.0] };
        assert!(matches!(BoundaryCurve::<f64>::new(vec![l]), Err(Error::Regularity { .. })));
    }

    #[test]
    fn figure_eight_is_not_embedded() {
        let l = Loop { ax: vec![0.0, 1.0, 0.0], bx: vec![0.0, 0.0, 0.0], ay: vec![0.0, 0.0, 0.0], by: vec![0.0, 0.0, 1.0] };
        assert!(matches!(BoundaryCurve::<f64>::new(vec![l]), Err(Error::Embedding(_))));
    }

    #[test]
    fn overlapping_circles_are_rejected() {
        let l1 = Loop::<f64>::circle([0.0, 0.0], 1.0);
        let l2 = Loop::<f64>::circle([1.0, 0.0], 1.0);
        assert!(matches!(BoundaryCurve::<f64>::new(vec![l1, l2]), Err(Error::Embedding(_))));
    }

    #[test]
    fn ellipse_length_matches_quadrature() {
        let e = BoundaryCurve::<f64>::ellipse(2.0, 1.0).unwrap();
        let oracle = crate::spectral::adaptive_simpson(
            &|t: f64| (4.0 * t.sin().powi(2) + t.cos().powi(2)).sqrt(),
            0.0,
            2.0 * PI,
            1e-13,
        );
        assert!((e.length() - oracle).abs() < 1e-10);
        let (re, maps) = e.arclength_reparametrize().unwrap();
        let l = &re.loops()[0];
        let speed0 = maps[0].length / (2.0 * PI);
        for k in 0..50 {
            let t = k as f64 * 0.1257;
            assert!((l.speed(t) - speed0).abs() < 1e-9, "speed {} vs {}", l.speed(t), speed0);
        }
        assert!((l.length() - oracle).abs() < 1e-9);
        // t ↔ s round trip
        let t = 1.234;
        assert!((maps[0].t_of_s(maps[0].s_of_t(t)) - t).abs() < 1e-12);
    }

    #[test]
    fn curve_files_are_validated() {
        let c = BoundaryCurve::<f64>::from_json(r#"{ "loops": [ { "ax": [0, 2], "bx": [0, 0], "ay": [0, 0], "by": [0, -1] } ] }"#).unwrap();
        assert!(c.loops()[0].signed_area() > 0.0);
        assert!(BoundaryCurve::<f64>::from_json(r#"{ "loops": [] }"#).is_err());
        assert!(BoundaryCurve::<f64>::from_json(r#"{ "loops": [ { "ax": [1], "bx": [0], "ay": [0], "by": [0] } ] }"#).is_err());
        assert!(matches!(BoundaryCurve::<f64>::from_json("{"), Err(Error::Format(_))));
    }

    #[test]
    fn two_circles_have_two_loops() {
        let c = BoundaryCurve::<f64>::new(vec![Loop::<f64>::circle([0.0, 0.0], 1.0), Loop::<f64>::circle([3.0, 0.0], 1.0)]).unwrap();
        let maps = c.arclength().unwrap();
        assert_eq!(maps.len(), 2);
        for m in &maps {
            assert!((m.length - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn offset_of_circle_is_smaller_circle() {
        let c = BoundaryCurve::<f64>::circle([0.0, 0.0], 1.0).unwrap();
        let same = c.normal_offset(|_, _| 0.0).unwrap();
        for t in [0.0, 0.7, 3.0] {
            let (p, q) = (c.loops()[0].point(t), same.loops()[0].point(t));
            assert!((p[0] - q[0]).abs() < 1e-13 && (p[1] - q[1]).abs() < 1e-13);
        }
        let small = c.normal_offset(|_, _| 0.25).unwrap();
        assert!((small.curvature(0, 1.0).unwrap() - 1.0 / 0.75).abs() < 1e-11);
        assert!(matches!(c.normal_offset(|_, _| 0.95), Err(Error::Geometry(_))));
    }

    #[test]
    fn offset_by_cos2s_matches_finite_difference_curvature() {
        let c = BoundaryCurve::<f64>::circle([0.0, 0.0], 1.0).unwrap();
        let eps = 0.05;
        let off = c.normal_offset(|_, s| eps * (2.0 * s).cos()).unwrap();
        // oracle: polar curve r(θ) = 1 - eps cos 2θ, curvature by central differences
        let r = |th: f64| 1.0 - eps * (2.0 * th).cos();
        let pt = |th: f64| [r(th) * th.cos(), r(th) * th.sin()];
        let h = 1e-3;
        for th in [0.0, 0.4, 1.3] {
            let (a, b, cc) = (pt(th - h), pt(th), pt(th + h));
            let d1 = [(cc[0] - a[0]) / (2.0 * h), (cc[1] - a[1]) / (2.0 * h)];
            let d2 = [(cc[0] - 2.0 * b[0] + a[0]) / (h * h), (cc[1] - 2.0 * b[1] + a[1]) / (h * h)];
            let k_fd = (d1[0] * d2[1] - d1[1] * d2[0]) / (d1[0].hypot(d1[1])).powi(3);
            // locate the same point on the offset curve (polar angle th)
            let l = &off.loops()[0];
            let mut t = th;
            for _ in 0..30 {
                let p = l.point(t);
                let f = p[1].atan2(p[0]) - th;
                let j = l.jet(t);
                let dth = (p[0] * j.d1[1] - p[1] * j.d1[0]) / (p[0] * p[0] + p[1] * p[1]);
                t -= f / dth;
            }
            assert!((l.curvature(t) - k_fd).abs() < 1e-5, "{} vs {}", l.curvature(t), k_fd);
        }
    }

    #[test]
    fn circle_osculates_itself() {
        let c = BoundaryCurve::<f64>::circle([0.0, 0.0], 1.0).unwrap();
        let r = c.find_inscribed_osculating(Side::Inside).unwrap();
        assert!(r.penetration < 1e-12);
        assert!((r.radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_osculating_circles_by_side() {
        let e = BoundaryCurve::<f64>::ellipse(2.0, 1.0).unwrap();
        // brute-force oracle: scan t densely, compute penetration against a dense sample
        let pts: Vec<[f64; 2]> = (0..4000).map(|i| {
            let t = i as f64 * 2.0 * PI / 4000.0;
            [2.0 * t.cos(), t.sin()]
        }).collect();
        let oracle = |inside: bool| {
            let mut best = (0.0, f64::INFINITY);
            for i in 0..2000 {
                let t = i as f64 * 2.0 * PI / 2000.0;
                let k = ellipse_kappa(2.0, 1.0, t);
                let p = [2.0 * t.cos(), t.sin()];
                let sp = (4.0 * t.sin().powi(2) + t.cos().powi(2)).sqrt();
                let n = [-t.cos() / sp, -2.0 * t.sin() / sp];
                let c = [p[0] + n[0] / k, p[1] + n[1] / k];
                let pen = pts.iter().map(|q| {
                    let d = (q[0] - c[0]).hypot(q[1] - c[1]);
                    if inside { 1.0 / k - d } else { d - 1.0 / k }
                }).fold(f64::NEG_INFINITY, f64::max);
                if pen < best.1 {
                    best = (t, pen);
                }
            }
            best.0
        };
        let inside = e.find_inscribed_osculating(Side::Inside).unwrap();
        assert!(inside.penetration <= 1e-8);
        let p = e.loops()[0].point(inside.t);
        let po = e.loops()[0].point(oracle(true));
        assert!((p[0].abs() - 2.0).abs() < 1e-6 && p[1].abs() < 1e-3);
        assert!((po[0].abs() - 2.0).abs() < 1e-6);
        assert!((1.0 / inside.radius - e.curvature(0, inside.t).unwrap()).abs() < 1e-10);
        let outside = e.find_inscribed_osculating(Side::Outside).unwrap();
        let p = e.loops()[0].point(outside.t);
        let po = e.loops()[0].point(oracle(false));
        assert!(p[0].abs() < 1e-3 && (p[1].abs() - 1.0).abs() < 1e-6);
        assert!(po[0].abs() < 1e-2);
        assert!((outside.radius - 4.0).abs() < 1e-6);
    }

    fn smooth_loop() -> impl Strategy<Value = Loop<f64>> {
        (proptest::collection::vec(-0.08..0.08f64, 8), 0.5..2.0f64).prop_map(|(c, r)| {
            let mut l = Loop::<f64>::circle([0.0, 0.0], r);
            for v in [&mut l.ax, &mut l.bx, &mut l.ay, &mut l.by] {
                v.resize(3, 0.0);
            }
            l.ax[2] = c[0] * r;
            l.bx[2] = c[1] * r;
            l.ay[2] = c[2] * r;
            l.by[2] = c[3] * r;
            l.ax[1] += c[4] * r;
            l.by[1] += c[5] * r;
            l
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn total_curvature_is_two_pi(l in smooth_loop()) {
            let c = BoundaryCurve::<f64>::new(vec![l]).unwrap();
            prop_assert!((c.loops()[0].total_curvature() - 2.0 * PI).abs() < 1e-9);
        }

        #[test]
        fn zero_offset_is_identity(l in smooth_loop()) {
            let c = BoundaryCurve::<f64>::new(vec![l]).unwrap();
            let (re, _) = c.arclength_reparametrize().unwrap();
            let o = re.normal_offset(|_, _| 0.0).unwrap();
            for k in 0..20 {
                let t = k as f64 * 0.31;
                let (p, q) = (re.loops()[0].point(t), o.loops()[0].point(t));
                prop_assert!((p[0] - q[0]).abs() < 1e-10 && (p[1] - q[1]).abs() < 1e-10);
            }
        }

        #[test]
        fn constant_offset_of_circle(r in 0.5..3.0f64, c in -0.3..0.3f64) {
            let circ = BoundaryCurve::<f64>::circle([0.1, 0.2], r).unwrap();
            let off = circ.normal_offset(|_, _| c * r).unwrap();
            prop_assert!((off.curvature(0, 0.9).unwrap() - 1.0 / (r - c * r)).abs() < 1e-9 / r);
        }
    }
}
