//! Fundamental forms in the compactified metric `ḡ` (Euclidean) and the
//! hyperbolic metric `g = x⁻² ḡ`, conformal-change checks, and the Gauss
//! equation in ℍ³.
//!
//! Conventions: `ν̄ = sign · F_p × F_q / |F_p × F_q|` is the `ḡ`-unit normal
//! that is inward at the boundary, `k̄_ij = -⟨F_ij, ν̄⟩`, and
//! `k_ij = x⁻¹(k̄_ij - x⁻¹ ν̄ˣ ḡ_ij)`. Mean curvatures are half traces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::surface::{cross, dot3, Surface, SurfaceJet};

pub type Sym2<T> = [[T; 2]; 2];

/// Forms at one point of a surface.
#[derive(Clone, Copy, Debug)]
pub struct PointForms<T> {
    pub height: T,
    pub nu: [T; 3],
    pub gbar: Sym2<T>,
    pub kbar: Sym2<T>,
    /// `√det ḡ`
    pub area_bar: T,
    /// `H̄ = ½ tr_ḡ k̄`
    pub hbar: T,
    /// `|k̂|²` in `ḡ`
    pub khat2_bar: T,
    pub g: Sym2<T>,
    pub k: Sym2<T>,
    pub khat: Sym2<T>,
    /// `√det g = √det ḡ / x²`
    pub area: T,
    /// `H = ½ tr_g k = x H̄ - ν̄ˣ`
    pub h: T,
    /// `|A|²` in `g`
    pub a2: T,
    /// `|k̂|²` in `g`
    pub khat2: T,
}

fn inv2<T: Real>(m: &Sym2<T>) -> (Sym2<T>, T) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    ([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]], det)
}

/// `tr(G⁻¹ A)` and `tr((G⁻¹ A)²)`.
fn traces<T: Real>(ginv: &Sym2<T>, a: &Sym2<T>) -> (T, T) {
    let mut m = [[T::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = ginv[i][0] * a[0][j] + ginv[i][1] * a[1][j];
        }
    }
    let tr = m[0][0] + m[1][1];
    let tr2 = m[0][0] * m[0][0] + m[0][1] * m[1][0] + m[1][0] * m[0][1] + m[1][1] * m[1][1];
    (tr, tr2)
}

/// Forms from a jet. Fails where the parametrization degenerates.
pub fn point_forms<T: Real>(j: &SurfaceJet<T>, normal_sign: T) -> Result<PointForms<T>> {
    let n = cross(j.fp, j.fq);
    let area_bar = dot3(n, n).sqrt();
    let scale = dot3(j.fp, j.fp).max(dot3(j.fq, j.fq));
    if !(area_bar > scale * T::c(1e-12)) {
        return Err(Error::DegenerateParametrization(format!("|F_p × F_q| = {:.2e}", area_bar.to_f64_lossy())));
    }
    let nu = [normal_sign * n[0] / area_bar, normal_sign * n[1] / area_bar, normal_sign * n[2] / area_bar];
    let gbar = [[dot3(j.fp, j.fp), dot3(j.fp, j.fq)], [dot3(j.fp, j.fq), dot3(j.fq, j.fq)]];
    let kbar = [[-dot3(j.fpp, nu), -dot3(j.fpq, nu)], [-dot3(j.fpq, nu), -dot3(j.fqq, nu)]];
    let (ginv_bar, _) = inv2(&gbar);
    let (trk, trk2) = traces(&ginv_bar, &kbar);
    let half = T::c(0.5);
    let hbar = trk * half;
    let khat2_bar = trk2 - T::c(2.0) * hbar * hbar;
    let x = j.f[2];
    let x2 = x * x;
    let g = [[gbar[0][0] / x2, gbar[0][1] / x2], [gbar[1][0] / x2, gbar[1][1] / x2]];
    let k = std::array::from_fn(|a| std::array::from_fn(|b| (kbar[a][b] - nu[2] / x * gbar[a][b]) / x));
    let (ginv, _) = inv2(&g);
    let (trk_g, a2) = traces(&ginv, &k);
    let h = trk_g * half;
    let khat: Sym2<T> = std::array::from_fn(|a| std::array::from_fn(|b| k[a][b] - h * g[a][b]));
    let (_, khat2) = traces(&ginv, &khat);
    Ok(PointForms { height: x, nu, gbar, kbar, area_bar, hbar, khat2_bar, g, k, khat, area: area_bar / x2, h, a2, khat2 })
}

impl<T: Real> PointForms<T> {
    /// `tr_g k̂`, zero up to rounding.
    pub fn khat_trace(&self) -> T {
        let (ginv, _) = inv2(&self.g);
        traces(&ginv, &self.khat).0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Hyperbolic `g`.
    Hyperbolic,
    /// Compactified `ḡ`.
    Compactified,
}

/// Per-sample forms in one metric.
#[derive(Clone, Debug, Serialize)]
pub struct FormSample<T> {
    pub p: T,
    pub q: T,
    pub first: Sym2<T>,
    pub second: Sym2<T>,
    pub mean: T,
    pub khat2: T,
    pub area: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct FundamentalForms<T> {
    pub metric: Metric,
    pub samples: Vec<FormSample<T>>,
}

/// Forms on a tensor grid of parameters. Boundary rows (`x = 0`) are
/// rejected in the hyperbolic metric.
pub fn collar_forms<T: Real, S: Surface<T> + ?Sized>(surface: &S, ps: &[T], qs: &[T], metric: Metric) -> Result<FundamentalForms<T>> {
    let mut samples = Vec::with_capacity(ps.len() * qs.len());
    for &q in qs {
        let line = surface.line(q);
        for &p in ps {
            let f = point_forms(&line(p), surface.normal_sign())?;
            samples.push(match metric {
                Metric::Hyperbolic => {
                    if !(f.height > T::zero()) {
                        return Err(Error::InvalidInput("hyperbolic forms need x > 0".into()));
                    }
                    FormSample { p, q, first: f.g, second: f.k, mean: f.h, khat2: f.khat2, area: f.area }
                }
                Metric::Compactified => {
                    FormSample { p, q, first: f.gbar, second: f.kbar, mean: f.hbar, khat2: f.khat2_bar, area: f.area_bar }
                }
            });
        }
    }
    Ok(FundamentalForms { metric, samples })
}

/// Max over samples of `| |k̂|²_g dA_g - |k̂|²_ḡ dA_ḡ |` per unit parameter area.
pub fn conformal_change_check<T: Real>(g: &FundamentalForms<T>, gbar: &FundamentalForms<T>) -> Result<T> {
    if g.metric != Metric::Hyperbolic || gbar.metric != Metric::Compactified || g.samples.len() != gbar.samples.len() {
        return Err(Error::GridMismatch("need hyperbolic and compactified forms on the same samples".into()));
    }
    let mut worst = T::zero();
    for (a, b) in g.samples.iter().zip(&gbar.samples) {
        if a.p != b.p || a.q != b.q {
            return Err(Error::GridMismatch("sample parameters differ".into()));
        }
        worst = worst.max((a.khat2 * a.area - b.khat2 * b.area).abs());
    }
    Ok(worst)
}

fn hyperbolic_first_form<T: Real, S: Surface<T> + ?Sized>(s: &S, p: T, q: T) -> [T; 3] {
    let j = s.jet(p, q);
    let x2 = j.f[2] * j.f[2];
    [dot3(j.fp, j.fp) / x2, dot3(j.fp, j.fq) / x2, dot3(j.fq, j.fq) / x2]
}

/// Gauss curvature of the hyperbolic induced metric from the first form
/// alone (Brioschi formula, fourth-order differences with step `h`).
pub fn intrinsic_curvature<T: Real, S: Surface<T> + ?Sized>(s: &S, p: T, q: T, h: T) -> T {
    let offs = [-2i32, -1, 0, 1, 2];
    let mut grid = [[[T::zero(); 3]; 5]; 5];
    for (a, &i) in offs.iter().enumerate() {
        for (b, &jj) in offs.iter().enumerate() {
            grid[a][b] = hyperbolic_first_form(s, p + h * T::c(i as f64), q + h * T::c(jj as f64));
        }
    }
    let d1 = [T::c(1.0 / 12.0), T::c(-8.0 / 12.0), T::zero(), T::c(8.0 / 12.0), T::c(-1.0 / 12.0)];
    let d2 = [T::c(-1.0 / 12.0), T::c(16.0 / 12.0), T::c(-30.0 / 12.0), T::c(16.0 / 12.0), T::c(-1.0 / 12.0)];
    let dp = |c: usize| (0..5).fold(T::zero(), |acc, a| acc + d1[a] * grid[a][2][c]) / h;
    let dq = |c: usize| (0..5).fold(T::zero(), |acc, b| acc + d1[b] * grid[2][b][c]) / h;
    let dpp = |c: usize| (0..5).fold(T::zero(), |acc, a| acc + d2[a] * grid[a][2][c]) / (h * h);
    let dqq = |c: usize| (0..5).fold(T::zero(), |acc, b| acc + d2[b] * grid[2][b][c]) / (h * h);
    let dpq = |c: usize| {
        let mut acc = T::zero();
        for a in 0..5 {
            for b in 0..5 {
                acc += d1[a] * d1[b] * grid[a][b][c];
            }
        }
        acc / (h * h)
    };
    let [e, f, g] = grid[2][2];
    let half = T::c(0.5);
    let (eu, ev, fu, fv, gu, gv) = (dp(0), dq(0), dp(1), dq(1), dp(2), dq(2));
    let det3 = |m: [[T; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let m1 = [
        [-half * dqq(0) + dpq(1) - half * dpp(2), half * eu, fu - half * ev],
        [fv - half * gu, e, f],
        [half * gv, f, g],
    ];
    let m2 = [[T::zero(), half * ev, half * gu], [half * ev, e, f], [half * gu, f, g]];
    let w = e * g - f * f;
    (det3(m1) - det3(m2)) / (w * w)
}

/// Max over the given samples of `|K + ½|k̂|² - H² + 1|` (Gauss equation
/// in ℍ³, where the Weyl term vanishes).
pub fn gauss_identity_residual<T: Real, S: Surface<T> + ?Sized>(s: &S, ps: &[T], qs: &[T], h: T) -> Result<T> {
    let mut worst = T::zero();
    for &q in qs {
        for &p in ps {
            let f = point_forms(&s.jet(p, q), s.normal_sign())?;
            let k = intrinsic_curvature(s, p, q, h);
            worst = worst.max((k + T::c(0.5) * f.khat2 - f.h * f.h + T::one()).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::hemisphere::{HemisphereGraph, PolarParams};
    use crate::solver::rotational::{solve_rotational, Branch};
    use crate::surface::TiltedStrip;

    #[test]
    fn vertical_plane_is_totally_geodesic() {
        let s = TiltedStrip { slope: 0.0f64, length: 1.0, x_max: 1.0 };
        let f = point_forms(&s.jet(0.3, 0.2), 1.0).unwrap();
        assert!(f.kbar.iter().flatten().all(|v| v.abs() < 1e-15));
        assert!(f.k.iter().flatten().all(|v| v.abs() < 1e-15));
        let res = gauss_identity_residual(&s, &[0.3, 0.6], &[0.1], 1e-3).unwrap();
        assert!(res < 1e-8, "{res}");
    }

    #[test]
    fn tilted_graph_has_mean_curvature_of_its_angle() {
        for a in [0.01f64, 0.05, 0.2] {
            let s = TiltedStrip { slope: a, length: 1.0, x_max: 1.0 };
            for x in [0.01, 0.1] {
                let f = point_forms(&s.jet(x, 0.0), 1.0).unwrap();
                // tr_g k = 2a/√(1+a²) = 2a + O(a³)
                assert!((2.0 * f.h - 2.0 * a / (1.0 + a * a).sqrt()).abs() < 1e-12);
                assert!((2.0 * f.h - 2.0 * a).abs() <= a * a * a);
                assert!(f.khat_trace().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hemisphere_is_umbilic_with_curvature_minus_one() {
        let g = HemisphereGraph::<f64>::hemisphere([0.0, 0.0], 1.5, &PolarParams::default()).unwrap();
        for (p, q) in [(0.2, 0.3), (0.7, 2.0), (0.95, 5.0)] {
            let f = point_forms(&g.jet(p, q), g.normal_sign()).unwrap();
            assert!(f.khat2.abs() < 1e-12 && f.h.abs() < 1e-12 && f.khat2_bar.abs() < 1e-12);
            // inward normal at the boundary points towards the centre
            assert!((f.hbar - 1.0 / 1.5).abs() < 1e-12 || (f.hbar + 1.0 / 1.5).abs() < 1e-12);
        }
        let res = gauss_identity_residual(&g, &[0.3, 0.6, 0.9], &[0.0, 1.0, 2.5], 1e-3).unwrap();
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn annulus_is_minimal_and_satisfies_gauss() {
        for branch in [Branch::Shallow, Branch::Deep] {
            let a = solve_rotational(1.0f64, Some(1.6), branch).unwrap();
            let ps = [-0.8, -0.3, 0.1, 0.5, 0.9];
            let fg = collar_forms(&a, &ps, &[0.0, 1.0], Metric::Hyperbolic).unwrap();
            let fb = collar_forms(&a, &ps, &[0.0, 1.0], Metric::Compactified).unwrap();
            for s in &fg.samples {
                assert!(s.mean.abs() < 1e-9, "{branch:?} H = {}", s.mean);
            }
            assert!(conformal_change_check(&fg, &fb).unwrap() < 1e-6);
            let res = gauss_identity_residual(&a, &ps, &[0.3], 1e-3).unwrap();
            assert!(res < 1e-5, "{res}");
        }
    }

    #[test]
    fn conformal_law_holds_off_minimal_surfaces() {
        // a perturbed hemisphere graph is not minimal
        let mut g = HemisphereGraph::<f64>::hemisphere([0.0, 0.0], 1.0, &PolarParams { nr: 15, ntheta: 16, ..Default::default() }).unwrap();
        for (i, v) in g.psi.iter_mut().enumerate() {
            *v += 0.05 * ((i % 7) as f64 / 7.0);
        }
        g.field = g.grid.interpolant(&g.psi);
        let ps = [0.2, 0.5, 0.8];
        let fg = collar_forms(&g, &ps, &[0.4, 2.0], Metric::Hyperbolic).unwrap();
        let fb = collar_forms(&g, &ps, &[0.4, 2.0], Metric::Compactified).unwrap();
        assert!(fg.samples.iter().any(|s| s.mean.abs() > 1e-3));
        let scale = fb.samples.iter().fold(0.0f64, |m, s| m.max(s.khat2 * s.area));
        assert!(conformal_change_check(&fg, &fb).unwrap() < 1e-10 * scale.max(1.0));
    }
}
