//! Doubling across the boundary plane and the Willmore energy of the
//! closed surface in the Euclidean metric `ḡ`.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::point_forms;
use crate::renarea::{integrate, Quadrature, RenAreaReport};
use crate::scalar::Real;
use crate::surface::{End, Surface};

/// The closed surface `2Y = Y ∪ reflection(Y)` as an indexed triangle mesh,
/// with the `ḡ`-quadrature of `H̄²` over the upper half.
#[derive(Clone, Debug, Serialize)]
pub struct DoubledSurface<T> {
    pub vertices: Vec<[T; 3]>,
    pub faces: Vec<[usize; 3]>,
    /// Vertices on the boundary plane, shared by both halves.
    pub seam: Vec<usize>,
    /// `H̄` at each vertex.
    pub hbar: Vec<T>,
    pub euler_characteristic: i32,
    /// Largest `|ν̄ˣ|` on the seam; zero for a `C¹` doubling.
    pub seam_normal_defect: T,
    /// `∫_Y H̄² dĀ` over one half.
    pub half_energy: T,
    /// Change of `half_energy` under a coarser quadrature.
    pub quadrature_error: T,
}

/// Largest `|ν̄ˣ|` on the boundary accepted as orthogonal.
const ORTHOGONALITY_TOLERANCE: f64 = 1e-6;

/// Doubles a surface across `x = 0`. The mesh uses `np` intervals in `p`
/// and `nq` in `q`.
pub fn double_surface<T: Real, S: Surface<T> + ?Sized>(surface: &S, np: usize, nq: usize, quad: &Quadrature) -> Result<DoubledSurface<T>> {
    let ends = surface.ends();
    if ends.0 == End::Cut || ends.1 == End::Cut {
        return Err(Error::InvalidInput("a surface with a cut cannot be doubled to a closed surface".into()));
    }
    if ends.0 != End::Boundary && ends.1 != End::Boundary {
        return Err(Error::InvalidInput("surface does not reach the boundary plane".into()));
    }
    if np < 2 || nq < 3 {
        return Err(Error::DegenerateMesh(format!("{np} × {nq} grid is too coarse")));
    }
    let sign = surface.normal_sign();
    let (lo, hi) = surface.p_range();
    let period = surface.q_period();
    let ps: Vec<T> = (0..=np).map(|i| lo + (hi - lo) * T::n(i) / T::n(np)).collect();
    let qs: Vec<T> = (0..nq).map(|j| period * T::n(j) / T::n(nq)).collect();
    let end_kind = |i: usize| {
        if i == 0 {
            Some(ends.0)
        } else if i == np {
            Some(ends.1)
        } else {
            None
        }
    };
    let mut vertices = Vec::new();
    let mut hbar = Vec::new();
    let mut seam = Vec::new();
    let mut seam_normal_defect = T::zero();
    // upper[i][j] and lower[i][j] vertex ids
    let mut upper = vec![vec![0usize; nq]; np + 1];
    let mut lower = vec![vec![0usize; nq]; np + 1];
    for i in 0..=np {
        let kind = end_kind(i);
        for j in 0..nq {
            if kind == Some(End::Pole) && j > 0 {
                upper[i][j] = upper[i][0];
                lower[i][j] = lower[i][0];
                continue;
            }
            let jet = surface.jet(ps[i], qs[j]);
            let mut pt = jet.f;
            let f = if kind == Some(End::Pole) {
                // the parametrization degenerates at a pole; read H̄ just off it
                let off = if i == 0 { ps[i] + (hi - lo) * T::c(1e-3) } else { ps[i] - (hi - lo) * T::c(1e-3) };
                point_forms(&surface.jet(off, qs[j]), sign)?
            } else {
                point_forms(&jet, sign)?
            };
            let id = vertices.len();
            if kind == Some(End::Boundary) {
                pt[2] = T::zero();
                seam_normal_defect = seam_normal_defect.max(f.nu[2].abs());
                vertices.push(pt);
                hbar.push(f.hbar);
                seam.push(id);
                upper[i][j] = id;
                lower[i][j] = id;
            } else {
                vertices.push(pt);
                hbar.push(f.hbar);
                vertices.push([pt[0], pt[1], -pt[2]]);
                hbar.push(f.hbar);
                upper[i][j] = id;
                lower[i][j] = id + 1;
            }
        }
    }
    if seam_normal_defect > T::c(ORTHOGONALITY_TOLERANCE) {
        return Err(Error::NonOrthogonal(format!("|ν̄ˣ| = {:.3e} on the boundary", seam_normal_defect.to_f64_lossy())));
    }
    let mut faces = Vec::new();
    for i in 0..np {
        for j in 0..nq {
            let jn = (j + 1) % nq;
            for (ids, flip) in [(&upper, false), (&lower, true)] {
                let (a, b, c, d) = (ids[i][j], ids[i + 1][j], ids[i + 1][jn], ids[i][jn]);
                for tri in [[a, b, c], [a, c, d]] {
                    if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                        continue;
                    }
                    faces.push(if flip { [tri[0], tri[2], tri[1]] } else { tri });
                }
            }
        }
    }
    for f in &faces {
        let [a, b, c] = f.map(|k| vertices[k]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let n = crate::surface::cross(u, v);
        if crate::surface::dot3(n, n) == T::zero() {
            return Err(Error::DegenerateMesh(format!("zero-area face {:?}", f)));
        }
    }
    let mut edges = HashSet::new();
    for f in &faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let euler_characteristic = vertices.len() as i32 - edges.len() as i32 + faces.len() as i32;
    let density = |j: &crate::surface::SurfaceJet<T>| -> Result<T> {
        let f = point_forms(j, sign)?;
        Ok(f.hbar * f.hbar * f.area_bar)
    };
    let id = |x: T| x;
    let half_energy = integrate(surface, None, &id, quad, &density)?;
    let coarse = Quadrature { order: quad.order * 3 / 4, ..quad.clone() };
    let quadrature_error = (integrate(surface, None, &id, &coarse, &density)? - half_energy).abs();
    Ok(DoubledSurface { vertices, faces, seam, hbar, euler_characteristic, seam_normal_defect, half_energy, quadrature_error })
}

/// `𝒲(2Y) = ∫ H̄² dĀ`, twice the upper-half integral by symmetry.
pub fn willmore_energy<T: Real>(doubled: &DoubledSurface<T>) -> Result<T> {
    if doubled.faces.is_empty() {
        return Err(Error::DegenerateMesh("no faces".into()));
    }
    Ok(T::c(2.0) * doubled.half_energy)
}

#[derive(Clone, Debug, Serialize)]
pub struct WillmoreCheck<T> {
    pub renarea: T,
    pub willmore: T,
    /// `|𝒜 + ½𝒲|`
    pub discrepancy: T,
    /// Combined quadrature error of both sides.
    pub budget: T,
}

/// `|𝒜(Y) + ½𝒲(2Y)|` for a minimal surface.
pub fn willmore_identity_check<T: Real, S: Surface<T> + ?Sized>(
    surface: &S,
    report: &RenAreaReport<T>,
    doubled: &DoubledSurface<T>,
) -> Result<WillmoreCheck<T>> {
    if !surface.is_minimal() {
        return Err(Error::NonMinimal("the Willmore identity holds for minimal surfaces only".into()));
    }
    let willmore = willmore_energy(doubled)?;
    let renarea = report.value();
    Ok(WillmoreCheck {
        renarea,
        willmore,
        discrepancy: (renarea + T::c(0.5) * willmore).abs(),
        budget: report.gauss_bonnet.quadrature_error + doubled.quadrature_error,
    })
}
