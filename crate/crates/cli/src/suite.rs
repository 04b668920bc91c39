//! The validation suite: each module's invariants as numeric checks with
//! pinned tolerances.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use renarea::curves::{BoundaryCurve, Loop, Side};
use renarea::expansion::{formal_recursion, loglog_slope};
use renarea::geometry::{collar_forms, conformal_change_check, gauss_identity_residual, Metric};
use renarea::linalg::norm_inf;
use renarea::renarea::{default_schedule, geometric_schedule, hadamard_renarea, renarea_report, Quadrature, RenAreaReport};
use renarea::solver::collar::{CollarParams, CollarSolution, U3Profile};
use renarea::solver::hemisphere::{solve_hemisphere_graph, HemisphereGraph, PolarParams};
use renarea::solver::rotational::{annulus_existence, solve_rotational, Branch, RotationalProfile};
use renarea::surface::{graph_collar, Surface, TiltedStrip};
use renarea::variation::{
    family_differences, first_variation_with, indicial_roots, second_variation, second_variation_bilinear, DnMap, DnParams,
    JacobiOperator, Mutation,
};
use renarea::willmore::{double_surface, willmore_identity_check};
use renarea::Error as CoreError;

use crate::bundle::{content_hash, Bundle};
use crate::error::CliError;
use crate::pipeline::{gauss_residual, offset_renarea};

/// How a measured value is compared with its tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `value ≤ tolerance`
    AtMost,
    /// `value > tolerance`
    Above,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: &'static str,
    pub module: &'static str,
    pub identity: &'static str,
    pub value: Option<f64>,
    pub bound: Bound,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

/// Named tolerance profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub name: String,
    /// Multiplies every `AtMost` tolerance.
    pub scale: f64,
    /// Include the finite-difference and continuation checks.
    pub full: bool,
}

impl Profile {
    pub fn named(name: &str) -> Result<Self, CliError> {
        let (scale, full) = match name {
            "default" => (1.0, true),
            "quick" => (1.0, false),
            "zero" => (0.0, true),
            _ => return Err(CliError::Spec(format!("unknown profile `{name}` (default, quick, zero)"))),
        };
        Ok(Self { name: name.into(), scale, full })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOptions {
    pub profile: Profile,
    pub seed: u64,
    pub workers: usize,
    pub mutation: Mutation,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub profile: String,
    pub seed: u64,
    pub mutation: Mutation,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl Summary {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    /// One line per check.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let value = c.value.map_or("-".to_string(), |v| format!("{v:.3e}"));
            let op = if c.bound == Bound::AtMost { "<=" } else { ">" };
            out.push_str(&format!(
                "{} {:<36} {:<44} {value:>10} {op} {:.1e}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.identity,
                c.tolerance
            ));
        }
        out.push_str(&format!("{} passed, {} failed\n", self.passed, self.failed));
        out
    }
}

pub struct SuiteRun {
    pub summary: Summary,
    pub bundle: Bundle,
}

/// Surfaces shared between checks, built on first use.
struct Corpus {
    seed: u64,
    ellipse: OnceLock<Result<HemisphereGraph<f64>, CoreError>>,
    ellipse_collar: OnceLock<Result<(CollarSolution<f64>, U3Profile<f64>), CoreError>>,
    hemisphere: OnceLock<Result<HemisphereGraph<f64>, CoreError>>,
    shallow: OnceLock<Result<RotationalProfile<f64>, CoreError>>,
    deep: OnceLock<Result<RotationalProfile<f64>, CoreError>>,
    reports: OnceLock<Result<Vec<RenAreaReport<f64>>, CoreError>>,
}

type Measured = Result<(f64, String), CoreError>;

fn get<T: Clone>(cell: &OnceLock<Result<T, CoreError>>, init: impl FnOnce() -> Result<T, CoreError>) -> Result<&T, CoreError> {
    cell.get_or_init(init).as_ref().map_err(Clone::clone)
}

pub fn ellipse_collar_params() -> CollarParams {
    CollarParams { ns: 64, nx: 24, x_max: 0.25, ..Default::default() }
}

impl Corpus {
    fn new(seed: u64) -> Self {
        Self {
            seed,
            ellipse: OnceLock::new(),
            ellipse_collar: OnceLock::new(),
            hemisphere: OnceLock::new(),
            shallow: OnceLock::new(),
            deep: OnceLock::new(),
            reports: OnceLock::new(),
        }
    }

    fn ellipse_curve(&self) -> BoundaryCurve<f64> {
        BoundaryCurve::ellipse(2.0, 1.0).expect("ellipse is a valid curve")
    }

    fn ellipse(&self) -> Result<&HemisphereGraph<f64>, CoreError> {
        get(&self.ellipse, || solve_hemisphere_graph(&self.ellipse_curve(), &PolarParams::default()))
    }

    fn ellipse_collar(&self) -> Result<&(CollarSolution<f64>, U3Profile<f64>), CoreError> {
        get(&self.ellipse_collar, || graph_collar(self.ellipse()?, &ellipse_collar_params()))
    }

    fn hemisphere(&self) -> Result<&HemisphereGraph<f64>, CoreError> {
        get(&self.hemisphere, || HemisphereGraph::hemisphere([0.0, 0.0], 1.0, &PolarParams::default()))
    }

    fn catenoid(&self, branch: Branch) -> Result<&RotationalProfile<f64>, CoreError> {
        let cell = if branch == Branch::Shallow { &self.shallow } else { &self.deep };
        get(cell, || solve_rotational(1.0, Some(1.2), branch))
    }

    /// Reports of the regression corpus: hemisphere, both catenoids, ellipse.
    fn reports(&self) -> Result<&Vec<RenAreaReport<f64>>, CoreError> {
        get(&self.reports, || {
            let quad = Quadrature::default();
            let surfaces: [(&str, &dyn Surface<f64>); 4] = [
                ("hemisphere", self.hemisphere()?),
                ("shallow catenoid", self.catenoid(Branch::Shallow)?),
                ("deep catenoid", self.catenoid(Branch::Deep)?),
                ("ellipse", self.ellipse()?),
            ];
            surfaces.iter().map(|(label, s)| renarea_report(*s, label, label, &default_schedule(*s), &quad)).collect()
        })
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }
}

fn worst(values: impl IntoIterator<Item = (f64, String)>) -> (f64, String) {
    let mut out = (0.0f64, String::new());
    for (v, label) in values {
        if !out.1.is_empty() {
            out.1.push_str("; ");
        }
        out.1.push_str(&format!("{label} {v:.3e}"));
        out.0 = out.0.max(v);
    }
    out
}

fn least(values: impl IntoIterator<Item = (f64, String)>) -> (f64, String) {
    let mut out = (f64::INFINITY, String::new());
    for (v, label) in values {
        if !out.1.is_empty() {
            out.1.push_str("; ");
        }
        out.1.push_str(&format!("{label} {v:.3e}"));
        out.0 = out.0.min(v);
    }
    out
}

/// A smooth star-shaped loop with seeded random harmonics.
fn random_loop(rng: &mut ChaCha8Rng) -> Result<BoundaryCurve<f64>, CoreError> {
    let pts: Vec<[f64; 2]> = {
        let amps: Vec<(f64, f64)> = (2..5).map(|_| (rng.random_range(-0.08..0.08), rng.random_range(-0.08..0.08))).collect();
        (0..64)
            .map(|j| {
                let t = TAU * j as f64 / 64.0;
                let r = 1.0 + amps.iter().enumerate().map(|(k, (a, b))| a * ((k + 2) as f64 * t).cos() + b * ((k + 2) as f64 * t).sin()).sum::<f64>();
                [r * t.cos(), r * t.sin()]
            })
            .collect()
    };
    BoundaryCurve::new(vec![Loop::from_samples(&pts)])
}

fn total_curvature(c: &Corpus) -> Measured {
    let mut rng = c.rng(1);
    let curves = [("ellipse", c.ellipse_curve()), ("random loop", random_loop(&mut rng)?), ("annulus", BoundaryCurve::concentric(1.0, 1.5)?)];
    Ok(worst(curves.iter().flat_map(|(label, curve)| {
        curve.loops().iter().map(move |l| ((l.total_curvature() - TAU).abs(), label.to_string())).collect::<Vec<_>>()
    })))
}

fn offsets(c: &Corpus) -> Measured {
    let e = c.ellipse_curve();
    let same = e.normal_offset(|_, _| 0.0)?;
    // offsets come back in arclength parametrization
    let arc = e.arclength()?.remove(0).reparametrized;
    let drift = (0..16)
        .map(|k| {
            let t = TAU * k as f64 / 16.0;
            let (a, b) = (arc.point(t), same.loops()[0].point(t));
            (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
        })
        .fold(0.0, f64::max);
    let shrunk = BoundaryCurve::circle([0.0, 0.0], 1.5)?.normal_offset(|_, _| 0.25)?;
    let k: f64 = shrunk.curvature(0, 0.7)?;
    Ok(worst([(drift, "zero offset".into()), ((k - 1.0 / 1.25).abs(), "circle offset curvature".into())]))
}

fn osculating(c: &Corpus) -> Measured {
    let e = c.ellipse_curve();
    let mut out = Vec::new();
    for side in [Side::Inside, Side::Outside] {
        let r = e.find_inscribed_osculating(side)?;
        let k = e.curvature(0, r.t)?;
        out.push(((1.0 / r.radius - k.abs()).abs().max(r.penetration.max(0.0)), format!("{side:?}")));
    }
    Ok(worst(out))
}

fn u2_law(c: &Corpus) -> Measured {
    let (sol, _) = c.ellipse_collar()?;
    Ok((sol.u2_defect(), "ellipse collar".into()))
}

fn recursion_slope(c: &Corpus) -> Measured {
    let (_, u3) = c.ellipse_collar()?;
    let samples = c.ellipse_curve().arclength()?[0].samples(u3.s.len());
    let hs = [0.04, 0.02, 0.01, 0.005];
    let ex = formal_recursion(&samples, &u3.value, 6)?;
    Ok((loglog_slope(&hs, &ex.residual_certificate(&hs)), "K = 6 on the ellipse".into()))
}

fn newton(c: &Corpus) -> Measured {
    let g = c.ellipse()?;
    let cat = c.catenoid(Branch::Shallow)?;
    Ok(worst([(g.residual, "ellipse graph".into()), (cat.conservation_defect(64), "shallow catenoid".into())]))
}

fn existence(_: &Corpus) -> Measured {
    let narrow = annulus_existence(1.2)?;
    let wide = annulus_existence(3.0)?;
    let ok = narrow.exists && !wide.exists;
    Ok((if ok { 0.0 } else { 1.0 }, format!("maximal ratio {:.6}", narrow.max_ratio)))
}

fn gauss_closed_form(_: &Corpus) -> Measured {
    let mut out = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let h = HemisphereGraph::hemisphere([0.1, 0.2], r, &PolarParams { nr: 15, ntheta: 16, ..Default::default() })?;
        out.push((gauss_residual(&h)?, format!("hemisphere R={r}")));
    }
    for slope in [0.0, 0.3] {
        let t = TiltedStrip { slope, length: 2.0, x_max: 1.0 };
        let ps = [0.2, 0.4, 0.6, 0.8];
        out.push((gauss_identity_residual(&t, &ps, &[0.3, 1.1], 1e-3)?, format!("tilted plane slope {slope}")));
    }
    Ok(worst(out))
}

fn gauss_solved(c: &Corpus) -> Measured {
    Ok(worst([
        (gauss_residual(c.ellipse()?)?, "ellipse".into()),
        (gauss_residual(c.catenoid(Branch::Shallow)?)?, "shallow catenoid".into()),
        (gauss_residual(c.catenoid(Branch::Deep)?)?, "deep catenoid".into()),
    ]))
}

fn conformal(c: &Corpus) -> Measured {
    let g = c.ellipse()?;
    let ps = [0.2, 0.5, 0.8];
    let qs = [0.4, 2.0, 4.0];
    let fg = collar_forms(g, &ps, &qs, Metric::Hyperbolic)?;
    let fb = collar_forms(g, &ps, &qs, Metric::Compactified)?;
    Ok((conformal_change_check(&fg, &fb)?, "ellipse graph".into()))
}

fn hemisphere_renarea(gauss_bonnet: bool) -> Measured {
    let quad = Quadrature::default();
    let mut out = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let h = HemisphereGraph::hemisphere([0.0, 0.0], r, &PolarParams { nr: 15, ntheta: 16, ..Default::default() })?;
        let rep = renarea_report(&h, "h", "h", &default_schedule(&h), &quad)?;
        let v = if gauss_bonnet { rep.gauss_bonnet.value } else { rep.hadamard.renarea };
        out.push(((v + TAU).abs(), format!("R={r}")));
    }
    Ok(worst(out))
}

fn cross_method(c: &Corpus) -> Measured {
    let r = c.reports()?;
    Ok(worst(r.iter().map(|r| (r.discrepancy, r.label.clone()))))
}

fn spectrum(c: &Corpus) -> Measured {
    let r = c.reports()?;
    Ok(least(r.iter().filter(|r| r.label != "hemisphere").map(|r| (r.spectrum_margin, r.label.clone()))))
}

fn non_orthogonal(_: &Corpus) -> Measured {
    let t = TiltedStrip::<f64> { slope: 0.3, length: 3.0, x_max: 0.5 };
    let fit = hadamard_renarea(&t, &geometric_schedule(0.02, 0.5, 8), &Quadrature { nq: 32, ..Default::default() })?;
    match (fit.well_defined, fit.divergent_exponent) {
        (false, Some(p)) => Ok(((p + 1.0).abs(), format!("flagged, exponent {p:.4}"))),
        _ => Ok((f64::INFINITY, "tilted graph not flagged".into())),
    }
}

fn disjoint_union(_: &Corpus) -> Measured {
    let quad = Quadrature::default();
    let a = HemisphereGraph::<f64>::hemisphere([0.0, 0.0], 1.0, &PolarParams { nr: 15, ntheta: 16, ..Default::default() })?;
    let b = HemisphereGraph::<f64>::hemisphere([3.0, 0.0], 0.5, &PolarParams { nr: 15, ntheta: 16, ..Default::default() })?;
    let eps = geometric_schedule(0.05, 0.5, 8);
    let ra = renarea_report(&a, "a", "a", &eps, &quad)?;
    let rb = renarea_report(&b, "b", "b", &eps, &quad)?;
    let u = ra.disjoint_union(&rb, "ab", "two disks")?;
    Ok(((u.value() - ra.value() - rb.value()).abs().max((u.value() + 2.0 * TAU).abs()), "two disjoint disks".into()))
}

fn indicial(c: &Corpus) -> Measured {
    let mut out = Vec::new();
    let cases: [(&str, &dyn Surface<f64>, usize); 3] =
        [("hemisphere", c.hemisphere()?, 16), ("catenoid", c.catenoid(Branch::Shallow)?, 4), ("ellipse", c.ellipse()?, 16)];
    for (label, s, nq) in cases {
        let r = indicial_roots(s, nq)?;
        out.push(((r.roots.0 + 1.0).abs().max((r.roots.1 - 2.0).abs()), label.to_string()));
    }
    Ok(worst(out))
}

fn jacobi_fields(c: &Corpus) -> Measured {
    let g = c.hemisphere()?;
    let op = JacobiOperator::new(g, 0.2, 0.8, 24, 24)?;
    let fields: [(&str, &dyn Fn([f64; 3]) -> f64); 3] =
        [("1/x", &|p| 1.0 / p[2]), ("y/x", &|p| p[0] / p[2]), ("atanh(x)/x - 1", &|p| p[2].atanh() / p[2] - 1.0)];
    Ok(worst(fields.iter().map(|(label, f)| {
        let phi = op.sample(f);
        (norm_inf(&op.apply(&phi)) / norm_inf(&phi), label.to_string())
    })))
}

fn first_variation_fd(c: &Corpus, mutation: Mutation) -> Measured {
    let (_, u3) = c.ellipse_collar()?;
    let base = c.ellipse_curve();
    let length = u3.length;
    let params = PolarParams::default();
    let modes: [(&str, Box<dyn Fn(f64) -> f64>); 3] = [
        ("1", Box::new(|_| 1.0)),
        ("cos s", Box::new(move |s| (TAU * s / length).cos())),
        ("cos 2s", Box::new(move |s| (2.0 * TAU * s / length).cos())),
    ];
    let mut out = Vec::new();
    for (label, phi) in &modes {
        let analytic = first_variation_with(u3, &**phi, mutation)?;
        let fd = family_differences(0.01, |t| offset_renarea(&base, &params, &**phi, t))?;
        // 1% relative, or 1e-4 absolute near zero
        out.push(((analytic.value - fd.first.value).abs() / fd.first.value.abs().max(1e-2), label.to_string()));
    }
    Ok(worst(out))
}

fn second_variation_kernel(c: &Corpus) -> Measured {
    let dn = DnMap::new(c.hemisphere()?, &DnParams::default())?;
    let mut out = Vec::new();
    for n in [0.0, 1.0] {
        let q = second_variation(&dn, &|s: f64| (n * s).cos())?;
        out.push((q.value.abs(), format!("mode {n}")));
    }
    Ok(worst(out))
}

fn second_variation_fd(c: &Corpus) -> Measured {
    let dn = DnMap::new(c.hemisphere()?, &DnParams::default())?;
    let phi = |s: f64| (2.0 * s).cos();
    let q = second_variation(&dn, &phi)?;
    let base = BoundaryCurve::circle([0.0, 0.0], 1.0)?;
    let fd = family_differences(0.02, |t| offset_renarea(&base, &PolarParams::default(), &phi, t))?;
    Ok(((q.value - fd.second.value).abs() / fd.second.value.abs(), format!("DN {:.6} vs FD {:.6}", q.value, fd.second.value)))
}

fn dn_symmetry(c: &Corpus) -> Measured {
    let dn = DnMap::new(c.hemisphere()?, &DnParams::default())?;
    let mut rng = c.rng(2);
    let mut coeffs = || -> Vec<(f64, f64)> { (0..4).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect() };
    let (a, b) = (coeffs(), coeffs());
    let trig = |c: &[(f64, f64)], s: f64| c.iter().enumerate().map(|(k, (x, y))| x * (k as f64 * s).cos() + y * (k as f64 * s).sin()).sum::<f64>();
    let ab = second_variation_bilinear(&dn, &|s| trig(&a, s), &|s| trig(&b, s))?.value;
    let ba = second_variation_bilinear(&dn, &|s| trig(&b, s), &|s| trig(&a, s))?.value;
    Ok(((ab - ba).abs() / ab.abs().max(1.0), format!("Q(f,g) = {ab:.6}, Q(g,f) = {ba:.6}")))
}

fn willmore(c: &Corpus, sphere: bool) -> Measured {
    let quad = Quadrature::default();
    let r = c.reports()?;
    let surfaces: [&dyn Surface<f64>; 4] = [c.hemisphere()?, c.catenoid(Branch::Shallow)?, c.catenoid(Branch::Deep)?, c.ellipse()?];
    let mut out = Vec::new();
    for (rep, s) in r.iter().zip(surfaces) {
        let d = double_surface(s, 16, 32, &quad)?;
        let w = willmore_identity_check(s, rep, &d)?;
        if sphere {
            out.push(((w.willmore - 4.0 * PI).abs(), rep.label.clone()));
            break;
        }
        out.push((w.discrepancy, rep.label.clone()));
    }
    Ok(worst(out))
}

fn doubled_topology(c: &Corpus) -> Measured {
    let quad = Quadrature::default();
    let disk = double_surface(c.ellipse()?, 8, 16, &quad)?;
    let annulus = double_surface(c.catenoid(Branch::Shallow)?, 8, 16, &quad)?;
    let v = (disk.euler_characteristic - 2).abs() + annulus.euler_characteristic.abs();
    Ok((v as f64, format!("χ(2 disk) = {}, χ(2 annulus) = {}", disk.euler_characteristic, annulus.euler_characteristic)))
}

fn rigidity(_: &Corpus) -> Measured {
    let mut out = Vec::new();
    for e in [0.2f64, 0.4, 0.6, 0.8] {
        let curve = BoundaryCurve::ellipse(1.0, (1.0 - e * e).sqrt())?;
        let g = solve_hemisphere_graph(&curve, &PolarParams::default())?;
        let (_, u3) = graph_collar(&g, &ellipse_collar_params())?;
        out.push((u3.max_abs() / u3.max_error(), format!("e = {e}")));
    }
    Ok(least(out))
}

type CheckFn = fn(&Corpus, Mutation) -> Measured;

struct Entry {
    id: &'static str,
    module: &'static str,
    identity: &'static str,
    bound: Bound,
    tolerance: f64,
    full_only: bool,
    run: CheckFn,
}

const fn at_most(id: &'static str, module: &'static str, identity: &'static str, tolerance: f64, run: CheckFn) -> Entry {
    Entry { id, module, identity, bound: Bound::AtMost, tolerance, full_only: false, run }
}

const fn above(id: &'static str, module: &'static str, identity: &'static str, tolerance: f64, run: CheckFn) -> Entry {
    Entry { id, module, identity, bound: Bound::Above, tolerance, full_only: false, run }
}

const fn full(e: Entry) -> Entry {
    Entry { full_only: true, ..e }
}

const CHECKS: &[Entry] = &[
    at_most("curves.total_curvature", "curves", "total curvature 2π per loop", 1e-9, |c, _| total_curvature(c)),
    at_most("curves.offsets", "curves", "normal offsets of circles", 1e-9, |c, _| offsets(c)),
    at_most("curves.osculating", "curves", "inscribed osculating circles", 1e-8, |c, _| osculating(c)),
    at_most("expansion.u2_law", "expansion", "boundary law u2 = κ/2", 1e-6, |c, _| u2_law(c)),
    above("expansion.recursion_order", "expansion", "formal expansion residual O(x^K)", 0.95 * 6.0, |c, _| recursion_slope(c)),
    at_most("solver.newton_residual", "solver", "minimal surface equation residual", 1e-9, |c, _| newton(c)),
    at_most("solver.annulus_existence", "solver", "annulus existence threshold", 0.0, |c, _| existence(c)),
    at_most("geometry.gauss_closed_form", "geometry", "Gauss equation (closed form)", 1e-5, |c, _| gauss_closed_form(c)),
    at_most("geometry.gauss_solved", "geometry", "Gauss equation (solved)", 1e-4, |c, _| gauss_solved(c)),
    at_most("geometry.conformal_change", "geometry", "conformal change of second fundamental form", 1e-6, |c, _| conformal(c)),
    at_most("renarea.hemisphere_hadamard", "renarea", "Hadamard regularization on hemispheres", 1e-4, |_, _| hemisphere_renarea(false)),
    at_most("renarea.hemisphere_gauss_bonnet", "renarea", "Gauss–Bonnet formula on hemispheres", 1e-8, |_, _| hemisphere_renarea(true)),
    at_most("renarea.cross_method", "renarea", "Gauss–Bonnet formula vs Hadamard", 1e-3, |c, _| cross_method(c)),
    above("renarea.spectrum_bound", "renarea", "spectrum bound 𝒜 < 2π(2k+ℓ-2)", 0.0, |c, _| spectrum(c)),
    at_most("renarea.non_orthogonal", "renarea", "divergent x^-1 term off orthogonality", 0.05, |c, _| non_orthogonal(c)),
    at_most("renarea.disjoint_union", "renarea", "additivity over disjoint unions", 1e-8, |c, _| disjoint_union(c)),
    at_most("variation.indicial_roots", "variation", "indicial roots (-1, 2)", 1e-3, |c, _| indicial(c)),
    at_most("variation.jacobi_fields", "variation", "Jacobi fields of the hemisphere", 1e-7, |c, _| jacobi_fields(c)),
    full(at_most("variation.first_variation", "variation", "first variation -3∮φ̇₀u₃ds", 1e-2, first_variation_fd)),
    at_most("variation.second_variation_kernel", "variation", "second variation kernel (modes 0, 1)", 1e-5, |c, _| second_variation_kernel(c)),
    full(at_most("variation.second_variation_fd", "variation", "second variation via DN map", 2e-2, |c, _| second_variation_fd(c))),
    at_most("variation.dn_symmetry", "variation", "symmetry of the DN form", 1e-5, |c, _| dn_symmetry(c)),
    at_most("willmore.identity", "willmore", "Willmore identity 𝒜 = -½𝒲", 2e-3, |c, _| willmore(c, false)),
    at_most("willmore.round_sphere", "willmore", "𝒲 of the doubled hemisphere is 4π", 1e-3, |c, _| willmore(c, true)),
    at_most("willmore.topology", "willmore", "Euler characteristic of the double", 0.0, |c, _| doubled_topology(c)),
    full(above("collar.rigidity", "collar", "u3 resolved along ellipse continuation", 5.0, |c, _| rigidity(c))),
];

fn evaluate(e: &Entry, corpus: &Corpus, opts: &SuiteOptions) -> Check {
    let tolerance = match e.bound {
        Bound::AtMost => e.tolerance * opts.profile.scale,
        Bound::Above => e.tolerance,
    };
    let (value, detail) = match (e.run)(corpus, opts.mutation) {
        Ok((v, d)) => (Some(v), d),
        Err(err) => (None, err.to_string()),
    };
    let passed = match (value, e.bound) {
        (Some(v), Bound::AtMost) => v <= tolerance,
        (Some(v), Bound::Above) => v > tolerance,
        (None, _) => false,
    };
    Check { id: e.id, module: e.module, identity: e.identity, value, bound: e.bound, tolerance, passed, detail }
}

/// Runs every check of the profile. Failures are part of the summary;
/// the error path is reserved for setup problems.
pub fn run_validation_suite(opts: &SuiteOptions) -> Result<SuiteRun, CliError> {
    let corpus = Corpus::new(opts.seed);
    let entries: Vec<&Entry> = CHECKS.iter().filter(|e| opts.profile.full || !e.full_only).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.workers.max(1)).build().map_err(|e| CliError::Io(e.to_string()))?;
    let checks: Vec<Check> = pool.install(|| entries.par_iter().map(|e| evaluate(e, &corpus, opts)).collect());
    let passed = checks.iter().filter(|c| c.passed).count();
    let summary = Summary { profile: opts.profile.name.clone(), seed: opts.seed, mutation: opts.mutation, passed, failed: checks.len() - passed, checks };
    let mut bundle = Bundle::default();
    bundle.json("summary.json", &summary)?;
    bundle.csv("checks.csv", &summary.checks)?;
    let hash = content_hash(&(&opts.profile, opts.seed, opts.mutation))?;
    bundle.seal(&hash)?;
    Ok(SuiteRun { summary, bundle })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_and_check_ids() {
        assert!(Profile::named("default").unwrap().full);
        assert_eq!(Profile::named("zero").unwrap().scale, 0.0);
        assert!(matches!(Profile::named("lenient"), Err(CliError::Spec(_))));
        let mut ids: Vec<&str> = CHECKS.iter().map(|e| e.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), CHECKS.len());
    }

    #[test]
    fn seeded_loops_are_reproducible() {
        let c = Corpus::new(11);
        let a = random_loop(&mut c.rng(1)).unwrap();
        let b = random_loop(&mut c.rng(1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_loop(&mut Corpus::new(12).rng(1)).unwrap());
    }
}
