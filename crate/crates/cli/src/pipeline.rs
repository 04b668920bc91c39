//! One case: solve → forms → renarea → variation → willmore.

use serde::Serialize;

use renarea::curves::BoundaryCurve;
use renarea::geometry::gauss_identity_residual;
use renarea::renarea::{default_schedule, gauss_bonnet_renarea, geometric_schedule, renarea_report, GbMode, Quadrature, RenAreaReport};
use renarea::solver::collar::{CollarParams, U3Profile};
use renarea::solver::hemisphere::{solve_hemisphere_graph, HemisphereGraph, PolarParams};
use renarea::solver::rotational::{solve_rotational, RotationalProfile};
use renarea::surface::{graph_collar, Surface};
use renarea::variation::{family_differences, first_variation, indicial_roots, second_variation, DnMap, DnParams, IndicialRoots};
use renarea::willmore::{double_surface, willmore_identity_check, DoubledSurface};

use crate::bundle::{content_hash, Bundle};
use crate::error::{AtStage, CliError, Stage};
use crate::spec::{CaseSpec, CurveSource, ScheduleSpec, VariationSpec};

/// A solved surface of either supported kind.
pub enum Solved {
    Graph(HemisphereGraph<f64>),
    Rotational(RotationalProfile<f64>),
}

impl Solved {
    pub fn surface(&self) -> &dyn Surface<f64> {
        match self {
            Solved::Graph(g) => g,
            Solved::Rotational(r) => r,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurfaceSummary {
    pub kind: &'static str,
    pub boundary_loops: usize,
    pub boundary_length: f64,
    /// Final Newton residual (graph) or conservation defect (rotational).
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct U3Summary {
    pub max_abs: f64,
    pub max_error: f64,
    /// `max |v(s, 0) - κ/2|` of the collar solve.
    pub u2_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VariationRow {
    pub case_hash: String,
    pub label: String,
    pub first: f64,
    pub first_error: f64,
    pub second: Option<f64>,
    pub second_error: Option<f64>,
    pub fd_first: Option<f64>,
    pub fd_second: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WillmoreSummary {
    pub willmore: f64,
    pub renarea: f64,
    /// `|𝒜 + ½𝒲|`, minimal surfaces only.
    pub discrepancy: f64,
    pub budget: f64,
    pub euler_characteristic: i32,
    pub seam_normal_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FailureSummary {
    pub stage: Option<Stage>,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub case_hash: String,
    pub seed: u64,
    pub surface: Option<SurfaceSummary>,
    pub gauss_residual: Option<f64>,
    pub renarea: Option<RenAreaReport<f64>>,
    pub indicial: Option<IndicialRoots<f64>>,
    pub u3: Option<U3Summary>,
    pub variations: Vec<VariationRow>,
    pub willmore: Option<WillmoreSummary>,
    pub failure: Option<FailureSummary>,
}

/// A finished case. On failure the report and bundle hold every stage
/// that completed.
pub struct CaseRun {
    pub report: CaseReport,
    pub bundle: Bundle,
    pub error: Option<CliError>,
}

impl CaseRun {
    pub fn into_result(self) -> Result<CaseRun, CliError> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

#[derive(Serialize)]
struct EpsRow<'a> {
    case_hash: &'a str,
    eps: f64,
    area: f64,
}

#[derive(Serialize)]
struct U3Row<'a> {
    case_hash: &'a str,
    s: f64,
    u3: f64,
    error: f64,
}

#[derive(Serialize)]
struct VertexRow {
    index: usize,
    x: f64,
    y: f64,
    z: f64,
    hbar: f64,
}

#[derive(Serialize)]
struct FaceRow {
    a: usize,
    b: usize,
    c: usize,
}

#[derive(Serialize)]
struct MeshManifest<'a> {
    case_hash: &'a str,
    vertices: &'static str,
    faces: &'static str,
    vertex_count: usize,
    face_count: usize,
    euler_characteristic: i32,
    seam: &'a [usize],
}

/// Identity of the surface a report describes: the case without its
/// output location, plus the boundary coefficients actually used.
pub fn case_hash(spec: &CaseSpec, boundary: Option<&BoundaryCurve<f64>>) -> Result<String, CliError> {
    let mut s = spec.clone();
    s.out = None;
    if let CurveSource::File { path } = &mut s.curve {
        *path = path.file_name().map(Into::into).unwrap_or_default();
    }
    content_hash(&(s, boundary))
}

pub fn polar_params(spec: &CaseSpec) -> PolarParams {
    PolarParams { nr: spec.solver.nr, ntheta: spec.solver.ntheta, ..Default::default() }
}

pub fn solve(spec: &CaseSpec, curve: &BoundaryCurve<f64>) -> Result<Solved, CliError> {
    let params = polar_params(spec);
    match &spec.curve {
        CurveSource::Circle { radius, center } => HemisphereGraph::hemisphere(*center, *radius, &params).map(Solved::Graph),
        CurveSource::Annulus { r1, r2, branch } => solve_rotational(r1.min(*r2), Some(r1.max(*r2)), *branch).map(Solved::Rotational),
        _ if curve.loop_count() == 1 => solve_hemisphere_graph(curve, &params).map(Solved::Graph),
        _ => return Err(CliError::Spec("general curves with several loops have no solver; use an annulus".into())),
    }
    .at(Stage::Solve)
}

fn schedule(spec: &CaseSpec, s: &dyn Surface<f64>) -> Vec<f64> {
    match &spec.schedule {
        ScheduleSpec::Default => default_schedule(s),
        ScheduleSpec::Geometric { eps_max, ratio, n } => geometric_schedule(*eps_max, *ratio, *n),
        ScheduleSpec::Explicit { eps } => eps.clone(),
    }
}

pub fn collar_params(spec: &CaseSpec, length: f64) -> CollarParams {
    let s = &spec.solver;
    CollarParams { ns: s.collar_samples, nx: s.collar_nodes, x_max: s.collar_height * length / std::f64::consts::TAU, ..Default::default() }
}

/// Gauss-equation residual on an interior sample grid.
pub fn gauss_residual(s: &dyn Surface<f64>) -> Result<f64, renarea::Error> {
    let (lo, hi) = s.p_range();
    let ps: Vec<f64> = (1..10).map(|i| lo + (hi - lo) * i as f64 / 10.0).collect();
    let period = s.q_period();
    let qs: Vec<f64> = (0..8).map(|j| period * (j as f64 + 0.25) / 8.0).collect();
    gauss_identity_residual(s, &ps, &qs, 1e-3)
}

/// `𝒜` by Gauss–Bonnet of the minimal disk spanning an offset of `base`.
pub fn offset_renarea(base: &BoundaryCurve<f64>, params: &PolarParams, phi: &dyn Fn(f64) -> f64, t: f64) -> Result<f64, renarea::Error> {
    let c = base.normal_offset(|_, s| t * phi(s))?;
    let g = solve_hemisphere_graph(&c, params)?;
    Ok(gauss_bonnet_renarea(&g, GbMode::Minimal, &Quadrature::default())?.value)
}

fn variation_row(
    spec: &CaseSpec,
    v: &VariationSpec,
    curve: &BoundaryCurve<f64>,
    u3: &U3Profile<f64>,
    dn: Option<&DnMap<'_, f64>>,
    hash: &str,
) -> Result<VariationRow, CliError> {
    let phi = v.profile(u3.length);
    let first = first_variation(u3, &phi).at(Stage::Variation)?;
    let mut row = VariationRow {
        case_hash: hash.to_string(),
        label: v.label(),
        first: first.value,
        first_error: first.error,
        second: None,
        second_error: None,
        fd_first: None,
        fd_second: None,
    };
    if let Some(dn) = dn {
        let second = second_variation(dn, &phi).at(Stage::Variation)?;
        row.second = Some(second.value);
        row.second_error = Some(second.error);
    }
    if let Some(h) = v.fd_step {
        let params = polar_params(spec);
        let fd = family_differences(h, |t| offset_renarea(curve, &params, &phi, t)).at(Stage::Variation)?;
        row.fd_first = Some(fd.first.value);
        row.fd_second = Some(fd.second.value);
    }
    Ok(row)
}

fn mesh_files(bundle: &mut Bundle, d: &DoubledSurface<f64>, hash: &str) -> Result<(), CliError> {
    let vertices: Vec<VertexRow> =
        d.vertices.iter().zip(&d.hbar).enumerate().map(|(index, (v, &hbar))| VertexRow { index, x: v[0], y: v[1], z: v[2], hbar }).collect();
    let faces: Vec<FaceRow> = d.faces.iter().map(|f| FaceRow { a: f[0], b: f[1], c: f[2] }).collect();
    bundle.csv("mesh_vertices.csv", &vertices)?;
    bundle.csv("mesh_faces.csv", &faces)?;
    bundle.json(
        "mesh.json",
        &MeshManifest {
            case_hash: hash,
            vertices: "mesh_vertices.csv",
            faces: "mesh_faces.csv",
            vertex_count: d.vertices.len(),
            face_count: d.faces.len(),
            euler_characteristic: d.euler_characteristic,
            seam: &d.seam,
        },
    )
}

fn stages(spec: &CaseSpec, curve: &BoundaryCurve<f64>, report: &mut CaseReport, bundle: &mut Bundle) -> Result<(), CliError> {
    let hash = report.case_hash.clone();
    let quad = Quadrature::default();
    let solved = solve(spec, curve)?;
    let s = solved.surface();
    report.surface = Some(SurfaceSummary {
        kind: match &solved {
            Solved::Graph(_) => "polar_graph",
            Solved::Rotational(_) => "rotational",
        },
        boundary_loops: s.boundary_loops(),
        boundary_length: s.boundary_length(),
        residual: match &solved {
            Solved::Graph(g) => g.residual,
            Solved::Rotational(r) => r.residual,
        },
    });

    report.gauss_residual = Some(gauss_residual(s).at(Stage::Forms)?);

    let eps = schedule(spec, s);
    let ren = renarea_report(s, &hash, &spec.name, &eps, &quad).at(Stage::Renarea)?;
    let rows: Vec<EpsRow> = ren.hadamard.eps.iter().zip(&ren.hadamard.areas).map(|(&eps, &area)| EpsRow { case_hash: &hash, eps, area }).collect();
    bundle.csv("hadamard.csv", &rows)?;
    report.renarea = Some(ren);

    let nq = if matches!(solved, Solved::Graph(_)) { 16 } else { 4 };
    report.indicial = Some(indicial_roots(s, nq).at(Stage::Indicial)?);

    if let Solved::Graph(g) = &solved {
        let (sol, u3) = graph_collar(g, &collar_params(spec, s.boundary_length())).at(Stage::Collar)?;
        report.u3 = Some(U3Summary { max_abs: u3.max_abs(), max_error: u3.max_error(), u2_defect: sol.u2_defect() });
        let rows: Vec<U3Row> = (0..u3.s.len()).map(|j| U3Row { case_hash: &hash, s: u3.s[j], u3: u3.value[j], error: u3.error[j] }).collect();
        bundle.csv("u3.csv", &rows)?;
        if !spec.variations.is_empty() {
            let dn = if spec.variations.iter().any(|v| v.second) { Some(DnMap::new(g, &DnParams::default()).at(Stage::Variation)?) } else { None };
            for v in &spec.variations {
                let row = variation_row(spec, v, curve, &u3, dn.as_ref(), &hash)?;
                report.variations.push(row);
            }
            bundle.csv("variations.csv", &report.variations)?;
        }
    }

    if spec.willmore {
        let [np, nq] = spec.solver.mesh;
        let d = double_surface(s, np, nq, &quad).at(Stage::Willmore)?;
        let ren = report.renarea.as_ref().expect("renarea stage ran");
        let check = willmore_identity_check(s, ren, &d).at(Stage::Willmore)?;
        report.willmore = Some(WillmoreSummary {
            willmore: check.willmore,
            renarea: check.renarea,
            discrepancy: check.discrepancy,
            budget: check.budget,
            euler_characteristic: d.euler_characteristic,
            seam_normal_defect: d.seam_normal_defect,
        });
        mesh_files(bundle, &d, &hash)?;
    }
    Ok(())
}

/// Runs every configured stage of a validated case.
pub fn run_case(spec: &CaseSpec) -> CaseRun {
    let curve = spec.boundary();
    let hash = case_hash(spec, curve.as_ref().ok()).unwrap_or_default();
    let mut report = CaseReport {
        case: spec.name.clone(),
        case_hash: hash.clone(),
        seed: spec.seed,
        surface: None,
        gauss_residual: None,
        renarea: None,
        indicial: None,
        u3: None,
        variations: Vec::new(),
        willmore: None,
        failure: None,
    };
    let mut bundle = Bundle::default();
    let error = match curve {
        Ok(curve) => stages(spec, &curve, &mut report, &mut bundle).err(),
        Err(e) => Some(e),
    };
    if let Some(e) = &error {
        report.failure = Some(FailureSummary { stage: e.stage(), message: e.to_string(), exit_code: e.exit_code() });
    }
    let sealed = bundle.json("report.json", &report).and_then(|_| bundle.seal(&hash));
    let error = match (error, sealed) {
        (Some(e), _) | (None, Err(e)) => Some(e),
        (None, Ok(())) => None,
    };
    CaseRun { report, bundle, error }
}
