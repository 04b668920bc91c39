//! One line per acceptance criterion. Tolerances are pinned here.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use renarea::curves::BoundaryCurve;
use renarea::expansion::{formal_recursion, loglog_slope};
use renarea::geometry::gauss_identity_residual;
use renarea::renarea::{default_schedule, geometric_schedule, hadamard_renarea, renarea_report, Quadrature, RenAreaReport};
use renarea::solver::collar::CollarParams;
use renarea::solver::hemisphere::{solve_hemisphere_graph, HemisphereGraph, PolarParams};
use renarea::solver::rotational::{solve_rotational, Branch, RotationalProfile};
use renarea::surface::{graph_collar, Surface, TiltedStrip};
use renarea::variation::{family_differences, first_variation, indicial_roots, second_variation, DnMap, DnParams, Mutation};
use renarea::willmore::{double_surface, willmore_identity_check};
use renarea_cli::pipeline::{gauss_residual, offset_renarea};
use renarea_cli::{run_validation_suite, Profile, SuiteOptions};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

struct Corpus {
    ellipse: OnceLock<HemisphereGraph<f64>>,
    shallow: OnceLock<RotationalProfile<f64>>,
    hemispheres: OnceLock<Vec<HemisphereGraph<f64>>>,
}

const RADII: [f64; 3] = [0.5, 1.0, 2.0];

fn collar_for(length: f64) -> CollarParams {
    CollarParams { ns: 64, nx: 24, x_max: 0.25 * length / TAU, ..Default::default() }
}

impl Corpus {
    fn ellipse_curve() -> BoundaryCurve<f64> {
        BoundaryCurve::ellipse(2.0, 1.0).unwrap()
    }

    fn ellipse(&self) -> &HemisphereGraph<f64> {
        self.ellipse.get_or_init(|| solve_hemisphere_graph(&Self::ellipse_curve(), &PolarParams::default()).unwrap())
    }

    fn shallow(&self) -> &RotationalProfile<f64> {
        self.shallow.get_or_init(|| solve_rotational(1.0, Some(1.2), Branch::Shallow).unwrap())
    }

    fn hemispheres(&self) -> &[HemisphereGraph<f64>] {
        self.hemispheres.get_or_init(|| RADII.iter().map(|&r| HemisphereGraph::hemisphere([0.0, 0.0], r, &PolarParams::default()).unwrap()).collect())
    }

    fn report(&self, s: &dyn Surface<f64>, label: &str) -> Result<RenAreaReport<f64>, renarea::Error> {
        renarea_report(s, label, label, &default_schedule(s), &Quadrature::default())
    }
}

fn hemisphere_exactness(c: &Corpus) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (r, h) in RADII.iter().zip(c.hemispheres()) {
        let rep = c.report(h, "hemisphere")?;
        let had = (rep.hadamard.renarea + TAU).abs();
        let gb = (rep.gauss_bonnet.value + TAU).abs();
        let (_, u3) = graph_collar(h, &collar_for(TAU * r))?;
        let u3 = u3.max_abs();
        ok &= had <= 1e-4 && gb <= 1e-8 && u3 <= 1e-6;
        detail.push(format!("R={r}: Hadamard {had:.1e}, Gauss-Bonnet {gb:.1e}, |u3| {u3:.1e}"));
    }
    Ok((ok, detail.join("; ")))
}

fn cross_method(c: &Corpus) -> Outcome {
    let a = c.report(c.shallow(), "catenoid")?.discrepancy;
    let b = c.report(c.ellipse(), "ellipse")?.discrepancy;
    Ok((a <= 1e-3 && b <= 1e-3, format!("shallow catenoid {a:.2e}, ellipse {b:.2e}")))
}

fn expansion_law(c: &Corpus) -> Outcome {
    let (sol, u3) = graph_collar(c.ellipse(), &collar_for(Corpus::ellipse_curve().loops()[0].length()))?;
    let defect = sol.u2_defect();
    let samples = Corpus::ellipse_curve().arclength()?[0].samples(u3.s.len());
    let hs = [0.04, 0.02, 0.01, 0.005];
    let k = 6;
    let slope = loglog_slope(&hs, &formal_recursion(&samples, &u3.value, k)?.residual_certificate(&hs));
    Ok((defect <= 1e-6 && slope >= 0.95 * k as f64, format!("u2 defect {defect:.1e}, residual slope {slope:.3} for K={k}")))
}

fn indicial(c: &Corpus) -> Outcome {
    let cases: [(&str, &dyn Surface<f64>, usize); 3] = [("hemisphere", &c.hemispheres()[1], 16), ("catenoid", c.shallow(), 4), ("ellipse", c.ellipse(), 16)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, s, nq) in cases {
        let (a, b) = indicial_roots(s, nq)?.roots;
        ok &= (a + 1.0).abs() <= 1e-3 && (b - 2.0).abs() <= 1e-3;
        detail.push(format!("{label} ({a:.5}, {b:.5})"));
    }
    Ok((ok, detail.join("; ")))
}

fn first_variation_fd(c: &Corpus) -> Outcome {
    let curve = Corpus::ellipse_curve();
    let (_, u3) = graph_collar(c.ellipse(), &collar_for(curve.loops()[0].length()))?;
    let l = u3.length;
    let modes: [(&str, Box<dyn Fn(f64) -> f64>); 3] =
        [("1", Box::new(|_| 1.0)), ("cos s", Box::new(move |s| (TAU * s / l).cos())), ("cos 2s", Box::new(move |s| (2.0 * TAU * s / l).cos()))];
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, phi) in &modes {
        let analytic = first_variation(&u3, &**phi)?.value;
        let fd = family_differences(0.01, |t| offset_renarea(&curve, &PolarParams::default(), &**phi, t))?.first.value;
        let diff = (analytic - fd).abs();
        ok &= diff <= 1e-2 * fd.abs() || diff <= 1e-4;
        detail.push(format!("{label}: {analytic:.6} vs {fd:.6}"));
    }
    Ok((ok, detail.join("; ")))
}

fn second_variation_fd(c: &Corpus) -> Outcome {
    let dn = DnMap::new(&c.hemispheres()[1], &DnParams::default())?;
    let m0 = second_variation(&dn, &|_| 1.0)?.value;
    let m1 = second_variation(&dn, &|s: f64| s.cos())?.value;
    let phi = |s: f64| (2.0 * s).cos();
    let m2 = second_variation(&dn, &phi)?.value;
    let base = BoundaryCurve::circle([0.0, 0.0], 1.0)?;
    let fd = family_differences(0.02, |t| offset_renarea(&base, &PolarParams::default(), &phi, t))?.second.value;
    let rel = (m2 - fd).abs() / fd.abs();
    Ok((m0.abs() <= 1e-5 && m1.abs() <= 1e-5 && rel <= 2e-2, format!("modes 0, 1: {m0:.1e}, {m1:.1e}; mode 2: {m2:.5} vs {fd:.5} ({rel:.1e})")))
}

fn willmore(c: &Corpus) -> Outcome {
    let quad = Quadrature::default();
    let cases: [(&str, &dyn Surface<f64>); 3] = [("hemisphere", &c.hemispheres()[1]), ("catenoid", c.shallow()), ("ellipse", c.ellipse())];
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, s) in cases {
        let rep = c.report(s, label)?;
        let w = willmore_identity_check(s, &rep, &double_surface(s, 16, 32, &quad)?)?;
        ok &= w.discrepancy <= 2e-3;
        detail.push(format!("{label} {:.1e}", w.discrepancy));
        if label == "hemisphere" {
            let dev = (w.willmore - 4.0 * PI).abs();
            ok &= dev <= 1e-3;
            detail.push(format!("doubled hemisphere |W - 4π| {dev:.1e}"));
        }
    }
    Ok((ok, detail.join("; ")))
}

fn gauss(c: &Corpus) -> Outcome {
    let mut closed = 0.0f64;
    for h in c.hemispheres() {
        closed = closed.max(gauss_residual(h)?);
    }
    for slope in [0.0, 0.3] {
        let t = TiltedStrip { slope, length: 2.0, x_max: 1.0 };
        closed = closed.max(gauss_identity_residual(&t, &[0.2, 0.4, 0.6, 0.8], &[0.3, 1.1], 1e-3)?);
    }
    let solved = gauss_residual(c.ellipse())?.max(gauss_residual(c.shallow())?);
    Ok((closed <= 1e-5 && solved <= 1e-4, format!("closed form {closed:.1e}, solved {solved:.1e}")))
}

fn spectrum(c: &Corpus) -> Outcome {
    let deep = solve_rotational(1.0, Some(1.2), Branch::Deep)?;
    let cases: [(&str, &dyn Surface<f64>); 4] =
        [("hemisphere", &c.hemispheres()[1]), ("shallow catenoid", c.shallow()), ("deep catenoid", &deep), ("ellipse", c.ellipse())];
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, s) in cases {
        let m = c.report(s, label)?.spectrum_margin;
        // round hemispheres attain the bound; everything else is strict
        ok &= if label == "hemisphere" { m > -1e-4 } else { m > 0.0 };
        detail.push(format!("{label} margin {m:.4e}"));
    }
    Ok((ok, detail.join("; ")))
}

fn non_orthogonal(_: &Corpus) -> Outcome {
    let t = TiltedStrip::<f64> { slope: 0.3, length: 3.0, x_max: 0.5 };
    let fit = hadamard_renarea(&t, &geometric_schedule(0.02, 0.5, 8), &Quadrature { nq: 32, ..Default::default() })?;
    Ok(match (fit.well_defined, fit.divergent_exponent) {
        (false, Some(p)) => ((p + 1.0).abs() <= 0.05, format!("flagged, exponent {p:.4}")),
        (w, p) => (false, format!("well_defined {w}, exponent {p:?}")),
    })
}

fn rigidity(_: &Corpus) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for e in [0.2f64, 0.4, 0.6, 0.8] {
        let curve = BoundaryCurve::ellipse(1.0, (1.0 - e * e).sqrt())?;
        let g = solve_hemisphere_graph(&curve, &PolarParams::default())?;
        let (_, u3) = graph_collar(&g, &collar_for(curve.loops()[0].length()))?;
        let ratio = u3.max_abs() / u3.max_error();
        ok &= ratio > 5.0;
        detail.push(format!("e={e} ratio {ratio:.0}"));
    }
    Ok((ok, detail.join("; ")))
}

fn determinism(_: &Corpus) -> Outcome {
    let opts = SuiteOptions { profile: Profile::named("default")?, seed: 17, workers: 1, mutation: Mutation::None };
    let a = run_validation_suite(&opts)?;
    let b = run_validation_suite(&opts)?;
    let n = a.bundle.files.len();
    Ok((a.bundle == b.bundle && a.summary.ok(), format!("{n} files byte-identical: {}, suite passed: {}", a.bundle == b.bundle, a.summary.ok())))
}

#[test]
fn acceptance() {
    let corpus = Corpus { ellipse: OnceLock::new(), shallow: OnceLock::new(), hemispheres: OnceLock::new() };
    let criteria: [(&str, fn(&Corpus) -> Outcome); 12] = [
        ("hemisphere exactness", hemisphere_exactness),
        ("cross-method identity", cross_method),
        ("expansion law", expansion_law),
        ("indicial roots", indicial),
        ("first variation", first_variation_fd),
        ("second variation", second_variation_fd),
        ("Willmore identity", willmore),
        ("Gauss identity", gauss),
        ("spectrum bound", spectrum),
        ("non-orthogonality diagnostic", non_orthogonal),
        ("rigidity probe", rigidity),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = run(&corpus).unwrap_or_else(|e| (false, format!("error: {e}")));
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
