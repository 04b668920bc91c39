use renarea::curves::BoundaryCurve;
use renarea::expansion::{formal_recursion, loglog_slope};
use renarea::geometry::gauss_identity_residual;
use renarea::solver::collar::CollarParams;
use renarea::solver::hemisphere::{solve_hemisphere_graph, PolarParams};
use renarea::surface::graph_collar;

fn collar_params() -> CollarParams {
    CollarParams { ns: 64, nx: 24, x_max: 0.25, ..Default::default() }
}

#[test]
fn ellipse_collar_obeys_the_boundary_law_and_the_recursion() {
    let e = BoundaryCurve::<f64>::ellipse(2.0, 1.0).unwrap();
    let g = solve_hemisphere_graph(&e, &PolarParams::default()).unwrap();
    let (sol, u3) = graph_collar(&g, &collar_params()).unwrap();
    assert!(sol.u2_defect() < 1e-6);
    let samples = e.arclength().unwrap()[0].samples(64);
    let hs = [0.04, 0.02, 0.01, 0.005];
    for k in [4, 6, 8] {
        let ex = formal_recursion(&samples, &u3.value, k).unwrap();
        let slope = loglog_slope(&hs, &ex.residual_certificate(&hs));
        assert!(slope >= 0.95 * k as f64, "K = {k}: slope {slope}");
    }
    let ps: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let qs: Vec<f64> = (0..8).map(|i| i as f64 * 0.7).collect();
    assert!(gauss_identity_residual(&g, &ps, &qs, 1e-3).unwrap() < 1e-4);
}

#[test]
fn u3_stays_resolved_along_the_ellipse_continuation() {
    let mut previous = 0.0;
    for ecc in [0.2f64, 0.4, 0.6, 0.8] {
        let c = BoundaryCurve::<f64>::ellipse(1.0, (1.0 - ecc * ecc).sqrt()).unwrap();
        let g = solve_hemisphere_graph(&c, &PolarParams::default()).unwrap();
        let (_, u3) = graph_collar(&g, &collar_params()).unwrap();
        assert!(u3.max_abs() > 5.0 * u3.max_error(), "e = {ecc}");
        assert!(u3.max_abs() > previous);
        previous = u3.max_abs();
    }
}
