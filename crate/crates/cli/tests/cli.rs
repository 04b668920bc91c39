use std::f64::consts::TAU;
use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

use renarea::variation::Mutation;
use renarea_cli::bundle::sha256_hex;
use renarea_cli::{run_case, run_sweep, run_validation_suite, Axis, CaseSpec, Profile, SuiteOptions, EXIT_NONCONVERGENCE, EXIT_NUMERIC, EXIT_OK, EXIT_SPEC};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_renarea"));
    c.env_remove("RENAREA_OUT");
    c
}

fn write_case(dir: &Path, name: &str, case: &Value) -> std::path::PathBuf {
    let p = dir.join(format!("{name}.json"));
    std::fs::write(&p, serde_json::to_string_pretty(case).unwrap()).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn assert_manifest_matches(dir: &Path) {
    let m = read_json(&dir.join("manifest.json"));
    for f in m["files"].as_array().unwrap() {
        let bytes = std::fs::read(dir.join(f["file"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

#[test]
fn run_writes_a_hashed_bundle_for_a_hemisphere() {
    let tmp = tempfile::tempdir().unwrap();
    let case = write_case(tmp.path(), "hemi", &json!({ "name": "hemi", "curve": { "kind": "circle", "radius": 2.0 } }));
    let out = tmp.path().join("out");
    let st = bin().args(["run", "--case"]).arg(&case).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(EXIT_OK));
    for f in ["report.json", "hadamard.csv", "u3.csv", "mesh.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    assert_manifest_matches(&out);
    let rep = read_json(&out.join("report.json"));
    let a = rep["renarea"]["hadamard"]["renarea"].as_f64().unwrap();
    assert!((a + TAU).abs() < 1e-4, "{a}");
    let hash = rep["case_hash"].as_str().unwrap();
    let csv = std::fs::read_to_string(out.join("u3.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.starts_with(hash)));
}

#[test]
fn malformed_cases_exit_with_the_spec_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        json!({ "name": "neg", "curve": { "kind": "circle", "radius": -1.0 } }),
        json!({ "name": "typo", "curve": { "kind": "circle", "radius": 1.0 }, "sovler": {} }),
        json!({ "name": "kind", "curve": { "kind": "square" } }),
    ];
    for (i, c) in cases.iter().enumerate() {
        let p = write_case(tmp.path(), &format!("c{i}"), c);
        let st = bin().args(["run", "--case"]).arg(&p).arg("--out").arg(tmp.path().join(format!("o{i}"))).status().unwrap();
        assert_eq!(st.code(), Some(EXIT_SPEC), "case {i}");
    }
    let st = bin().args(["run", "--case"]).arg(tmp.path().join("missing.json")).status().unwrap();
    assert_eq!(st.code(), Some(EXIT_SPEC));
}

#[test]
fn missing_annulus_is_nonconvergence_and_keeps_the_partial_report() {
    let tmp = tempfile::tempdir().unwrap();
    let case = write_case(tmp.path(), "wide", &json!({ "name": "wide", "curve": { "kind": "annulus", "r1": 1.0, "r2": 3.0 } }));
    let out = tmp.path().join("out");
    let st = bin().args(["run", "--case"]).arg(&case).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(EXIT_NONCONVERGENCE));
    let rep = read_json(&out.join("report.json"));
    assert_eq!(rep["failure"]["stage"], "solve");
    assert_eq!(rep["failure"]["exit_code"], EXIT_NONCONVERGENCE);
    assert_manifest_matches(&out);
}

#[test]
fn output_root_variable_relocates_relative_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let case = write_case(tmp.path(), "hemi", &json!({ "name": "hemi", "curve": { "kind": "circle", "radius": 1.0 }, "willmore": false }));
    let root = tmp.path().join("root");
    let st = bin().env("RENAREA_OUT", &root).args(["run", "--case"]).arg(&case).args(["--out", "rel"]).status().unwrap();
    assert_eq!(st.code(), Some(EXIT_OK));
    assert!(root.join("rel/report.json").exists());
}

#[test]
fn identical_cases_give_identical_bundles() {
    let spec = CaseSpec::from_json(r#"{ "name": "e", "curve": { "kind": "ellipse", "a": 1.5, "b": 1.0 }, "variations": [{ "mode": 2 }] }"#).unwrap();
    let a = run_case(&spec).into_result().unwrap();
    let b = run_case(&spec).into_result().unwrap();
    assert_eq!(a.bundle, b.bundle);
    assert_eq!(a.report.variations.len(), 1);
}

#[test]
fn sweep_over_radius_keeps_the_hemisphere_value() {
    let template = json!({ "name": "r", "curve": { "kind": "circle", "radius": 1.0 }, "willmore": false });
    let axis: Axis = "curve.radius=0.5:2.0:3".parse().unwrap();
    let run = run_sweep(&template, &axis, 2).unwrap();
    assert_eq!(run.summary.failures, 0);
    assert_eq!(run.rows.iter().map(|r| r.value).collect::<Vec<_>>(), vec![0.5, 1.25, 2.0]);
    for r in &run.rows {
        assert!((r.renarea.unwrap() + TAU).abs() < 1e-4, "{r:?}");
    }
    assert!(run.bundle.get("sweep.csv").is_some());
}

#[test]
fn sweep_brackets_the_end_of_annulus_existence() {
    let template = json!({ "name": "a", "curve": { "kind": "annulus", "r1": 1.0, "r2": 1.2 }, "willmore": false });
    let axis: Axis = "curve.r2=1.5:3.5:5".parse().unwrap();
    let run = run_sweep(&template, &axis, 1).unwrap();
    assert_eq!(run.summary.existence_bracket, Some((2.5, 3.0)));
    assert!(run.rows.iter().filter(|r| !r.exists).all(|r| r.status == "failed"));
}

#[test]
fn zero_profile_fails_the_suite() {
    let opts = SuiteOptions { profile: Profile::named("zero").unwrap(), seed: 3, workers: 1, mutation: Mutation::None };
    let run = run_validation_suite(&opts).unwrap();
    assert!(!run.summary.ok());
    assert!(run.summary.failed > run.summary.checks.len() / 2);
}

#[test]
fn flipped_first_variation_is_caught() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = bin().args(["validate", "--mutation", "flip-first-variation-sign", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(EXIT_NUMERIC));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let failed: Vec<&str> = stdout.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failed.len(), 1, "{stdout}");
    assert!(failed[0].contains("variation.first_variation"));
    assert_manifest_matches(&out);
}
