//! Parameter sweeps: one case per axis value, run on a bounded pool.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use renarea::Error as CoreError;

use crate::bundle::{content_hash, Bundle};
use crate::error::{CliError, Stage};
use crate::pipeline::run_case;
use crate::spec::{Axis, CaseSpec};

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub case_hash: String,
    pub status: &'static str,
    /// `false` when no surface spans the curve (e.g. too wide an annulus).
    pub exists: bool,
    pub stage: Option<Stage>,
    pub renarea: Option<f64>,
    pub hadamard: Option<f64>,
    pub discrepancy: Option<f64>,
    pub spectrum_margin: Option<f64>,
    pub u3_max: Option<f64>,
    pub willmore: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub axis: Axis,
    pub template_hash: String,
    pub points: usize,
    pub failures: usize,
    /// Last value with a surface and first value without one, when the
    /// existence flag changes along the axis.
    pub existence_bracket: Option<(f64, f64)>,
}

pub struct SweepRun {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
    pub bundle: Bundle,
}

fn row(index: usize, value: f64, spec: Result<CaseSpec, CliError>) -> SweepRow {
    let mut r = SweepRow {
        index,
        value,
        case_hash: String::new(),
        status: "failed",
        exists: true,
        stage: None,
        renarea: None,
        hadamard: None,
        discrepancy: None,
        spectrum_margin: None,
        u3_max: None,
        willmore: None,
        error: None,
    };
    let spec = match spec {
        Ok(s) => s,
        Err(e) => {
            r.error = Some(e.to_string());
            return r;
        }
    };
    let run = run_case(&spec);
    let rep = &run.report;
    r.case_hash = rep.case_hash.clone();
    if let Some(ren) = &rep.renarea {
        r.renarea = Some(ren.value());
        r.hadamard = Some(ren.hadamard.renarea);
        r.discrepancy = Some(ren.discrepancy);
        r.spectrum_margin = Some(ren.spectrum_margin);
    }
    r.u3_max = rep.u3.as_ref().map(|u| u.max_abs);
    r.willmore = rep.willmore.as_ref().map(|w| w.willmore);
    match &run.error {
        None => r.status = "ok",
        Some(e) => {
            r.stage = e.stage();
            r.exists = !matches!(e, CliError::Stage { source: CoreError::NoAnnulus { .. }, .. });
            r.error = Some(e.to_string());
        }
    }
    r
}

fn bracket(rows: &[SweepRow]) -> Option<(f64, f64)> {
    rows.windows(2).find(|w| w[0].exists != w[1].exists).map(|w| (w[0].value, w[1].value))
}

/// Runs the template at every axis value. Point failures are recorded in
/// the table and do not stop the sweep.
pub fn run_sweep(template: &Value, axis: &Axis, workers: usize) -> Result<SweepRun, CliError> {
    CaseSpec::from_value(template.clone())?;
    let values = axis.values();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().map_err(|e| CliError::Io(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        values.par_iter().enumerate().map(|(i, &v)| row(i, v, axis.apply(template, v).and_then(CaseSpec::from_value))).collect()
    });
    let template_hash = content_hash(template)?;
    let summary = SweepSummary {
        axis: axis.clone(),
        template_hash: template_hash.clone(),
        points: rows.len(),
        failures: rows.iter().filter(|r| r.status != "ok").count(),
        existence_bracket: bracket(&rows),
    };
    let mut bundle = Bundle::default();
    bundle.csv("sweep.csv", &rows)?;
    bundle.json("sweep.json", &summary)?;
    bundle.seal(&template_hash)?;
    Ok(SweepRun { rows, summary, bundle })
}
