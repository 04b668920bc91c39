//! Case files: what to solve and which stages to run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use renarea::curves::{BoundaryCurve, Loop};
use renarea::solver::rotational::Branch;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    pub name: String,
    pub curve: CurveSource,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub variations: Vec<VariationSpec>,
    #[serde(default = "yes")]
    pub willmore: bool,
    /// Output directory, relative to the output root.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSource {
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Ellipse with semi-major axis `a` and the given eccentricity.
    Eccentric {
        #[serde(default = "unit")]
        a: f64,
        eccentricity: f64,
    },
    /// Concentric circles spanned by a rotational annulus.
    Annulus {
        r1: f64,
        r2: f64,
        #[serde(default = "shallow")]
        branch: Branch,
    },
    /// Fourier loops given inline.
    Loops { loops: Vec<Loop<f64>> },
    /// Curve file, relative to the case file.
    File { path: PathBuf },
}

fn unit() -> f64 {
    1.0
}

fn shallow() -> Branch {
    Branch::Shallow
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    /// Chebyshev degree of the polar graph solver (odd).
    pub nr: usize,
    /// Angular nodes of the polar graph solver (even).
    pub ntheta: usize,
    pub collar_samples: usize,
    pub collar_nodes: usize,
    /// Collar height relative to `L/2π` of the boundary.
    pub collar_height: f64,
    /// `[p, q]` intervals of the doubled mesh.
    pub mesh: [usize; 2],
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { nr: 31, ntheta: 64, collar_samples: 64, collar_nodes: 24, collar_height: 0.16, mesh: [16, 32] }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// Geometric heights scaled to the surface.
    #[default]
    Default,
    Geometric {
        eps_max: f64,
        ratio: f64,
        n: usize,
    },
    Explicit {
        eps: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Harmonic {
    #[default]
    Cos,
    Sin,
}

/// Boundary displacement `φ̇₀(s) = cos(2πms/L)` or `sin(2πms/L)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationSpec {
    pub mode: u32,
    #[serde(default)]
    pub harmonic: Harmonic,
    /// Also evaluate the second variation through the DN map.
    #[serde(default)]
    pub second: bool,
    /// Step of a finite-difference check over the offset family.
    #[serde(default)]
    pub fd_step: Option<f64>,
}

impl VariationSpec {
    pub fn label(&self) -> String {
        match (self.harmonic, self.mode) {
            (_, 0) => "1".into(),
            (Harmonic::Cos, m) => format!("cos {m}s"),
            (Harmonic::Sin, m) => format!("sin {m}s"),
        }
    }

    pub fn profile(&self, length: f64) -> impl Fn(f64) -> f64 {
        let (m, h) = (self.mode as f64, self.harmonic);
        move |s| {
            let a = std::f64::consts::TAU * m * s / length;
            match h {
                Harmonic::Cos => a.cos(),
                Harmonic::Sin => a.sin(),
            }
        }
    }
}

impl CaseSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| CliError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let spec: Self = serde_json::from_value(value).map_err(|e| CliError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))?;
        let mut spec = Self::from_json(&text)?;
        spec.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(spec)
    }

    /// Makes a relative curve file path relative to `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        if let CurveSource::File { path } = &mut self.curve {
            if path.is_relative() {
                *path = dir.join(&*path);
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Spec(m));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.name.is_empty() {
            return bad("case name is empty".into());
        }
        match &self.curve {
            CurveSource::Circle { radius, center } => {
                if !positive(*radius) || !center.iter().all(|c| c.is_finite()) {
                    return bad(format!("circle radius {radius} must be positive"));
                }
            }
            CurveSource::Ellipse { a, b } => {
                if !positive(*a) || !positive(*b) {
                    return bad(format!("ellipse axes ({a}, {b}) must be positive"));
                }
            }
            CurveSource::Eccentric { a, eccentricity } => {
                if !positive(*a) || !(0.0..1.0).contains(eccentricity) {
                    return bad(format!("eccentricity {eccentricity} must lie in [0, 1)"));
                }
            }
            CurveSource::Annulus { r1, r2, .. } => {
                if !positive(*r1) || !positive(*r2) || r1 == r2 {
                    return bad(format!("annulus radii ({r1}, {r2}) must be positive and distinct"));
                }
            }
            CurveSource::Loops { loops } => {
                if loops.is_empty() {
                    return bad("curve has no loops".into());
                }
            }
            CurveSource::File { .. } => {}
        }
        let s = &self.solver;
        if s.nr < 5 || s.nr.is_multiple_of(2) || s.ntheta < 8 || s.ntheta % 2 == 1 {
            return bad(format!("polar grid {} × {} must have odd nr ≥ 5 and even ntheta ≥ 8", s.nr, s.ntheta));
        }
        if s.collar_samples < 8 || s.collar_nodes < 8 || !positive(s.collar_height) {
            return bad("collar grid too coarse".into());
        }
        if s.mesh[0] < 2 || s.mesh[1] < 3 {
            return bad(format!("mesh {:?} too coarse", s.mesh));
        }
        match &self.schedule {
            ScheduleSpec::Default => {}
            ScheduleSpec::Geometric { eps_max, ratio, n } => {
                if !positive(*eps_max) || !(*ratio > 0.0 && *ratio < 1.0) || *n < 5 {
                    return bad("geometric schedule needs eps_max > 0, 0 < ratio < 1 and n ≥ 5".into());
                }
            }
            ScheduleSpec::Explicit { eps } => {
                if eps.len() < 5 || !eps.iter().all(|&e| positive(e)) {
                    return bad("explicit schedule needs at least five positive heights".into());
                }
            }
        }
        for v in &self.variations {
            if v.fd_step.is_some_and(|h| !positive(h)) {
                return bad(format!("variation {}: fd_step must be positive", v.label()));
            }
        }
        if !self.variations.is_empty() && matches!(self.curve, CurveSource::Annulus { .. }) {
            return bad("variations need a single-loop disk".into());
        }
        Ok(())
    }

    /// The boundary curve. Annuli are returned as two concentric loops.
    pub fn boundary(&self) -> Result<BoundaryCurve<f64>, CliError> {
        let curve = match &self.curve {
            CurveSource::Circle { radius, center } => BoundaryCurve::circle(*center, *radius),
            CurveSource::Ellipse { a, b } => BoundaryCurve::ellipse(*a, *b),
            CurveSource::Eccentric { a, eccentricity } => BoundaryCurve::ellipse(*a, a * (1.0 - eccentricity * eccentricity).sqrt()),
            CurveSource::Annulus { r1, r2, .. } => BoundaryCurve::concentric(*r1, *r2),
            CurveSource::Loops { loops } => BoundaryCurve::new(loops.clone()),
            CurveSource::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))?;
                BoundaryCurve::from_json(&text)
            }
        };
        curve.map_err(|e| CliError::Spec(format!("curve: {e}")))
    }
}

/// `name=start:stop:n`, with `name` a dotted path into the case file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl std::str::FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let err = || CliError::Spec(format!("axis `{s}` is not of the form name=start:stop:n"));
        let (name, range) = s.split_once('=').ok_or_else(err)?;
        let parts: Vec<&str> = range.split(':').collect();
        if name.is_empty() || parts.len() != 3 {
            return Err(err());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| err())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| err())?;
        let n: usize = parts[2].trim().parse().map_err(|_| err())?;
        if !start.is_finite() || !stop.is_finite() || n == 0 {
            return Err(CliError::Spec(format!("axis `{s}` must be finite with n ≥ 1")));
        }
        Ok(Self { name: name.trim().to_string(), start, stop, n })
    }
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        (0..self.n).map(|i| self.start + (self.stop - self.start) * i as f64 / (self.n - 1) as f64).collect()
    }

    /// Sets the axis field of a template to `value`.
    pub fn apply(&self, template: &Value, value: f64) -> Result<Value, CliError> {
        let mut out = template.clone();
        let mut node = &mut out;
        let keys: Vec<&str> = self.name.split('.').collect();
        for (i, key) in keys.iter().enumerate() {
            let obj = node.as_object_mut().ok_or_else(|| CliError::Spec(format!("axis `{}`: `{key}` is not inside an object", self.name)))?;
            if i + 1 == keys.len() {
                if !obj.contains_key(*key) {
                    return Err(CliError::Spec(format!("axis `{}` names a field missing from the template", self.name)));
                }
                obj.insert(key.to_string(), Value::from(value));
                break;
            }
            node = obj.get_mut(*key).ok_or_else(|| CliError::Spec(format!("axis `{}`: no field `{key}`", self.name)))?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full_cases() {
        let s = CaseSpec::from_json(r#"{ "name": "h", "curve": { "kind": "circle", "radius": 1 } }"#).unwrap();
        assert_eq!(s.solver, SolverSpec::default());
        assert!(s.willmore);
        let s = CaseSpec::from_json(
            r#"{ "name": "e", "curve": { "kind": "ellipse", "a": 2, "b": 1 },
                 "schedule": { "kind": "geometric", "eps_max": 0.02, "ratio": 0.5, "n": 8 },
                 "variations": [ { "mode": 2, "second": true } ], "seed": 7 }"#,
        )
        .unwrap();
        assert_eq!(s.variations[0].label(), "cos 2s");
        assert_eq!(s.seed, 7);
    }

    #[test]
    fn rejects_bad_cases() {
        for text in [
            r#"{ "name": "x" }"#,
            r#"{ "name": "x", "curve": { "kind": "circle", "radius": -1 } }"#,
            r#"{ "name": "x", "curve": { "kind": "circle", "radius": 1 }, "colour": 3 }"#,
            r#"{ "name": "x", "curve": { "kind": "annulus", "r1": 1, "r2": 1.2 }, "variations": [ { "mode": 1 } ] }"#,
        ] {
            assert!(matches!(CaseSpec::from_json(text), Err(CliError::Spec(_))), "{text}");
        }
    }

    #[test]
    fn axes_parse_and_apply() {
        let a: Axis = "curve.r2=1.02:3.0:5".parse().unwrap();
        assert_eq!(a.values().len(), 5);
        assert_eq!(a.values()[4], 3.0);
        let t: Value = serde_json::json!({ "name": "a", "curve": { "kind": "annulus", "r1": 1.0, "r2": 1.5 } });
        let v = a.apply(&t, 2.0).unwrap();
        assert_eq!(v["curve"]["r2"], 2.0);
        assert!("curve.r3=1:2:3".parse::<Axis>().unwrap().apply(&t, 1.0).is_err());
        assert!("r2=1:2".parse::<Axis>().is_err());
        assert!("r2=1:x:2".parse::<Axis>().is_err());
    }
}
