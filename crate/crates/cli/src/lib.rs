//! Batch driver: single cases, parameter sweeps and the validation suite,
//! each producing a JSON/CSV bundle with sha256 provenance.

pub mod bundle;
pub mod error;
pub mod pipeline;
pub mod spec;
pub mod suite;
pub mod sweep;

pub use bundle::Bundle;
pub use error::{CliError, Stage, EXIT_NONCONVERGENCE, EXIT_NUMERIC, EXIT_OK, EXIT_SPEC};
pub use pipeline::{run_case, CaseReport, CaseRun};
pub use spec::{Axis, CaseSpec};
pub use suite::{run_validation_suite, Profile, SuiteOptions, SuiteRun, Summary};
pub use sweep::{run_sweep, SweepRun};

use std::path::{Path, PathBuf};

/// Environment variable that replaces the output root.
pub const OUT_ENV: &str = "RENAREA_OUT";

/// Output directory for `dir`: relative paths resolve against `root`
/// (the `RENAREA_OUT` value, or the working directory when unset).
pub fn output_dir(root: Option<&Path>, dir: &Path) -> PathBuf {
    match root {
        Some(r) if dir.is_relative() => r.join(dir),
        _ => dir.to_path_buf(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_root_applies_to_relative_paths() {
        let root = Path::new("/tmp/root");
        assert_eq!(output_dir(Some(root), Path::new("a/b")), PathBuf::from("/tmp/root/a/b"));
        assert_eq!(output_dir(Some(root), Path::new("/abs")), PathBuf::from("/abs"));
        assert_eq!(output_dir(None, Path::new("a")), PathBuf::from("a"));
    }
}
