use thiserror::Error;

use renarea::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERIC: i32 = 1;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("spec error: {0}")]
    Spec(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: CoreError,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Pipeline stage a failure is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Solve,
    Forms,
    Renarea,
    Indicial,
    Collar,
    Variation,
    Willmore,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).map_err(|_| std::fmt::Error)?;
        write!(f, "{}", s.as_str().unwrap_or("stage"))
    }
}

/// Attaches a stage to a core result.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, CliError>;
}

impl<T> AtStage<T> for Result<T, CoreError> {
    fn at(self, stage: Stage) -> Result<T, CliError> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}

/// Whether a core error means an iteration failed to converge.
pub fn is_nonconvergence(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::NewtonStagnation { .. }
            | CoreError::ShootingResolution(_)
            | CoreError::NoAnnulus { .. }
            | CoreError::OutOfBasin(_)
            | CoreError::CollarTooTall(_)
            | CoreError::IllResolvedCollar(_)
    )
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) | CliError::Io(_) => EXIT_SPEC,
            CliError::Stage { source, .. } if is_nonconvergence(source) => EXIT_NONCONVERGENCE,
            CliError::Stage { .. } | CliError::Validation(_) => EXIT_NUMERIC,
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            CliError::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}
