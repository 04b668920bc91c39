use thiserror::Error;

/// Errors raised by the numerical pipeline. Values are carried as `f64`
/// regardless of the working precision so the type stays non-generic.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("curve is not regular: |γ'| = {speed:e} at loop {loop_index}, t = {t}")]
    Regularity { loop_index: usize, t: f64, speed: f64 },

    #[error("curve loop {loop_index} is not a closed curve: {reason}")]
    NotClosed { loop_index: usize, reason: String },

    #[error("curve is not embedded: {0}")]
    Embedding(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("osculating search under-resolved: best penetration {penetration:e} at t = {t}")]
    Resolution { t: f64, penetration: f64 },

    #[error("expansion order {requested} exceeds series depth {depth}")]
    SeriesDepth { requested: usize, depth: usize },

    #[error("collar is ill-resolved for u3 extraction: {0}")]
    IllResolvedCollar(String),

    #[error("degenerate parametrization: {0}")]
    DegenerateParametrization(String),

    #[error("Newton iteration stagnated after {iterations} steps at residual {residual:e}")]
    NewtonStagnation { iterations: usize, residual: f64 },

    #[error("collar too tall: {0}")]
    CollarTooTall(String),

    #[error("no annulus connects radii ratio {ratio}: maximal reachable ratio {max_ratio}")]
    NoAnnulus { ratio: f64, max_ratio: f64 },

    #[error("shooting could not resolve annulus branch: {0}")]
    ShootingResolution(String),

    #[error("curve outside the normal-graph basin: {0}")]
    OutOfBasin(String),

    #[error("epsilon {eps:e} below resolved height {min:e}")]
    EpsilonBelowResolution { eps: f64, min: f64 },

    #[error("ill-conditioned fit: condition estimate {0:e}")]
    IllConditionedFit(f64),

    #[error("surface does not meet the boundary orthogonally: {0}")]
    NonOrthogonal(String),

    #[error("degenerate surface: smallest singular value {sigma:e}")]
    DegenerateSurface { sigma: f64 },

    #[error("indicial roots not separable: {0}")]
    IndicialSeparation(String),

    #[error("variation requires u3 data")]
    MissingU3,

    #[error("variation support touches the boundary collar (x = {0:e})")]
    SupportTouchesBoundary(f64),

    #[error("operation requires a minimal surface: {0}")]
    NonMinimal(String),

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("boundary mismatch between compared surfaces")]
    BoundaryMismatch,

    #[error("sample grids do not match: {0}")]
    GridMismatch(String),

    #[error("singular linear system")]
    Singular,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
