//! Minimal surfaces in hyperbolic 3-space with prescribed asymptotic
//! boundary curves, and their renormalized area.
//!
//! The ambient space is the upper half-space model of ℍ³ with coordinates
//! `(y₁, y₂, x)`, metric `g = (dx² + dy₁² + dy₂²)/x²` and compactified
//! Euclidean metric `ḡ = x² g`.

pub mod curves;
pub mod error;
pub mod expansion;
pub mod geometry;
pub mod linalg;
pub mod renarea;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod surface;
pub mod variation;
pub mod willmore;

pub use error::{Error, Result};
pub use scalar::{Dual, Real, Ring};

pub type Curve = curves::BoundaryCurve<f64>;
pub type CurveLoop = curves::Loop<f64>;
pub type PolarGraph = solver::hemisphere::HemisphereGraph<f64>;
pub type Rotational = solver::rotational::RotationalProfile<f64>;
pub type Collar = solver::collar::CollarSolution<f64>;
pub type U3 = solver::collar::U3Profile<f64>;
pub type Report = renarea::RenAreaReport<f64>;
pub type Doubled = willmore::DoubledSurface<f64>;
