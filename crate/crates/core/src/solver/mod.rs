//! Minimal surface solvers.

pub mod collar;
pub mod hemisphere;
pub mod operator;
pub mod rotational;
