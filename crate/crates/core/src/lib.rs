pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod regularization;
pub mod integrator;
pub mod diagnostics;
pub mod harness;
