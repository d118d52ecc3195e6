//! Numerical laboratory for symmetric R-spaces: Lie-theoretic invariants,
//! adjoint-orbit complexifications, momentum images and capacity formulas.

pub mod atlas;
pub mod capacity;
pub mod cli_report;
pub mod finsler;
pub mod lie_core;
pub mod linalg;
pub mod orbit;
pub mod root_system;
