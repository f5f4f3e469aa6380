//! Singular sets, Milnor sets, tameness and Euler characteristics of real
//! polynomial map germs `F: (R^M, 0) -> (R^N, 0)` and their composites
//! `H = G ∘ F`.
//!
//! Polynomials are exact (arbitrary-precision rationals). Set statements
//! near the origin are checked numerically on a ladder of shrinking spheres,
//! with every verdict carrying its sampling evidence.

pub mod composite;
pub mod config;
pub mod equivalence;
pub mod error;
pub mod minors;
pub mod poly;
pub mod report;
pub mod semialg;
pub mod tameness;
pub mod topology;

pub use error::{Error, Result};
