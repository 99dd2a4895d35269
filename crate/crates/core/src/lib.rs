//! Strongly Rayleigh measures and the Kadison–Singer machinery built on them:
//! mixed characteristic polynomials, interlacing descent, barrier functions,
//! maximum-entropy determinantal measures and thin spanning trees.
//!
//! Everything polynomial is exact rational arithmetic; spectral and convex
//! computations use `f64` with explicit tolerances.

pub mod barrier;
pub mod charpoly;
pub mod error;
pub mod graphlab;
pub mod instances;
pub mod maxent;
pub mod measures;
pub mod rational;
pub mod stablepoly;

pub use error::{Error, Result};
pub use rational::Rational;
