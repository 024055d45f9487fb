//! Dependent randomized rounding in matroid polytopes.
//!
//! The crate provides matroid oracles, polytope membership and convex
//! decomposition, swap and pipage rounding, a small simplex-based LP core,
//! the application solvers built on top of them, and a Monte Carlo harness
//! that checks the rounding guarantees empirically.

#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod instance;
pub mod lp;
pub mod matroid;
pub mod polytope;
pub mod rng;
pub mod rounding;
pub mod set;
pub mod solvers;
pub mod stats;
pub mod submodular;

pub use error::{Error, Result};
pub use matroid::{Matroid, MatroidSpec};
pub use set::ElementSet;
