//! Elliptic Calogero–Sutherland eigenproblem: elliptic functions, the
//! lattice formulation, Lagrange reversion, eigenvalue solvers, a dense
//! truncated-matrix oracle and eigenfunction reconstruction.

pub mod cli;
pub mod eigenfunction;
pub mod elliptic;
pub mod error;
pub mod lagrange;
pub mod lattice;
pub mod numeric;
pub mod oracle;
pub mod solver;
pub mod suite;

pub use error::{EcsError, Result};
pub use lattice::{CoefficientMap, HypothesisConstants, LatticeVector, ModelParams};
pub use solver::{SpectralResult, TruncationPolicy};
