//! Numerical kernels for the string equation of even Hermitian one-matrix
//! models: the discrete lattice solver, Volterra flows, a moment/Hankel
//! oracle and the continuum phase analysis.

pub mod banded;
pub mod continuum;
pub mod coupling;
pub mod error;
pub mod flow;
pub mod lattice;
pub mod oracle;
pub mod shock;

pub use coupling::{CouplingKey, CouplingVector};
pub use error::{Error, Result};
