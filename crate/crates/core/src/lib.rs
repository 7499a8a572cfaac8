//! Entanglement witnesses in the canonical forms `W = c·I − σ` and `W = σ − c·I`.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense, dimension-tagged complex matrices with a cyclic Jacobi
//!   Hermitian eigensolver, Kronecker products, partial traces and partial transposes.
//! - [`qstate`]: validated density matrices and pure states, purification and
//!   partial purification.
//! - [`witness`]: witness construction, c-interval checks and the see-saw optimizer
//!   over product states.
//! - [`extend`]: bipartite to n-partite extension by purification, partial
//!   purification and tensoring, all of which leave `c` untouched.
//! - [`oracle`]: brute-force grid search over product states used to cross-check
//!   the optimizer on small systems.
//! - [`io`]: the canonical JSON matrix interchange format.
//!
//! Party indices are 1-based everywhere in the public API.

pub mod error;
pub mod extend;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod qstate;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, SpectralDecomposition};
pub use num_complex::Complex64;
pub use qstate::{DensityMatrix, PureState, PurificationSelection};
pub use witness::{OptResult, ProductState, Witness, WitnessForm, WitnessReport};

/// Hermiticity tolerance, absolute and entrywise.
pub const TOL_HERM: f64 = 1e-10;
/// Eigenvalues at or below this are treated as zero (rank, PSD checks).
pub const TOL_EIG: f64 = 1e-10;
/// Widening applied to the optimized side of every c-interval.
pub const TOL_INTERVAL: f64 = 1e-8;
/// A witness may dip this far below zero on product states.
pub const TOL_POS: f64 = 1e-8;
/// A witness needs an eigenvalue below `-TOL_NEG`.
pub const TOL_NEG: f64 = 1e-10;
