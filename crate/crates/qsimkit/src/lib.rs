//! Exact statevector emulation of ancilla-based quantum simulation
//! algorithms, together with the Lie-algebraic classical machinery
//! (coherent-state expectations, Jacobi-type mean-field diagonalization,
//! generalized purities) used to cross-check them.
//!
//! Qubit indices are zero-based throughout the API. Qubit 0 is the most
//! significant bit of a basis label, so `|q0 q1 ... q(n-1)>` reads left to
//! right. Text formats (Pauli labels, circuits) use one-based labels.

pub mod entanglement;
pub mod error;
pub mod gcs;
pub mod liecore;
pub mod linalg;
pub mod meanfield;
pub mod models;
pub mod opalgebra;
pub mod qprotocol;
pub mod spectral;
pub mod statevector;

pub use error::{QsimError, Result};
pub use num_complex::Complex64 as C64;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
