//! Low-rank quantum state tomography from random Pauli expectation values.
//!
//! The solver works on a factor `A` of the density matrix `ρ = AA†` and only
//! touches the Pauli sensing map through matrix-free products.

pub mod baselines;
pub mod error;
pub mod matops;
pub mod pauli;
pub mod projections;
pub mod projfgd;
pub mod scalar;
pub mod states;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

/// Double-precision aliases.
pub type Matrix = matops::ComplexMatrix<f64>;
/// Single-precision aliases.
pub type Matrix32 = matops::ComplexMatrix<f32>;
