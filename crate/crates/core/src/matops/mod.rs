//! Dense complex matrices and Hermitian spectral routines.

mod eig;
mod matrix;
mod spectral;

pub use eig::{hermitian_eig_dense, hermitian_eigenvalues, HermitianEig};
pub use matrix::{gram_difference_norm, gram_frobenius_distance, orthonormalize_columns, ComplexMatrix};
pub use spectral::{
    extremal_eigpairs, top_eigpairs, top_eigpairs_algebraic, top_singular_value, FnOperator,
    HermitianOperator, Shifted, SpectralConfig, Which,
};
