//! Pauli sensing map: ensembles, matrix-free measurement and adjoint products, noisy data.

mod ensemble;
mod measurements;
mod string;

pub use ensemble::{
    adjoint_dense, adjoint_times_factor, adjoint_times_factor_direct, measure_dense, measure_factor,
    measure_factor_direct, normalization_for, sample_ensemble, AdjointOperator, SensingEnsemble,
};
pub use measurements::{
    generate_measurements, noise_vector, read_dataset, write_dataset, DenseRef, FactorRef, Measurable,
    MeasurementSet, NoiseKind,
};
pub use string::{
    apply_pauli, apply_pauli_block, dense_pauli, dense_pauli_capped, PauliString, DEFAULT_DENSE_CAP, MAX_QUBITS,
};
