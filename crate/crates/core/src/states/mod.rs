//! Ground-truth states, factored iterates and reconstruction metrics.

mod generate;
mod metrics;
mod types;

pub use generate::{random_state, GroundTruth, StateKind, StateSpec};
pub use metrics::{
    best_rank_r, dist_procrustes, dist_procrustes_closed_form, dist_procrustes_matrices, frobenius_rel_error,
    infidelity, infidelity_full, infidelity_with_factor, procrustes_rotation, spectrum_stats, spectrum_stats_factor,
    SpectrumStats, StateView,
};
pub use types::{read_factor, write_factor, DensityMatrix, Factor, STATE_TOL};
