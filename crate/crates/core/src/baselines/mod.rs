//! Reference reimplementations of two comparison solvers on the same sensing interfaces:
//! a rank-truncated projected gradient method (RSVP) and Frank–Wolfe over the spectrahedron
//! (SparseApproxSDP). Neither original publishes pseudocode; use for relative comparisons.

mod fw;
mod rsvp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::SpectralConfig;
use crate::projfgd::{InitKind, SolverConfig};
use crate::scalar::Real;
use crate::states::DensityMatrix;
use crate::trace::TraceLog;

pub use fw::run_sparse_approx_sdp;
pub use rsvp::{run_rsvp, run_rsvp_from};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `1/L̂` from the same estimate ProjFGD uses.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub rank: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub step: StepRule,
    /// Starting point of RSVP, shared with ProjFGD for like-for-like comparisons.
    pub init_kind: InitKind,
    pub seed: u64,
    pub log_every: usize,
    pub spectral: SpectralConfig,
    pub dense_cap: u32,
    pub divergence_factor: f64,
    /// Wall-clock budget; the run stops unconverged once solver time exceeds it.
    pub max_seconds: Option<f64>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            rank: 1,
            max_iters: 10_000,
            tol: 5e-6,
            step: StepRule::Auto,
            init_kind: InitKind::ProjectedGradientAtZero,
            seed: 0,
            log_every: 1,
            spectral: SpectralConfig::default(),
            dense_cap: 10,
            divergence_factor: 1e6,
            max_seconds: None,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self, n_qubits: u32) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.log_every == 0 {
            return Err(Error::InvalidArgument("log_every must be at least 1".into()));
        }
        if let StepRule::Fixed(s) = self.step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidArgument(format!("step must be positive, got {s}")));
            }
        }
        if let Some(t) = self.max_seconds {
            if !(t > 0.0) {
                return Err(Error::InvalidArgument(format!("max_seconds must be positive, got {t}")));
            }
        }
        if n_qubits > self.dense_cap {
            return Err(Error::AboveDenseCap {
                n: n_qubits,
                cap: self.dense_cap,
            });
        }
        self.spectral.validate()
    }

    /// The matching ProjFGD settings, used for `L̂` and the shared starting point.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            rank: self.rank,
            max_iters: self.max_iters,
            tol: self.tol,
            init_kind: self.init_kind,
            seed: self.seed,
            log_every: self.log_every,
            spectral: self.spectral.clone(),
            dense_cap: self.dense_cap,
            divergence_factor: self.divergence_factor,
            ..SolverConfig::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct BaselineOutput<T: Real> {
    pub state: DensityMatrix<T>,
    pub trace: TraceLog,
    pub iterations: usize,
    pub converged: bool,
    pub seconds: f64,
    /// Frank–Wolfe gaps `⟨∇f(ρ_t), ρ_t − v_tv_t†⟩`, one per iteration; empty for RSVP.
    pub duality_gaps: Vec<f64>,
    /// Largest rank reached by the iterate.
    pub max_rank: usize,
    /// Whether the run was cut short by `max_seconds`.
    pub timed_out: bool,
}

impl BaselineConfig {
    pub(crate) fn out_of_time(&self, seconds: f64) -> bool {
        self.max_seconds.is_some_and(|t| seconds > t)
    }
}
