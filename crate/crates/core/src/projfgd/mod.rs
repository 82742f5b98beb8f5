//! Projected factored gradient descent on `ρ = AA†` with `‖A‖_F ≤ 1`.

mod init;
mod solver;
mod step;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::SpectralConfig;

pub use init::{initialize, initialize_with, random_factor};
pub use solver::{gradient_step_direction, relative_change, run, run_from, IterateState, RunSummary, SolverOutput};
pub use step::{compute_step_size, estimate_lipschitz, lipschitz_raw, StepDiagnostics, L_HAT_FALLBACK};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// Gaussian factor scaled to unit Frobenius norm.
    Random,
    /// `Π_C′((1/L̂)·M†(y))`, top-r factor, then the ball projection.
    ProjectedGradientAtZero,
    /// As above with only the PSD projection before truncation.
    PsdTruncation,
}

impl InitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitKind::Random => "random",
            InitKind::ProjectedGradientAtZero => "projected_gradient_at_zero",
            InitKind::PsdTruncation => "psd_truncation",
        }
    }
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "random" => Ok(InitKind::Random),
            "projected_gradient_at_zero" | "spectral" => Ok(InitKind::ProjectedGradientAtZero),
            "psd_truncation" => Ok(InitKind::PsdTruncation),
            _ => Err(Error::InvalidArgument(format!("unknown init kind {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// `η = 1/(128·(L̂σ₁(ρ₀) + σ₁(∇f(ρ₀))))`.
    Theory,
    /// `η = 1/(10·L̂σ₁(ρ₀) + σ₁(∇f(ρ₀)))`.
    Practical,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Theory => "theory",
            StepKind::Practical => "practical",
        }
    }
}

impl FromStr for StepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theory" => Ok(StepKind::Theory),
            "practical" => Ok(StepKind::Practical),
            _ => Err(Error::InvalidArgument(format!("unknown step kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub rank: usize,
    pub max_iters: usize,
    /// Stop once `‖ρ_{t+1} − ρ_t‖_F / ‖ρ_{t+1}‖_F ≤ tol`.
    pub tol: f64,
    pub init_kind: InitKind,
    pub step_kind: StepKind,
    pub l_hat_override: Option<f64>,
    pub seed: u64,
    /// Log every k-th iteration; iteration 0 and the last one are always logged.
    pub log_every: usize,
    pub spectral: SpectralConfig,
    /// Largest qubit count for which dense `d × d` eigendecompositions are used.
    pub dense_cap: u32,
    /// Abort once the objective exceeds this multiple of its reference value.
    pub divergence_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rank: 1,
            max_iters: 10_000,
            tol: 5e-6,
            init_kind: InitKind::ProjectedGradientAtZero,
            step_kind: StepKind::Practical,
            l_hat_override: None,
            seed: 0,
            log_every: 1,
            spectral: SpectralConfig::default(),
            dense_cap: 10,
            divergence_factor: 1e6,
        }
    }
}

impl SolverConfig {
    pub fn with_rank(rank: usize) -> Self {
        Self {
            rank,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidArgument("rank must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.log_every == 0 {
            return Err(Error::InvalidArgument("log_every must be at least 1".into()));
        }
        if let Some(l) = self.l_hat_override {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidArgument(format!("L_hat override must be positive, got {l}")));
            }
        }
        if !(self.divergence_factor > 1.0) {
            return Err(Error::InvalidArgument("divergence_factor must exceed 1".into()));
        }
        self.spectral.validate()
    }
}
