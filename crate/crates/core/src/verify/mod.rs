//! Numerical checks of the convergence theory: RIP probing, the initialization
//! radius, the per-step contraction, the ξ bound and two standalone inequalities.

mod checks;
mod rip;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Real;
use crate::states::{spectrum_stats_factor, Factor};

pub use checks::{
    check_init_radius, check_gram_bound, check_projection_obtuse, check_xi_bound, empirical_contraction, InitRadius,
};
pub use rip::{probe_rank, rip_probe};

/// `2(√2 − 1)`.
pub const GRAM_BOUND_CONST: f64 = 0.828_427_124_746_190_1;

/// Lower end of the ξ range guaranteed by the theory step.
pub const XI_LOWER: f64 = 128.0 / 129.0;

/// Constants of the convergence analysis, estimated from a RIP probe and the truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    /// RIP estimate at rank [`probe_rank`] standing in for `δ_4r`.
    pub delta_4r: f64,
    pub probe_rank: usize,
    /// Restricted strong convexity, `1 − δ`.
    pub mu: f64,
    /// Restricted smoothness, `1 + δ`.
    #[serde(rename = "L")]
    pub l: f64,
    /// `√((1 − δ)/(2(√2−1)))·τ(ρ⋆)·√srank(ρ⋆)`.
    pub gamma_prime: Option<f64>,
    /// `√((1 − µ/L)/(2(√2−1)))·τ(A⋆)²·√srank(ρ⋆)`.
    pub gamma_prime_alt: Option<f64>,
    /// `1 − (1−δ)σ_r(ρ⋆) / (550((1+δ)σ₁(ρ⋆) + ‖e‖₂))`.
    pub alpha: Option<f64>,
    pub noise_norm: f64,
    pub sigma1: Option<f64>,
    pub sigma_r: Option<f64>,
}

impl TheoryParams {
    pub fn from_delta(delta: f64, probe_rank: usize) -> Self {
        Self {
            delta_4r: delta,
            probe_rank,
            mu: 1.0 - delta,
            l: 1.0 + delta,
            gamma_prime: None,
            gamma_prime_alt: None,
            alpha: None,
            noise_norm: 0.0,
            sigma1: None,
            sigma_r: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..1.0).contains(&self.delta_4r)
    }

    /// Fills in the truth-dependent constants.
    pub fn with_truth<T: Real>(mut self, truth: &Factor<T>, noise_norm: f64) -> Result<Self> {
        let s = spectrum_stats_factor(truth, None)?;
        let delta = self.delta_4r;
        let root_srank = s.srank.sqrt();
        self.gamma_prime = Some(((1.0 - delta).max(0.0) / GRAM_BOUND_CONST).sqrt() * s.tau * root_srank);
        // τ(A⋆)² = σ₁(A⋆)²/σ_r(A⋆)² = τ(ρ⋆).
        self.gamma_prime_alt = Some(((1.0 - self.mu / self.l).max(0.0) / GRAM_BOUND_CONST).sqrt() * s.tau * root_srank);
        self.alpha = Some(1.0 - (1.0 - delta) * s.sigma_r / (550.0 * ((1.0 + delta) * s.sigma1 + noise_norm)));
        self.noise_norm = noise_norm;
        self.sigma1 = Some(s.sigma1);
        self.sigma_r = Some(s.sigma_r);
        Ok(self)
    }

    /// `(1/200)·(µ/L)·(σ_r/σ₁)`, the radius the contraction analysis needs.
    pub fn basin_gamma(&self) -> Option<f64> {
        Some(self.mu / self.l * self.sigma_r? / self.sigma1? / 200.0)
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Smallest slack seen; negative when violated.
    pub worst_margin: f64,
    /// The check's headline number, if it has one.
    pub estimate: Option<f64>,
    /// Whether violations are failures, or only reported.
    pub asserted: bool,
    pub details: String,
}

impl CheckReport {
    pub(crate) fn new(name: &str, asserted: bool) -> Self {
        Self {
            name: name.to_string(),
            trials: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            estimate: None,
            asserted,
            details: String::new(),
        }
    }

    pub(crate) fn record(&mut self, margin: f64, ok: bool) {
        self.trials += 1;
        if !ok {
            self.violations += 1;
        }
        self.worst_margin = self.worst_margin.min(margin);
    }

    pub fn passed(&self) -> bool {
        !self.asserted || self.violations == 0
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        let status = match (self.asserted, self.violations) {
            (false, _) => "REPORT",
            (true, 0) => "PASS",
            (true, _) => "FAIL",
        };
        let est = self.estimate.map(|e| format!(" estimate={e:.6e}")).unwrap_or_default();
        format!(
            "{status} {}: {}/{} violations, worst margin {:.3e}{est}{}{}",
            self.name,
            self.violations,
            self.trials,
            self.worst_margin,
            if self.details.is_empty() { "" } else { "; " },
            self.details
        )
    }
}
