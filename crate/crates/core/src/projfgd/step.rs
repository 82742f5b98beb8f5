use serde::{Deserialize, Serialize};

use super::{SolverConfig, StepKind};
use crate::error::{Error, Result};
use crate::matops::{hermitian_eigenvalues, top_singular_value, ComplexMatrix};
use crate::pauli::{measure_factor, AdjointOperator, MeasurementSet, SensingEnsemble};
use crate::scalar::Real;
use crate::states::Factor;

/// Used when the estimate degenerates (below `1e-8`).
pub const L_HAT_FALLBACK: f64 = 2.0;

/// `2‖∇f(0) − ∇f(J)‖_F / d = 2‖M†(M(J))‖_F / d` for the all-ones `J`.
///
/// `J = 𝟙𝟙ᵀ` is measured through its factor `𝟙`. Distinct Paulis are
/// trace-orthogonal, so `‖M†(c)‖_F = s·√d·‖c‖₂` with `s` the normalization.
pub fn lipschitz_raw<T: Real>(ens: &SensingEnsemble) -> Result<T> {
    let d = ens.dim();
    let ones = ComplexMatrix::<T>::from_fn(d, 1, |_, _| num_complex::Complex::new(T::one(), T::zero()));
    let mj = measure_factor(ens, &ones)?;
    let c_norm = mj.iter().map(|v| *v * *v).sum::<T>().sqrt();
    let dt = T::from_usize_lossy(d);
    let frob = T::lit(ens.normalization()) * dt.sqrt() * c_norm;
    Ok(T::lit(2.0) * frob / dt)
}

/// `L̂` with the override and the degenerate-case fallback applied.
pub fn estimate_lipschitz<T: Real>(ens: &SensingEnsemble, cfg: &SolverConfig) -> Result<T> {
    if let Some(l) = cfg.l_hat_override {
        return Ok(T::lit(l));
    }
    let l = lipschitz_raw::<T>(ens)?;
    if !(l >= T::lit(1e-8)) {
        return Ok(T::lit(L_HAT_FALLBACK));
    }
    Ok(l)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub l_hat: f64,
    /// `σ₁(ρ₀) = σ₁(A₀)²`.
    pub sigma1_rho0: f64,
    pub sigma1_grad0: f64,
    pub eta: f64,
}

impl StepDiagnostics {
    /// Step size from its ingredients.
    pub fn from_terms(kind: StepKind, l_hat: f64, sigma1_rho0: f64, sigma1_grad0: f64) -> Result<Self> {
        let denom = match kind {
            StepKind::Theory => 128.0 * (l_hat * sigma1_rho0 + sigma1_grad0),
            StepKind::Practical => 10.0 * l_hat * sigma1_rho0 + sigma1_grad0,
        };
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(Error::DegenerateStep);
        }
        Ok(Self {
            l_hat,
            sigma1_rho0,
            sigma1_grad0,
            eta: 1.0 / denom,
        })
    }
}

/// Constant step size from the initial point.
pub fn compute_step_size<T: Real>(
    cfg: &SolverConfig,
    a0: &Factor<T>,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    l_hat: T,
) -> Result<StepDiagnostics> {
    meas.check_against(ens)?;
    let a = a0.as_matrix();
    let gram = a.adjoint_matmul(a);
    let sigma1_rho0 = hermitian_eigenvalues(&gram)?
        .first()
        .map(|l| l.max(T::zero()))
        .unwrap_or_else(T::zero);
    let residual: Vec<T> = measure_factor(ens, a)?
        .iter()
        .zip(&meas.y)
        .map(|(p, y)| *p - *y)
        .collect();
    let sigma1_grad0 = if residual.iter().all(|v| *v == T::zero()) {
        T::zero()
    } else {
        let op = AdjointOperator::new(ens, &residual)?;
        top_singular_value(&op, &cfg.spectral)?
    };
    StepDiagnostics::from_terms(cfg.step_kind, l_hat.as_f64(), sigma1_rho0.as_f64(), sigma1_grad0.as_f64())
}
