use serde::{Deserialize, Serialize};

use super::{compute_step_size, estimate_lipschitz, initialize_with, SolverConfig, StepDiagnostics};
use crate::error::{Error, Result};
use crate::matops::{gram_difference_norm, ComplexMatrix};
use crate::pauli::{adjoint_times_factor, measure_factor, MeasurementSet, SensingEnsemble};
use crate::projections::project_frobenius_ball_mut;
use crate::scalar::Real;
use crate::states::{procrustes_rotation, Factor, StateView};
use crate::trace::{Reference, Stopwatch, TraceLog, TraceRecord};

/// `‖A_newA_new† − A_oldA_old†‖_F / ‖A_newA_new†‖_F`, in `O(d·r²)`.
///
/// `old` is first rotated onto `new`, which leaves both states unchanged but keeps
/// the factor difference as small as the state difference.
pub fn relative_change<T: Real>(old: &ComplexMatrix<T>, new: &ComplexMatrix<T>) -> Result<T> {
    let num = match procrustes_rotation(new, old)? {
        Some(w) => gram_difference_norm(new, &old.matmul(&w))?,
        None => gram_difference_norm(new, old)?,
    };
    let den = new.adjoint_matmul(new).frobenius_norm();
    if den == T::zero() {
        return Ok(if num == T::zero() { T::zero() } else { T::infinity() });
    }
    Ok(num / den)
}

/// The current factor with its cached residual `M(AA†) − y`.
#[derive(Clone, Debug)]
pub struct IterateState<T: Real> {
    pub a: Factor<T>,
    pub iter: usize,
    pub eta: T,
    pub xi_last: T,
    pub residual: Vec<T>,
}

impl<T: Real> IterateState<T> {
    pub fn new(a: Factor<T>, ens: &SensingEnsemble, meas: &MeasurementSet<T>, eta: T) -> Result<Self> {
        meas.check_against(ens)?;
        let residual = residual_of(ens, meas, a.as_matrix())?;
        Ok(Self {
            a,
            iter: 0,
            eta,
            xi_last: T::one(),
            residual,
        })
    }

    /// `½‖y − M(AA†)‖₂²`.
    pub fn objective(&self) -> T {
        T::lit(0.5) * self.residual.iter().map(|v| *v * *v).sum::<T>()
    }

    /// One step `A ← Π_C(A − η∇f(AA†)A)`; returns the relative change of `ρ`.
    pub fn advance(&mut self, ens: &SensingEnsemble, meas: &MeasurementSet<T>) -> Result<T> {
        let g = gradient_step_direction(self, meas, ens)?;
        let mut next = self.a.as_matrix().clone();
        next.axpy(-self.eta, &g);
        let xi = project_frobenius_ball_mut(&mut next);
        if !next.is_finite() {
            return Err(Error::Diverged {
                iter: self.iter + 1,
                objective: f64::INFINITY,
            });
        }
        let change = relative_change(self.a.as_matrix(), &next)?;
        self.residual = residual_of(ens, meas, &next)?;
        self.a = Factor::new(next)?;
        self.xi_last = xi;
        self.iter += 1;
        Ok(change)
    }
}

fn residual_of<T: Real>(ens: &SensingEnsemble, meas: &MeasurementSet<T>, a: &ComplexMatrix<T>) -> Result<Vec<T>> {
    Ok(measure_factor(ens, a)?
        .into_iter()
        .zip(&meas.y)
        .map(|(p, y)| p - *y)
        .collect())
}

/// `∇f(AA†)·A = M†(M(AA†) − y)·A` from the cached residual.
pub fn gradient_step_direction<T: Real>(
    state: &IterateState<T>,
    meas: &MeasurementSet<T>,
    ens: &SensingEnsemble,
) -> Result<ComplexMatrix<T>> {
    meas.check_against(ens)?;
    adjoint_times_factor(ens, &state.residual, state.a.as_matrix())
}

#[derive(Clone, Debug)]
pub struct SolverOutput<T: Real> {
    pub factor: Factor<T>,
    pub trace: TraceLog,
    /// Number of gradient steps taken.
    pub iterations: usize,
    /// Whether the stopping rule fired before `max_iters`.
    pub converged: bool,
    pub step: StepDiagnostics,
    pub seconds: f64,
    pub objective: f64,
}

/// Summary of a finished run, for result files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub iterations: usize,
    pub converged: bool,
    pub seconds: f64,
    pub objective: f64,
    pub step: StepDiagnostics,
}

impl<T: Real> SolverOutput<T> {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            iterations: self.iterations,
            converged: self.converged,
            seconds: self.seconds,
            objective: self.objective,
            step: self.step.clone(),
        }
    }
}

/// Full solve: `L̂`, initialization, step size, iterations. Timing includes initialization.
pub fn run<T: Real>(
    cfg: &SolverConfig,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    truth: Option<&Reference<'_, T>>,
) -> Result<SolverOutput<T>> {
    cfg.validate()?;
    meas.check_against(ens)?;
    let clock = Stopwatch::started();
    let l_hat = estimate_lipschitz::<T>(ens, cfg)?;
    let a0 = initialize_with(cfg, ens, meas, l_hat)?;
    drive(cfg, ens, meas, a0, l_hat, clock, truth)
}

/// Solve from a given starting factor, projected onto the ball first.
pub fn run_from<T: Real>(
    cfg: &SolverConfig,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    a0: Factor<T>,
    truth: Option<&Reference<'_, T>>,
) -> Result<SolverOutput<T>> {
    cfg.validate()?;
    meas.check_against(ens)?;
    if a0.dim() != ens.dim() {
        return Err(Error::DimensionMismatch(format!(
            "factor with {} rows for dimension {}",
            a0.dim(),
            ens.dim()
        )));
    }
    let clock = Stopwatch::started();
    let mut a = a0.into_matrix();
    project_frobenius_ball_mut(&mut a);
    let l_hat = estimate_lipschitz::<T>(ens, cfg)?;
    drive(cfg, ens, meas, Factor::new(a)?, l_hat, clock, truth)
}

fn drive<T: Real>(
    cfg: &SolverConfig,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    a0: Factor<T>,
    l_hat: T,
    mut clock: Stopwatch,
    truth: Option<&Reference<'_, T>>,
) -> Result<SolverOutput<T>> {
    let step = compute_step_size(cfg, &a0, ens, meas, l_hat)?;
    let mut state = IterateState::new(a0, ens, meas, T::lit(step.eta))?;
    let y_obj = 0.5 * meas.y.iter().map(|v| v.as_f64().powi(2)).sum::<f64>();
    let obj0 = state.objective().as_f64();
    let limit = cfg.divergence_factor * obj0.max(y_obj).max(f64::MIN_POSITIVE);

    let mut trace = TraceLog::new();
    let mut log = |state: &IterateState<T>, clock: &mut Stopwatch| -> Result<()> {
        let time_s = clock.seconds();
        clock.pause();
        let (err, dist) = match truth {
            Some(t) => t.score(StateView::Factor(state.a.as_matrix()))?,
            None => (None, None),
        };
        trace.push(TraceRecord {
            iter: state.iter,
            time_s,
            objective: state.objective().as_f64(),
            rel_frob_error: err,
            dist,
            xi: state.xi_last.as_f64(),
            eta: step.eta,
        });
        clock.resume();
        Ok(())
    };
    log(&state, &mut clock)?;

    let tol = T::lit(cfg.tol);
    let mut converged = false;
    while state.iter < cfg.max_iters {
        let change = state.advance(ens, meas)?;
        let obj = state.objective().as_f64();
        if !obj.is_finite() || obj > limit {
            return Err(Error::Diverged {
                iter: state.iter,
                objective: obj,
            });
        }
        // The first step is not tested, as in the reference pseudocode.
        converged = state.iter >= 2 && change <= tol;
        if converged || state.iter == cfg.max_iters || state.iter % cfg.log_every == 0 {
            log(&state, &mut clock)?;
        }
        if converged {
            break;
        }
    }
    clock.pause();
    let seconds = trace.last().map(|r| r.time_s).unwrap_or_else(|| clock.seconds());
    let objective = state.objective().as_f64();
    Ok(SolverOutput {
        factor: state.a,
        trace,
        iterations: state.iter,
        converged,
        step,
        seconds,
        objective,
    })
}
