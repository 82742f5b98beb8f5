use super::{BaselineConfig, BaselineOutput, StepRule};
use crate::error::{Error, Result};
use crate::matops::{extremal_eigpairs, ComplexMatrix, Which};
use crate::pauli::{adjoint_dense, measure_factor, MeasurementSet, SensingEnsemble};
use crate::projections::project_simplex_leq;
use crate::projfgd::{estimate_lipschitz, initialize_with, relative_change};
use crate::scalar::Real;
use crate::states::{DensityMatrix, Factor, StateView};
use crate::trace::{Reference, Stopwatch, TraceLog, TraceRecord};

fn residual_of<T: Real>(ens: &SensingEnsemble, meas: &MeasurementSet<T>, f: &ComplexMatrix<T>) -> Result<Vec<T>> {
    Ok(measure_factor(ens, f)?
        .into_iter()
        .zip(&meas.y)
        .map(|(p, y)| p - *y)
        .collect())
}

fn half_sq<T: Real>(r: &[T]) -> f64 {
    0.5 * r.iter().map(|v| v.as_f64().powi(2)).sum::<f64>()
}

/// Projected gradient on dense iterates: `ρ ← P_r(ρ − η∇f(ρ))`, where `P_r` keeps the
/// `r` algebraically largest eigenpairs and projects their values onto
/// `{w ≥ 0, Σw ≤ 1}`. The iterate is stored as `Φ·diag(√w)`.
pub fn run_rsvp<T: Real>(
    cfg: &BaselineConfig,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    truth: Option<&Reference<'_, T>>,
) -> Result<BaselineOutput<T>> {
    cfg.validate(ens.n_qubits())?;
    meas.check_against(ens)?;
    let d = ens.dim();
    let r = cfg.rank;
    if r > d {
        return Err(Error::RankTooLarge { rank: r, dim: d });
    }
    let scfg = cfg.solver_config();
    let clock = Stopwatch::started();
    let l_hat = estimate_lipschitz::<T>(ens, &scfg)?;
    let eta = match cfg.step {
        StepRule::Auto => l_hat.recip(),
        StepRule::Fixed(s) => T::lit(s),
    };
    let f0 = initialize_with(&scfg, ens, meas, l_hat)?;
    drive(cfg, ens, meas, f0.into_matrix(), eta, clock, truth)
}

/// RSVP from a given rank-`r` factor.
pub fn run_rsvp_from<T: Real>(
    cfg: &BaselineConfig,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    f0: Factor<T>,
    truth: Option<&Reference<'_, T>>,
) -> Result<BaselineOutput<T>> {
    cfg.validate(ens.n_qubits())?;
    meas.check_against(ens)?;
    if f0.dim() != ens.dim() || f0.rank() != cfg.rank {
        return Err(Error::DimensionMismatch(format!(
            "factor {}x{} for dimension {} and rank {}",
            f0.dim(),
            f0.rank(),
            ens.dim(),
            cfg.rank
        )));
    }
    let clock = Stopwatch::started();
    let eta = match cfg.step {
        StepRule::Auto => estimate_lipschitz::<T>(ens, &cfg.solver_config())?.recip(),
        StepRule::Fixed(s) => T::lit(s),
    };
    drive(cfg, ens, meas, f0.into_matrix(), eta, clock, truth)
}

fn drive<T: Real>(
    cfg: &BaselineConfig,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    mut f: ComplexMatrix<T>,
    eta: T,
    mut clock: Stopwatch,
    truth: Option<&Reference<'_, T>>,
) -> Result<BaselineOutput<T>> {
    let d = ens.dim();
    let r = cfg.rank;
    let mut residual = residual_of(ens, meas, &f)?;
    let limit = cfg.divergence_factor * half_sq(&residual).max(half_sq(&meas.y)).max(f64::MIN_POSITIVE);

    let mut trace = TraceLog::new();
    let mut log = |iter: usize, f: &ComplexMatrix<T>, residual: &[T], clock: &mut Stopwatch| -> Result<()> {
        let time_s = clock.seconds();
        clock.pause();
        let (err, dist) = match truth {
            Some(t) => t.score(StateView::Factor(f))?,
            None => (None, None),
        };
        trace.push(TraceRecord {
            iter,
            time_s,
            objective: half_sq(residual),
            rel_frob_error: err,
            dist,
            xi: 1.0,
            eta: eta.as_f64(),
        });
        clock.resume();
        Ok(())
    };
    log(0, &f, &residual, &mut clock)?;

    let tol = T::lit(cfg.tol);
    let mut basis: Option<ComplexMatrix<T>> = None;
    let mut iter = 0;
    let mut converged = false;
    let mut timed_out = false;
    while iter < cfg.max_iters {
        let mut g = f.matmul_adjoint(&f);
        g.axpy(-eta, &adjoint_dense(ens, &residual)?);
        let g = g.hermitian_part();
        let eig = extremal_eigpairs(&g, r, &cfg.spectral, Which::Algebraic, basis.as_ref())?;
        let w = project_simplex_leq(&eig.eigenvalues, T::one())?;
        let mut next = eig.eigenvectors.clone();
        for i in 0..d {
            for (z, wi) in next.row_mut(i).iter_mut().zip(&w) {
                *z = *z * wi.sqrt();
            }
        }
        if !next.is_finite() {
            return Err(Error::Diverged {
                iter: iter + 1,
                objective: f64::INFINITY,
            });
        }
        basis = Some(eig.eigenvectors);
        let change = relative_change(&f, &next)?;
        f = next;
        residual = residual_of(ens, meas, &f)?;
        iter += 1;
        let obj = half_sq(&residual);
        if !obj.is_finite() || obj > limit {
            return Err(Error::Diverged { iter, objective: obj });
        }
        converged = iter >= 2 && change <= tol;
        timed_out = !converged && cfg.out_of_time(clock.seconds());
        if converged || timed_out || iter == cfg.max_iters || iter % cfg.log_every == 0 {
            log(iter, &f, &residual, &mut clock)?;
        }
        if converged || timed_out {
            break;
        }
    }
    clock.pause();
    let seconds = trace.last().map(|r| r.time_s).unwrap_or_else(|| clock.seconds());
    let state = DensityMatrix::from_factor(&Factor::new(f)?);
    Ok(BaselineOutput {
        state,
        trace,
        iterations: iter,
        converged,
        seconds,
        duality_gaps: Vec::new(),
        timed_out,
        max_rank: r,
    })
}
