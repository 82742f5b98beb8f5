use super::{BaselineConfig, BaselineOutput};
use crate::error::{Error, Result};
use crate::matops::{extremal_eigpairs, ComplexMatrix, Which};
use crate::pauli::{adjoint_dense, measure_factor, MeasurementSet, SensingEnsemble};
use crate::scalar::Real;
use crate::states::DensityMatrix;
use crate::trace::{Reference, Stopwatch, TraceLog, TraceRecord};

/// Unit eigenvector of the largest eigenvalue of `M†(c)`.
///
/// `M†(c)` is assembled once: the eigensolver applies it many times, and a dense
/// product is cheaper than the matrix-free one once `m` is comparable to `d`.
fn top_vector<T: Real>(
    ens: &SensingEnsemble,
    c: &[T],
    cfg: &BaselineConfig,
    start: Option<&ComplexMatrix<T>>,
) -> Result<ComplexMatrix<T>> {
    let h = adjoint_dense(ens, c)?;
    let eig = extremal_eigpairs(&h, 1, &cfg.spectral, Which::Algebraic, start)?;
    Ok(eig.eigenvectors)
}

/// Frank–Wolfe over `{ρ ⪰ 0, tr ρ = 1}` with steps `γ_t = 2/(t+2)`.
///
/// Each step adds one rank-one atom `vv†`, `v` the top eigenvector of `−∇f(ρ_t)`.
/// `ρ_0` is the first atom, taken at `ρ = 0`. The error against `truth` is tracked
/// from running inner products, without forming `ρ − ρ⋆`.
pub fn run_sparse_approx_sdp<T: Real>(
    cfg: &BaselineConfig,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    truth: Option<&Reference<'_, T>>,
) -> Result<BaselineOutput<T>> {
    cfg.validate(ens.n_qubits())?;
    meas.check_against(ens)?;
    let d = ens.dim();
    let mut clock = Stopwatch::started();

    let mut v = top_vector(ens, &meas.y, cfg, None)?;
    let mut rho = v.matmul_adjoint(&v);
    let mut mrho = measure_factor(ens, &v)?;
    // ‖ρ‖_F² and ⟨ρ, ρ⋆⟩.
    let mut rho_sq = 1.0f64;
    let (truth_sq, mut cross) = match truth {
        Some(t) => (t.target_norm_sq().as_f64(), t.quad_form(&v).as_f64()),
        None => (0.0, 0.0),
    };
    let residual_of = |mrho: &[T]| -> Vec<T> { mrho.iter().zip(&meas.y).map(|(p, y)| *p - *y).collect() };
    let half_sq = |r: &[T]| 0.5 * r.iter().map(|x| x.as_f64().powi(2)).sum::<f64>();
    let mut residual = residual_of(&mrho);

    let mut trace = TraceLog::new();
    let mut log = |iter: usize, residual: &[T], rho_sq: f64, cross: f64, gamma: f64, clock: &mut Stopwatch| {
        let time_s = clock.seconds();
        clock.pause();
        let err = truth.map(|_| (rho_sq - 2.0 * cross + truth_sq).max(0.0).sqrt() / truth_sq.sqrt());
        trace.push(TraceRecord {
            iter,
            time_s,
            objective: half_sq(residual),
            rel_frob_error: err,
            dist: None,
            xi: 1.0,
            eta: gamma,
        });
        clock.resume();
    };
    log(0, &residual, rho_sq, cross, 1.0, &mut clock);

    let mut gaps = Vec::new();
    let mut iter = 0;
    let mut converged = false;
    let mut timed_out = false;
    while iter < cfg.max_iters {
        let neg: Vec<T> = residual.iter().map(|x| -*x).collect();
        v = top_vector(ens, &neg, cfg, Some(&v))?;
        let mv = measure_factor(ens, &v)?;
        let gap: f64 = residual
            .iter()
            .zip(mrho.iter().zip(&mv))
            .map(|(c, (a, b))| (*c * (*a - *b)).as_f64())
            .sum();
        gaps.push(gap);

        let gamma = 2.0 / (iter as f64 + 2.0);
        let vrv = v.adjoint_matmul(&rho.matmul(&v)).trace().re.as_f64();
        let step_sq = (1.0 - 2.0 * vrv + rho_sq).max(0.0);
        rho.scale_mut(T::lit(1.0 - gamma));
        rho.axpy(T::lit(gamma), &v.matmul_adjoint(&v));
        if !rho.is_finite() {
            return Err(Error::Diverged {
                iter: iter + 1,
                objective: f64::INFINITY,
            });
        }
        for (p, q) in mrho.iter_mut().zip(&mv) {
            *p = T::lit(1.0 - gamma) * *p + T::lit(gamma) * *q;
        }
        residual = residual_of(&mrho);
        rho_sq = (1.0 - gamma).powi(2) * rho_sq + 2.0 * gamma * (1.0 - gamma) * vrv + gamma * gamma;
        if let Some(t) = truth {
            cross = (1.0 - gamma) * cross + gamma * t.quad_form(&v).as_f64();
        }
        let change = gamma * step_sq.sqrt() / rho_sq.sqrt();
        iter += 1;

        converged = iter >= 2 && change <= cfg.tol;
        timed_out = !converged && cfg.out_of_time(clock.seconds());
        if converged || timed_out || iter == cfg.max_iters || iter % cfg.log_every == 0 {
            log(iter, &residual, rho_sq, cross, gamma, &mut clock);
        }
        if converged || timed_out {
            break;
        }
    }
    clock.pause();
    let seconds = trace.last().map(|r| r.time_s).unwrap_or_else(|| clock.seconds());
    Ok(BaselineOutput {
        state: DensityMatrix::new(rho)?,
        trace,
        iterations: iter,
        converged,
        seconds,
        duality_gaps: gaps,
        timed_out,
        max_rank: (iter + 1).min(d),
    })
}
