use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CheckReport, TheoryParams, GRAM_BOUND_CONST, XI_LOWER};
use crate::error::{Error, Result};
use crate::matops::{gram_difference_norm, hermitian_eigenvalues, orthonormalize_columns, ComplexMatrix};
use crate::pauli::{MeasurementSet, NoiseKind, SensingEnsemble};
use crate::projections::{project_frobenius_ball_mut, project_trace_psd};
use crate::projfgd::{initialize, SolverConfig, StepKind};
use crate::scalar::Real;
use crate::states::{dist_procrustes_matrices, procrustes_rotation, Factor};
use crate::trace::TraceLog;

const SLACK: f64 = 1e-10;

fn sigma_r_sq(a: &ComplexMatrix<f64>) -> Result<f64> {
    let ev = hermitian_eigenvalues(&a.adjoint_matmul(a))?;
    Ok(ev.last().copied().unwrap_or(0.0).max(0.0))
}

/// `‖AA† − BB†‖_F² ≥ 2(√2−1)·σ_r(A)²·DIST(A, B)²` on random pairs.
///
/// Half the pairs are independent; the other half put `B` near a rotation of `A`,
/// where the two sides are closest.
pub fn check_gram_bound(trials: usize, d: usize, r: usize, seed: u64) -> Result<CheckReport> {
    if r == 0 || r > d {
        return Err(Error::RankTooLarge { rank: r, dim: d });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("gram_bound", true);
    for t in 0..trials {
        let mut a = ComplexMatrix::<f64>::random_gaussian(d, r, &mut rng);
        let an = a.frobenius_norm();
        a.scale_mut(1.0 / an);
        let b = if t % 2 == 0 {
            let mut b = ComplexMatrix::<f64>::random_gaussian(d, r, &mut rng);
            let scale = rng.random_range(0.0..2.0) / b.frobenius_norm();
            b.scale_mut(scale);
            b
        } else {
            let mut u = ComplexMatrix::<f64>::random_gaussian(r, r, &mut rng);
            orthonormalize_columns(&mut u);
            let mut e = ComplexMatrix::<f64>::random_gaussian(d, r, &mut rng);
            let eps = 10f64.powf(rng.random_range(-6.0..0.0));
            e.scale_mut(eps / e.frobenius_norm());
            a.matmul(&u).add(&e)
        };
        let lhs = match procrustes_rotation(&a, &b)? {
            Some(w) => gram_difference_norm(&a, &b.matmul(&w))?,
            None => gram_difference_norm(&a, &b)?,
        }
        .powi(2);
        let dist = dist_procrustes_matrices(&a, &b)?;
        let rhs = GRAM_BOUND_CONST * sigma_r_sq(&a)? * dist * dist;
        report.record(lhs - rhs, lhs + SLACK >= rhs);
    }
    report.details = format!("d {d}, r {r}");
    Ok(report)
}

/// Every logged `ξ` lies in `[128/129, 1]`; asserted only for theory-step runs.
pub fn check_xi_bound(trace: &TraceLog, step_kind: StepKind) -> CheckReport {
    let mut report = CheckReport::new("xi", step_kind == StepKind::Theory);
    let mut lo = f64::INFINITY;
    for rec in &trace.records {
        let ok = rec.xi >= XI_LOWER - 1e-12 && rec.xi <= 1.0;
        let margin = if rec.xi <= 1.0 { rec.xi - XI_LOWER } else { 1.0 - rec.xi };
        report.record(margin, ok);
        lo = lo.min(rec.xi);
    }
    report.estimate = Some(lo);
    report.details = format!("{} step, min xi {lo:.12}", step_kind.as_str());
    report
}

/// Per-step ratios `DIST²_{t+1}/DIST²_t` over `t ≥ 5`.
///
/// Iterations once DIST is within twice its final minimum are treated as the noise
/// floor and excluded. The estimate is the geometric mean of the ratios.
pub fn empirical_contraction(trace: &TraceLog) -> Result<CheckReport> {
    if !trace.has_dist() {
        return Err(Error::MissingDistance);
    }
    let mut report = CheckReport::new("contraction", true);
    let dist: Vec<(usize, f64)> = trace.records.iter().map(|r| (r.iter, r.dist.unwrap_or(0.0))).collect();
    let d0 = dist[0].1;
    if d0 == 0.0 {
        report.worst_margin = 0.0;
        report.estimate = Some(0.0);
        report.details = "converged at start".into();
        return Ok(report);
    }
    let d_min = dist.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let floor = 2.0 * d_min;
    let mut log_sum = 0.0;
    let mut max_ratio = 0.0f64;
    let mut floor_at = None;
    for w in dist.windows(2) {
        let ((i0, a), (i1, b)) = (w[0], w[1]);
        if a <= floor || a == 0.0 {
            floor_at.get_or_insert(i0);
            break;
        }
        if i0 < 5 {
            continue;
        }
        let ratio = ((b * b) / (a * a)).powf(1.0 / (i1 - i0) as f64);
        log_sum += ratio.max(f64::MIN_POSITIVE).ln();
        max_ratio = max_ratio.max(ratio);
        report.record(1.0 - ratio, ratio < 1.0);
    }
    if report.trials > 0 {
        report.estimate = Some((log_sum / report.trials as f64).exp());
    }
    let floor_note = match floor_at {
        Some(i) if d_min > 1e-6 * d0 => format!(", noise floor reached at iter {i} (DIST {d_min:.3e})"),
        Some(i) => format!(", converged by iter {i}"),
        None => String::new(),
    };
    report.details = format!("max ratio {max_ratio:.6}{floor_note}");
    Ok(report)
}

/// DIST of the initial factor against the truth, next to the initialization radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitRadius {
    pub report: CheckReport,
    pub dist_raw: f64,
    /// DIST after rescaling `A₀` to the Frobenius norm of `A⋆`.
    pub dist_scaled: f64,
    /// `σ_r(A⋆)`.
    pub sigma_r_factor: f64,
    pub gamma_prime: f64,
    pub gamma_prime_alt: f64,
    pub within_radius: bool,
    pub within_radius_alt: bool,
    /// Whether `γ′` satisfies the contraction basin condition; reported only.
    pub basin_condition: bool,
}

/// Initialization check: `DIST(A₀, A⋆) ≤ γ′·σ_r(A⋆)` for the initialization `cfg` selects.
pub fn check_init_radius<T: Real>(
    cfg: &SolverConfig,
    ens: &SensingEnsemble,
    meas: &MeasurementSet<T>,
    truth: &Factor<T>,
    theory: &TheoryParams,
) -> Result<InitRadius> {
    if meas.noise_kind != NoiseKind::None && meas.noise_param != 0.0 {
        return Err(Error::InvalidArgument("the initialization radius is checked on noiseless data".into()));
    }
    if ens.n_qubits() > cfg.dense_cap {
        return Err(Error::AboveDenseCap {
            n: ens.n_qubits(),
            cap: cfg.dense_cap,
        });
    }
    let theory = match theory.gamma_prime {
        Some(_) => theory.clone(),
        None => theory.clone().with_truth(truth, 0.0)?,
    };
    let gamma = theory.gamma_prime.unwrap_or(f64::NAN);
    let gamma_alt = theory.gamma_prime_alt.unwrap_or(f64::NAN);
    let sigma_r_factor = theory.sigma_r.unwrap_or(0.0).sqrt();

    let a0 = initialize(cfg, ens, meas)?;
    let a = a0.as_matrix();
    let b = truth.as_matrix();
    let dist_raw = dist_procrustes_matrices(a, b)?.as_f64();
    let an = a.frobenius_norm();
    let dist_scaled = if an > T::zero() {
        dist_procrustes_matrices(&a.scaled(b.frobenius_norm() / an), b)?.as_f64()
    } else {
        dist_raw
    };
    let radius = gamma * sigma_r_factor;
    let radius_alt = gamma_alt * sigma_r_factor;
    let basin_condition = theory.basin_gamma().is_some_and(|g| gamma <= g);

    let mut report = CheckReport::new("init_radius", true);
    report.record(radius - dist_raw, dist_raw <= radius);
    report.estimate = Some(dist_raw);
    report.details = format!(
        "{} init, DIST {dist_raw:.6e} (scaled {dist_scaled:.6e}), radius {radius:.6e} (alt {radius_alt:.6e}), basin condition {}",
        cfg.init_kind.as_str(),
        if basin_condition { "holds" } else { "fails" }
    );
    Ok(InitRadius {
        report,
        dist_raw,
        dist_scaled,
        sigma_r_factor,
        gamma_prime: gamma,
        gamma_prime_alt: gamma_alt,
        within_radius: dist_raw <= radius,
        within_radius_alt: dist_raw <= radius_alt,
        basin_condition,
    })
}

fn random_density(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix<f64> {
    let k = rng.random_range(1..=d);
    let mut g = ComplexMatrix::<f64>::random_gaussian(d, k, rng);
    let tr: f64 = rng.random_range(0.0..1.0);
    g.scale_mut(tr.sqrt() / g.frobenius_norm());
    g.matmul_adjoint(&g).hermitian_part()
}

/// `Re⟨Π(V) − U, V − Π(V)⟩ ≥ 0` for feasible `U` and infeasible `V`, for the
/// Frobenius-ball projection and for the trace-bounded PSD projection.
pub fn check_projection_obtuse(trials: usize, seed: u64) -> Result<[CheckReport; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ball = CheckReport::new("obtuse_ball", true);
    let mut psd = CheckReport::new("obtuse_trace_psd", true);
    for _ in 0..trials {
        let d = 1usize << rng.random_range(1..=5u32);
        let r = rng.random_range(1..=d.min(4));
        let mut u = ComplexMatrix::<f64>::random_gaussian(d, r, &mut rng);
        let s = rng.random_range(0.0..1.0) / u.frobenius_norm();
        u.scale_mut(s);
        let mut v = ComplexMatrix::<f64>::random_gaussian(d, r, &mut rng);
        let s = rng.random_range(1.0..4.0) / v.frobenius_norm();
        v.scale_mut(s);
        let mut pv = v.clone();
        project_frobenius_ball_mut(&mut pv);
        let ip = pv.sub(&u).inner_re(&v.sub(&pv));
        ball.record(ip, ip >= -SLACK);

        let u = random_density(d, &mut rng);
        let g = ComplexMatrix::<f64>::random_gaussian(d, d, &mut rng);
        let mut v = g.add(&g.adjoint()).scaled(0.5);
        let s = rng.random_range(0.1..3.0) / v.frobenius_norm();
        v.scale_mut(s);
        let pv = project_trace_psd(&v)?;
        let ip = pv.sub(&u).inner_re(&v.sub(&pv));
        psd.record(ip, ip >= -SLACK);
    }
    ball.details = "U in the unit ball, V outside it".into();
    psd.details = "U a random state with trace at most one, V random Hermitian".into();
    Ok([ball, psd])
}
