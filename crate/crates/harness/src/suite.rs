use std::path::Path;

use projfgd_core::matops::hermitian_eigenvalues;
use projfgd_core::pauli::{generate_measurements, sample_ensemble, NoiseKind};
use projfgd_core::projfgd::{random_factor, run, run_from, InitKind, SolverConfig, StepKind};
use projfgd_core::states::{Factor, GroundTruth, StateSpec, StateView};
use projfgd_core::trace::Reference;
use projfgd_core::verify::{
    check_init_radius, check_gram_bound, check_projection_obtuse, check_xi_bound, empirical_contraction, probe_rank,
    rip_probe, CheckReport,
};
use projfgd_core::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PathContext, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Rip,
    GramBound,
    Xi,
    Contraction,
    Init,
    Obtuse,
}

/// Folds several reports into one; the estimate is the largest of theirs.
pub fn merge(name: &str, asserted: bool, reports: &[CheckReport], details: String) -> CheckReport {
    CheckReport {
        name: name.to_string(),
        trials: reports.iter().map(|r| r.trials).sum(),
        violations: reports.iter().map(|r| r.violations).sum(),
        worst_margin: reports.iter().map(|r| r.worst_margin).fold(f64::INFINITY, f64::min),
        estimate: reports.iter().filter_map(|r| r.estimate).reduce(f64::max),
        asserted,
        details,
    }
}

fn sigma_r(a: &Matrix) -> Result<f64> {
    let ev = hermitian_eigenvalues(&a.adjoint_matmul(a))?;
    Ok(ev.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// `A⋆ + E` with `‖E‖_F = frac·σ_r(A⋆)`, so `DIST(A₀, A⋆) ≤ frac·σ_r(A⋆)`.
pub fn basin_start(truth: &Factor<f64>, frac: f64, seed: u64) -> Result<Factor<f64>> {
    let b = truth.as_matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = Matrix::random_gaussian(b.rows(), b.cols(), &mut rng);
    let s = frac * sigma_r(b)? / e.frobenius_norm();
    e.scale_mut(s);
    Ok(Factor::new(b.add(&e))?)
}

/// Rank-1 truth on a complete n=2 basis.
pub fn complete_basis_rip(seed: u64) -> Result<CheckReport> {
    let ens = sample_ensemble(2, 16, seed)?;
    let mut worst = 0.0f64;
    let mut trials = 0;
    for r in 1..=4 {
        let (p, rep) = rip_probe(&ens, r, 50, seed + r as u64)?;
        worst = worst.max(p.delta_4r);
        trials += rep.trials;
    }
    Ok(CheckReport {
        name: "rip_complete_basis".into(),
        trials,
        violations: usize::from(worst > 1e-10),
        worst_margin: 1e-10 - worst,
        estimate: Some(worst),
        asserted: true,
        details: "n 2, m 16, ranks 1 to 4".into(),
    })
}

/// RIP estimate at `m = 10d`, `n = 6`; reporting only.
pub fn rip_report(seed: u64) -> Result<CheckReport> {
    let ens = sample_ensemble(6, 640, seed)?;
    let (p, mut rep) = rip_probe(&ens, 1, 100, seed + 1)?;
    rep.details = format!("n 6, m 640, r 1, delta {:.4}; {}", p.delta_4r, rep.details);
    Ok(rep)
}

pub fn gram_bound_report(seed: u64) -> Result<CheckReport> {
    let mut parts = vec![check_gram_bound(1000, 16, 3, seed)?];
    for (i, (d, r)) in [(32, 4), (32, 1), (8, 2), (4, 4), (2, 1)].into_iter().enumerate() {
        parts.push(check_gram_bound(200, d, r, seed + 1 + i as u64)?);
    }
    Ok(merge("gram_bound", true, &parts, "1000 pairs at d 16 r 3, 200 each at (32,4) (32,1) (8,2) (4,4) (2,1)".into()))
}

pub fn obtuse_reports(seed: u64) -> Result<Vec<CheckReport>> {
    Ok(check_projection_obtuse(1000, seed)?.to_vec())
}

/// Theory-step runs over sizes, ranks, noise and starting points, including starts outside the ball.
pub fn xi_report(seed: u64) -> Result<CheckReport> {
    let mut parts = Vec::new();
    for k in 0..8u64 {
        let n = 3 + (k % 4) as u32;
        let r = 1 + (k % 2) as usize;
        let s = seed.wrapping_mul(1000) + k;
        let truth = GroundTruth::<f64>::generate(&StateSpec::low_rank(n, r, s))?;
        let m = (5 * r << n).min(1 << (2 * n));
        let ens = sample_ensemble(n, m, s + 1)?;
        let (kind, param) = if k % 2 == 1 { (NoiseKind::GaussianSigma, 0.05) } else { (NoiseKind::None, 0.0) };
        let meas = generate_measurements(&ens, &truth, kind, param, s + 2)?;
        let cfg = SolverConfig {
            rank: r,
            step_kind: StepKind::Theory,
            init_kind: if k % 2 == 0 { InitKind::ProjectedGradientAtZero } else { InitKind::Random },
            max_iters: 200,
            seed: s + 3,
            ..SolverConfig::default()
        };
        let out = match k % 4 {
            // Random start just inside the ball.
            1 => {
                let mut a0 = random_factor::<f64>(1 << n, r, s + 4)?.into_matrix();
                a0.scale_mut(0.999);
                run_from(&cfg, &ens, &meas, Factor::new(a0)?, None)?
            }
            // Near the truth, which sits on the ball's boundary.
            3 => run_from(&cfg, &ens, &meas, basin_start(&truth.factor, 0.05, s + 4)?, None)?,
            _ => run(&cfg, &ens, &meas, None)?,
        };
        parts.push(check_xi_bound(&out.trace, StepKind::Theory));
    }
    let min_xi = parts.iter().filter_map(|p| p.estimate).fold(f64::INFINITY, f64::min);
    let mut rep = merge("xi", true, &parts, format!("8 theory-step runs, n 3 to 6, min xi {min_xi:.12}"));
    rep.estimate = Some(min_xi);
    Ok(rep)
}

/// Noiseless runs started at `DIST ≤ 0.1·σ_r(A⋆)`; every ratio after `t = 5` must be below 1.
pub fn contraction_report(runs: usize, seed: u64) -> Result<CheckReport> {
    let mut parts = Vec::new();
    for k in 0..runs as u64 {
        let n = 5 + (k % 2) as u32;
        let r = 1 + ((k / 2) % 2) as usize;
        let s = seed.wrapping_mul(1000) + k;
        let truth = GroundTruth::<f64>::generate(&StateSpec::low_rank(n, r, s))?;
        let ens = sample_ensemble(n, (10 * r) << n, s + 1)?;
        let meas = generate_measurements(&ens, &truth, NoiseKind::None, 0.0, s + 2)?;
        let cfg = SolverConfig {
            rank: r,
            max_iters: 300,
            tol: 1e-13,
            ..SolverConfig::default()
        };
        let f = truth.factor.as_matrix();
        let reference = Reference::with_factor(StateView::Factor(f), f);
        let a0 = basin_start(&truth.factor, 0.1, s + 3)?;
        let out = run_from(&cfg, &ens, &meas, a0, Some(&reference))?;
        parts.push(empirical_contraction(&out.trace)?);
    }
    let worst = parts.iter().filter_map(|p| p.estimate).fold(0.0, f64::max);
    let mut rep = merge(
        "contraction",
        true,
        &parts,
        format!("{runs} basin-started runs, n 5 and 6, r 1 and 2, C_sam 10; worst mean ratio {worst:.4}"),
    );
    rep.estimate = Some(worst);
    Ok(rep)
}

/// Initialization radius at `m = 3d`, `n = 5`, pure states, over `seeds` instances.
pub fn init_report(seeds: usize, seed: u64) -> Result<CheckReport> {
    let (mut parts, mut alt, mut basin) = (Vec::new(), 0, 0);
    for k in 0..seeds as u64 {
        let s = seed.wrapping_mul(1000) + k;
        let truth = GroundTruth::<f64>::generate(&StateSpec::pure(5, s))?;
        let ens = sample_ensemble(5, 96, s + 1)?;
        let meas = generate_measurements(&ens, &truth, NoiseKind::None, 0.0, s + 2)?;
        let (params, _) = rip_probe(&ens, probe_rank(1, 32), 50, s + 3)?;
        let res = check_init_radius(&SolverConfig::default(), &ens, &meas, &truth.factor, &params)?;
        alt += res.within_radius_alt as usize;
        basin += res.basin_condition as usize;
        parts.push(res.report);
    }
    Ok(merge(
        "init_radius",
        true,
        &parts,
        format!("n 5, m 3d, {seeds} seeds; alternate radius holds on {alt}, basin condition on {basin}"),
    ))
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<CheckReport>> {
    let want = |s: Suite| suite == Suite::All || suite == s;
    let mut out = Vec::new();
    if want(Suite::Rip) {
        out.push(complete_basis_rip(seed)?);
        out.push(rip_report(seed)?);
    }
    if want(Suite::GramBound) {
        out.push(gram_bound_report(seed)?);
    }
    if want(Suite::Xi) {
        out.push(xi_report(seed)?);
    }
    if want(Suite::Contraction) {
        out.push(contraction_report(20, seed)?);
    }
    if want(Suite::Init) {
        out.push(init_report(20, seed)?);
    }
    if want(Suite::Obtuse) {
        out.extend(obtuse_reports(seed)?);
    }
    Ok(out)
}

/// Writes `verify_report.json` and `verify_report.txt` under `dir`.
pub fn write_reports(dir: &Path, reports: &[CheckReport]) -> Result<()> {
    std::fs::create_dir_all(dir).at(dir)?;
    let p = dir.join("verify_report.json");
    std::fs::write(&p, serde_json::to_string_pretty(reports)?).at(&p)?;
    let text: String = reports.iter().map(|r| r.summary() + "\n").collect();
    let p = dir.join("verify_report.txt");
    std::fs::write(&p, text).at(&p)?;
    Ok(())
}
