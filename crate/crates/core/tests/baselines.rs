mod common;

use common::DenseSensing;
use projfgd_core::baselines::{run_rsvp, run_rsvp_from, run_sparse_approx_sdp, BaselineConfig, StepRule};
use projfgd_core::matops::hermitian_eig_dense;
use projfgd_core::pauli::{generate_measurements, sample_ensemble, MeasurementSet, NoiseKind, SensingEnsemble};
use projfgd_core::projfgd::{random_factor, run, InitKind, SolverConfig};
use projfgd_core::states::{frobenius_rel_error, GroundTruth, StateSpec, StateView};
use projfgd_core::trace::Reference;
use projfgd_core::Matrix;

fn instance(n: u32, r: usize, m: usize, seed: u64) -> (GroundTruth<f64>, SensingEnsemble, MeasurementSet<f64>) {
    let gt = GroundTruth::generate(&StateSpec::low_rank(n, r, seed)).unwrap();
    let ens = sample_ensemble(n, m, seed + 100).unwrap();
    let meas = generate_measurements(&ens, &gt, NoiseKind::None, 0.0, seed + 200).unwrap();
    (gt, ens, meas)
}

/// Euclidean projection onto `{w ≥ 0, Σw ≤ 1}` by bisection on the threshold.
fn simplex_bisect(v: &[f64]) -> Vec<f64> {
    if v.iter().map(|x| x.max(0.0)).sum::<f64>() <= 1.0 {
        return v.iter().map(|x| x.max(0.0)).collect();
    }
    let (mut lo, mut hi) = (0.0, v.iter().cloned().fold(f64::MIN, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if v.iter().map(|x| (x - mid).max(0.0)).sum::<f64>() > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    v.iter().map(|x| (x - t).max(0.0)).collect()
}

/// Eigenpairs sorted by descending eigenvalue.
fn sorted_eig(h: &Matrix) -> (Vec<f64>, Matrix) {
    let e = hermitian_eig_dense(h).unwrap();
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let d = h.rows();
    let vecs = Matrix::from_fn(d, d, |i, j| e.eigenvectors[(i, idx[j])]);
    (idx.iter().map(|&i| e.eigenvalues[i]).collect(), vecs)
}

fn outer(v: &Matrix, j: usize, w: f64) -> Matrix {
    let d = v.rows();
    Matrix::from_fn(d, d, |a, b| v[(a, j)] * v[(b, j)].conj() * w)
}

fn rel(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).frobenius_norm() / b.frobenius_norm()
}

fn assert_state(rho: &Matrix, trace_eq: Option<f64>) {
    let (lam, _) = sorted_eig(rho);
    assert!(*lam.last().unwrap() > -1e-10, "{lam:?}");
    let tr = rho.trace().re;
    match trace_eq {
        Some(t) => assert!((tr - t).abs() < 1e-10, "{tr}"),
        None => assert!(tr <= 1.0 + 1e-10, "{tr}"),
    }
}

#[test]
fn rsvp_matches_dense_oracle() {
    let (_, ens, meas) = instance(4, 2, 80, 3);
    let cfg = BaselineConfig {
        rank: 2,
        init_kind: InitKind::Random,
        seed: 9,
        max_iters: 25,
        tol: 1e-300,
        step: StepRule::Fixed(0.3),
        ..BaselineConfig::default()
    };
    let out = run_rsvp(&cfg, &ens, &meas, None).unwrap();
    assert_eq!(out.iterations, 25);
    let dense = DenseSensing::new(&ens);
    let a = random_factor::<f64>(16, 2, 9).unwrap().into_matrix();
    let mut rho = a.matmul(&a.adjoint());
    for _ in 0..25 {
        let mut g = rho.clone();
        g.axpy(-0.3, &dense.gradient(&rho, &meas.y));
        let (lam, vecs) = sorted_eig(&g);
        let w = simplex_bisect(&lam[..2]);
        rho = outer(&vecs, 0, w[0]).add(&outer(&vecs, 1, w[1]));
    }
    let e = rel(out.state.as_matrix(), &rho);
    assert!(e < 1e-8, "{e}");
    assert_state(out.state.as_matrix(), None);
}

#[test]
fn rsvp_truth_is_stationary() {
    let (gt, ens, meas) = instance(3, 1, 40, 4);
    let target = gt.full_factor();
    let cfg = BaselineConfig {
        rank: 1,
        max_iters: 5,
        ..BaselineConfig::default()
    };
    let f0 = projfgd_core::states::Factor::new(target.clone()).unwrap();
    let out = run_rsvp_from(&cfg, &ens, &meas, f0, Some(&Reference::new(StateView::Factor(&target)))).unwrap();
    assert!(out.trace.records.iter().all(|r| r.rel_frob_error.unwrap() < 1e-10));
    let e = frobenius_rel_error(StateView::Dense(out.state.as_matrix()), StateView::Factor(&target)).unwrap();
    assert!(e < 1e-10, "{e}");
}

#[test]
fn rsvp_recovers_low_rank_state() {
    // m = 3·d at n = 6.
    let (gt, ens, meas) = instance(6, 1, 192, 21);
    let target = gt.full_factor();
    let cfg = BaselineConfig {
        rank: 1,
        max_iters: 2000,
        ..BaselineConfig::default()
    };
    let out = run_rsvp(&cfg, &ens, &meas, Some(&Reference::new(StateView::Factor(&target)))).unwrap();
    let err = out.trace.last().unwrap().rel_frob_error.unwrap();
    assert!(err <= 1e-3, "{err} after {}", out.iterations);
    assert_state(out.state.as_matrix(), None);
}

#[test]
fn frank_wolfe_matches_dense_oracle() {
    let (gt, ens, meas) = instance(4, 2, 80, 5);
    let target = gt.full_factor();
    let cfg = BaselineConfig {
        max_iters: 30,
        tol: 1e-300,
        ..BaselineConfig::default()
    };
    let out = run_sparse_approx_sdp(&cfg, &ens, &meas, Some(&Reference::new(StateView::Factor(&target)))).unwrap();
    assert_eq!(out.iterations, 30);
    assert_eq!(out.duality_gaps.len(), 30);
    assert_eq!(out.max_rank, 16);

    let dense = DenseSensing::new(&ens);
    let (_, v0) = sorted_eig(&dense.adjoint(&meas.y));
    let mut rho = outer(&v0, 0, 1.0);
    for t in 0..30 {
        let g = dense.gradient(&rho, &meas.y);
        let (_, v) = sorted_eig(&g.scaled(-1.0));
        let atom = outer(&v, 0, 1.0);
        let gap = g.inner_re(&rho.sub(&atom));
        assert!((gap - out.duality_gaps[t]).abs() < 1e-8 * (1.0 + gap.abs()), "{t}: {gap}");
        let gamma = 2.0 / (t as f64 + 2.0);
        rho = rho.scaled(1.0 - gamma).add(&atom.scaled(gamma));
    }
    let e = rel(out.state.as_matrix(), &rho);
    assert!(e < 1e-8, "{e}");
    // The incrementally tracked error matches a direct evaluation.
    let logged = out.trace.last().unwrap().rel_frob_error.unwrap();
    let direct = frobenius_rel_error(StateView::Dense(out.state.as_matrix()), StateView::Factor(&target)).unwrap();
    assert!((logged - direct).abs() < 1e-12, "{logged} vs {direct}");
}

#[test]
fn frank_wolfe_invariants() {
    let (gt, ens, meas) = instance(5, 1, 100, 8);
    let target = gt.full_factor();
    let cfg = BaselineConfig {
        max_iters: 12,
        tol: 1e-300,
        ..BaselineConfig::default()
    };
    let out = run_sparse_approx_sdp(&cfg, &ens, &meas, Some(&Reference::new(StateView::Factor(&target)))).unwrap();
    assert_state(out.state.as_matrix(), Some(1.0));
    assert_eq!(out.max_rank, 13);
    let (lam, _) = sorted_eig(out.state.as_matrix());
    assert!(lam.iter().filter(|l| **l > 1e-10).count() <= 13);
    assert!(out.duality_gaps.iter().all(|g| *g >= -1e-10), "{:?}", out.duality_gaps);
    assert!(out.trace.records.iter().all(|r| r.dist.is_none()));
    // The objective is bounded by the gap: f(ρ_t) − f⋆ ≤ gap_t, with f⋆ = 0.
    for (rec, gap) in out.trace.records.iter().zip(&out.duality_gaps) {
        assert!(rec.objective <= gap + 1e-10, "{} > {gap}", rec.objective);
    }
}

#[test]
fn projfgd_reaches_target_before_frank_wolfe() {
    let (gt, ens, meas) = instance(6, 1, 192, 30);
    let target = gt.full_factor();
    let truth = Reference::new(StateView::Factor(&target));
    let p = run(
        &SolverConfig {
            tol: 1e-9,
            ..SolverConfig::default()
        },
        &ens,
        &meas,
        Some(&truth),
    )
    .unwrap();
    let tp = p.trace.time_to_error(1e-3).expect("projfgd reaches 1e-3");
    // Give Frank–Wolfe exactly that much time: it must not get there first.
    let f = run_sparse_approx_sdp(
        &BaselineConfig {
            max_seconds: Some(tp),
            ..BaselineConfig::default()
        },
        &ens,
        &meas,
        Some(&truth),
    )
    .unwrap();
    assert!(f.timed_out && !f.converged);
    assert!(f.trace.time_to_error(1e-3).is_none_or(|tf| tf > tp));
}

#[test]
fn baselines_reject_bad_config() {
    let (_, ens, meas) = instance(3, 1, 20, 1);
    let bad = BaselineConfig {
        rank: 0,
        ..BaselineConfig::default()
    };
    assert!(run_rsvp(&bad, &ens, &meas, None).is_err());
    let capped = BaselineConfig {
        dense_cap: 2,
        ..BaselineConfig::default()
    };
    assert!(run_sparse_approx_sdp(&capped, &ens, &meas, None).is_err());
    let step = BaselineConfig {
        step: StepRule::Fixed(-1.0),
        ..BaselineConfig::default()
    };
    assert!(run_rsvp(&step, &ens, &meas, None).is_err());
}
