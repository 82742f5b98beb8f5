use projfgd_harness::config::{Algorithm, BaselineBudget, Cell, ExperimentConfig, MRule};
use projfgd_harness::experiment::{lower_median, Aggregates, RunRecord, TraceEntry, TrialData, TrialResult};
use projfgd_harness::report::{emit_plotdata, emit_table, persist, plot_series, strip_timing, PlotAxis, ResultsFile};
use projfgd_harness::run_experiment;
use proptest::prelude::*;

fn small(algorithms: Vec<Algorithm>) -> ExperimentConfig {
    ExperimentConfig {
        name: "small".into(),
        n: vec![4],
        r: vec![1],
        c_sam: 10.0,
        algorithms,
        trials: 1,
        max_iters: 400,
        ..Default::default()
    }
}

#[test]
fn single_trial_recovers() {
    let out = run_experiment(&small(vec![Algorithm::Projfgd])).unwrap();
    assert_eq!(out.records.len(), 1);
    let rec = &out.records[0];
    assert_eq!(rec.cell, Cell { n: 4, r: 1, m: 160 });
    assert_eq!(rec.trials.len(), 1);
    assert!(rec.aggregates.median_error < 1e-4, "{}", rec.aggregates.median_error);
    assert!(rec.trials[0].infidelity.unwrap() <= rec.aggregates.median_error);
}

#[test]
fn spec_cell_over_the_basis_size_is_refused() {
    let cfg = ExperimentConfig {
        n: vec![3],
        ..small(vec![Algorithm::Projfgd])
    };
    assert!(run_experiment(&cfg).unwrap_err().to_string().contains("infeasible"));
}

#[test]
fn reruns_match_outside_timing() {
    let cfg = ExperimentConfig {
        trials: 2,
        n: vec![3, 4],
        c_sam: 5.0,
        algorithms: vec![Algorithm::Projfgd, Algorithm::Rsvp, Algorithm::SparseApproxSdp],
        max_iters: 150,
        ..small(vec![])
    };
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    let file = |o: &projfgd_harness::ExperimentOutput| ResultsFile {
        config: o.config.clone(),
        records: o.records.clone(),
    };
    assert_eq!(strip_timing(&file(&a)).unwrap(), strip_timing(&file(&b)).unwrap());
    for (x, y) in a.traces.iter().zip(&b.traces) {
        let strip = |t: &projfgd_core::trace::TraceLog| {
            t.records.iter().map(|r| (r.iter, r.objective, r.rel_frob_error, r.dist, r.xi)).collect::<Vec<_>>()
        };
        assert_eq!(strip(&x.trace), strip(&y.trace));
    }
}

#[test]
fn algorithms_share_data() {
    let cfg = ExperimentConfig {
        trials: 2,
        algorithms: vec![Algorithm::SparseApproxSdp, Algorithm::Projfgd, Algorithm::Rsvp],
        ..small(vec![])
    };
    let out = run_experiment(&cfg).unwrap();
    let order: Vec<Algorithm> = out.records.iter().map(|r| r.algorithm).collect();
    assert_eq!(order, cfg.algorithms);
    for t in 0..2 {
        let hashes: Vec<&str> = out.records.iter().map(|r| r.trials[t].dataset_hash.as_str()).collect();
        assert!(hashes.iter().all(|h| *h == hashes[0]));
    }
    assert_ne!(out.records[0].trials[0].dataset_hash, out.records[0].trials[1].dataset_hash);
    let cell = &out.records[0].cell;
    let data = TrialData::generate(&cfg, cell, 1).unwrap();
    assert_eq!(data.hash, out.records[0].trials[1].dataset_hash);
    assert_eq!(data.seeds.trial, cfg.base_seed + 1);
}

#[test]
fn baselines_get_the_projfgd_budget() {
    let cfg = ExperimentConfig {
        n: vec![5],
        c_sam: 3.0,
        algorithms: vec![Algorithm::Projfgd, Algorithm::SparseApproxSdp],
        baseline_budget: BaselineBudget::ProjfgdTotal,
        max_iters: 3000,
        ..small(vec![])
    };
    let out = run_experiment(&cfg).unwrap();
    let p = &out.records[0].trials[0];
    let fw = &out.records[1].trials[0];
    assert_eq!(fw.budget_seconds, Some(p.wall_clock_seconds));
    assert!(p.budget_seconds.is_none());
    assert!(fw.timed_out && fw.wall_clock_seconds > p.wall_clock_seconds);
}

#[test]
fn table_lists_rows_in_order() {
    let out = run_experiment(&small(vec![Algorithm::Projfgd])).unwrap();
    let (text, csv) = emit_table(&out.records);
    assert_eq!(text.lines().count(), 3);
    assert_eq!(csv.lines().count(), 2);
    assert!(text.lines().nth(2).unwrap().starts_with("n4_r1_m160  projfgd"));

    // Four (n, C_sam) blocks by three algorithms.
    let mut records = Vec::new();
    for (n, m) in [(6, 192), (6, 384), (8, 768), (8, 1536)] {
        for algo in [Algorithm::Projfgd, Algorithm::Rsvp, Algorithm::SparseApproxSdp] {
            let mut r = out.records[0].clone();
            r.cell = Cell { n, r: 1, m };
            r.algorithm = algo;
            records.push(r);
        }
    }
    let (text, csv) = emit_table(&records);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(rows[4].split_whitespace().take(2).collect::<Vec<_>>(), ["n6_r1_m384", "rsvp"]);
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.lines().nth(12).unwrap().contains(",8,1,1536,sparse_approx_sdp,"));
}

#[test]
fn plot_data_axes() {
    let out = run_experiment(&small(vec![Algorithm::Projfgd])).unwrap();
    let trace = &out.traces[0].trace;
    let it = plot_series(trace, PlotAxis::Iteration);
    assert!(it.windows(2).all(|w| w[1].0 > w[0].0));
    let ts = plot_series(trace, PlotAxis::Seconds);
    assert!(ts.windows(2).all(|w| w[1].0 >= w[0].0));
    assert!(it.last().unwrap().1 < it[0].1);

    let dir = tempfile::tempdir().unwrap();
    let files = emit_plotdata(dir.path(), &out.traces[..1]).unwrap();
    assert_eq!(files.len(), 2);
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert!(text.starts_with("iter,rel_frob_error\n"));
    assert_eq!(text.lines().count(), it.len() + 1);
}

#[test]
fn persisted_results_reload() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&small(vec![Algorithm::Projfgd, Algorithm::Rsvp])).unwrap();
    persist(&out, dir.path()).unwrap();
    let back = projfgd_harness::report::load_results(dir.path()).unwrap();
    assert_eq!(back.records, out.records);
    let table = projfgd_harness::report::report_dir(dir.path()).unwrap();
    assert_eq!(table, emit_table(&out.records).0);
    for r in &out.records {
        let p = dir.path().join(r.trials[0].trace_file.as_ref().unwrap());
        assert!(p.exists(), "{}", p.display());
    }
}

#[test]
fn explicit_m_rule() {
    let cfg = ExperimentConfig {
        n: vec![4, 5],
        m_rule: MRule::Explicit,
        m: vec![50, 70],
        ..small(vec![Algorithm::Projfgd])
    };
    let cells = cfg.cells().unwrap();
    assert_eq!((cells[0].m, cells[1].m), (50, 70));
    let bad = ExperimentConfig { m: vec![50], ..cfg };
    assert!(bad.validate().is_err());
}

fn fake_trial(e: f64, t: f64) -> TrialResult {
    TrialResult {
        trial: 0,
        seed: 0,
        rel_frob_error: e,
        infidelity: Some(e * e),
        wall_clock_seconds: t,
        time_to_target: if e < 0.5 { Some(t) } else { None },
        iterations: (e * 100.0) as usize,
        converged: true,
        timed_out: false,
        budget_seconds: None,
        dataset_hash: String::new(),
        trace_file: None,
    }
}

proptest! {
    #[test]
    fn median_matches_sorting(values in prop::collection::vec(0.0f64..1.0, 1..40)) {
        let trials: Vec<TrialResult> = values.iter().map(|&v| fake_trial(v, 1.0 - v)).collect();
        let agg = Aggregates::of(&trials);
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let k = (sorted.len() - 1) / 2;
        prop_assert_eq!(agg.median_error, sorted[k]);
        prop_assert_eq!(lower_median(&values), Some(sorted[k]));
        let mut times: Vec<f64> = values.iter().map(|v| 1.0 - v).collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(agg.median_time, times[k]);
        let mut sq: Vec<f64> = values.iter().map(|v| v * v).collect();
        sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(agg.median_infidelity, Some(sq[k]));
        // Missing target times sort last.
        let mut tt: Vec<f64> = values.iter().map(|&v| if v < 0.5 { 1.0 - v } else { f64::INFINITY }).collect();
        tt.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assert_eq!(agg.median_time_to_target, Some(tt[k]).filter(|x| x.is_finite()));
    }
}

#[allow(dead_code)]
fn _record_type_is_public(r: RunRecord, t: TraceEntry) -> (RunRecord, TraceEntry) {
    (r, t)
}
