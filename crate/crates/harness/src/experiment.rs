use std::collections::HashMap;

use projfgd_core::baselines::{run_rsvp, run_sparse_approx_sdp};
use projfgd_core::pauli::{generate_measurements, sample_ensemble, write_dataset, MeasurementSet, SensingEnsemble};
use projfgd_core::projfgd::run as run_projfgd;
use projfgd_core::states::{frobenius_rel_error, infidelity_with_factor, GroundTruth, StateKind, StateView};
use projfgd_core::trace::{Reference, TraceLog};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Algorithm, BaselineBudget, Cell, ExperimentConfig};
use crate::error::{HarnessError, Result};

/// Seeds of one trial, all derived from `base_seed + trial`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSeeds {
    pub trial: u64,
    pub truth: u64,
    pub ensemble: u64,
    pub noise: u64,
    pub solver: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl TrialSeeds {
    pub fn derive(trial_seed: u64) -> Self {
        let base = splitmix(trial_seed);
        let s = |k: u64| splitmix(base ^ k.wrapping_mul(0xd6e8_feb8_6659_fd93));
        Self {
            trial: trial_seed,
            truth: s(1),
            ensemble: s(2),
            noise: s(3),
            solver: s(4),
        }
    }
}

/// Ground truth, ensemble and data shared by every algorithm of a trial.
pub struct TrialData {
    pub seeds: TrialSeeds,
    pub truth: GroundTruth<f64>,
    pub ens: SensingEnsemble,
    pub meas: MeasurementSet<f64>,
    /// SHA-256 of the serialized dataset.
    pub hash: String,
}

pub fn dataset_hash(ens: &SensingEnsemble, meas: &MeasurementSet<f64>) -> Result<String> {
    let mut buf = Vec::new();
    write_dataset(&mut buf, ens, meas)?;
    Ok(hex::encode(Sha256::digest(&buf)))
}

impl TrialData {
    pub fn generate(cfg: &ExperimentConfig, cell: &Cell, trial: usize) -> Result<Self> {
        let seeds = TrialSeeds::derive(cfg.base_seed + trial as u64);
        let truth = GroundTruth::generate(&cfg.state_spec(cell, seeds.truth))?;
        let ens = sample_ensemble(cell.n, cell.m, seeds.ensemble)?;
        let meas = generate_measurements(&ens, &truth, cfg.noise, cfg.noise_param, seeds.noise)?;
        let hash = dataset_hash(&ens, &meas)?;
        Ok(Self {
            seeds,
            truth,
            ens,
            meas,
            hash,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    /// Against `ρ⋆`, or against its rank-r part for near-low-rank truths.
    pub rel_frob_error: f64,
    /// Against the rank-r truth; absent for near-low-rank truths.
    pub infidelity: Option<f64>,
    pub wall_clock_seconds: f64,
    /// First logged time with error at most `target_error`.
    pub time_to_target: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub timed_out: bool,
    pub budget_seconds: Option<f64>,
    pub dataset_hash: String,
    pub trace_file: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub median_error: f64,
    pub median_time: f64,
    pub median_infidelity: Option<f64>,
    pub median_iterations: usize,
    /// `None` when the median trial never reached the target.
    pub median_time_to_target: Option<f64>,
}

/// Lower median: the `⌊(k−1)/2⌋`-th order statistic.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

/// Lower median with `None` ordered after every value.
pub fn lower_median_opt(values: &[Option<f64>]) -> Option<f64> {
    let v: Vec<f64> = values.iter().map(|x| x.unwrap_or(f64::INFINITY)).collect();
    lower_median(&v).filter(|m| m.is_finite())
}

impl Aggregates {
    pub fn of(trials: &[TrialResult]) -> Self {
        let pick = |f: fn(&TrialResult) -> f64| lower_median(&trials.iter().map(f).collect::<Vec<_>>()).unwrap_or(f64::NAN);
        let inf: Vec<f64> = trials.iter().filter_map(|t| t.infidelity).collect();
        Self {
            median_error: pick(|t| t.rel_frob_error),
            median_time: pick(|t| t.wall_clock_seconds),
            median_infidelity: if inf.len() == trials.len() { lower_median(&inf) } else { None },
            median_iterations: pick(|t| t.iterations as f64) as usize,
            median_time_to_target: lower_median_opt(&trials.iter().map(|t| t.time_to_target).collect::<Vec<_>>()),
        }
    }
}

/// Results of one algorithm on one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub cell: Cell,
    pub algorithm: Algorithm,
    pub trials: Vec<TrialResult>,
    pub aggregates: Aggregates,
}

#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub cell: Cell,
    pub algorithm: Algorithm,
    pub trial: usize,
    pub trace: TraceLog,
}

impl TraceEntry {
    pub fn file_name(&self) -> String {
        format!("{}_{}_t{}.csv", self.cell.label(), self.algorithm.as_str(), self.trial)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub traces: Vec<TraceEntry>,
}

impl ExperimentOutput {
    pub fn record(&self, cell: &Cell, algorithm: Algorithm) -> Option<&RunRecord> {
        self.records.iter().find(|r| &r.cell == cell && r.algorithm == algorithm)
    }

    pub fn trace(&self, cell: &Cell, algorithm: Algorithm, trial: usize) -> Option<&TraceLog> {
        self.traces
            .iter()
            .find(|t| &t.cell == cell && t.algorithm == algorithm && t.trial == trial)
            .map(|t| &t.trace)
    }
}

struct Scored {
    error: f64,
    infidelity: Option<f64>,
}

fn score(data: &TrialData, est: StateView<'_, f64>) -> Result<Scored> {
    let f = data.truth.factor.as_matrix();
    let error = frobenius_rel_error(est, StateView::Factor(f))?;
    let infidelity = match data.truth.spec.kind {
        StateKind::NearLowRank => None,
        _ => Some(infidelity_with_factor(est, f)?),
    };
    Ok(Scored { error, infidelity })
}

/// Runs one algorithm on one trial's data.
pub fn run_algorithm(
    cfg: &ExperimentConfig,
    cell: &Cell,
    trial: usize,
    data: &TrialData,
    algorithm: Algorithm,
    budget: Option<f64>,
) -> Result<(TrialResult, TraceLog)> {
    let f = data.truth.factor.as_matrix();
    let reference = Reference::with_factor(StateView::Factor(f), f);
    let (trace, seconds, iterations, converged, timed_out, scored) = match algorithm {
        Algorithm::Projfgd => {
            let out = run_projfgd(&cfg.solver_config(cell, data.seeds.solver), &data.ens, &data.meas, Some(&reference))?;
            let s = score(data, StateView::Factor(out.factor.as_matrix()))?;
            (out.trace, out.seconds, out.iterations, out.converged, false, s)
        }
        Algorithm::Rsvp | Algorithm::SparseApproxSdp => {
            let bcfg = cfg.baseline_config(cell, data.seeds.solver, budget);
            let out = if algorithm == Algorithm::Rsvp {
                run_rsvp(&bcfg, &data.ens, &data.meas, Some(&reference))?
            } else {
                run_sparse_approx_sdp(&bcfg, &data.ens, &data.meas, Some(&reference))?
            };
            let s = score(data, StateView::Dense(out.state.as_matrix()))?;
            (out.trace, out.seconds, out.iterations, out.converged, out.timed_out, s)
        }
    };
    let result = TrialResult {
        trial,
        seed: data.seeds.trial,
        rel_frob_error: scored.error,
        infidelity: scored.infidelity,
        wall_clock_seconds: seconds,
        time_to_target: trace.time_to_error(cfg.target_error),
        iterations,
        converged,
        timed_out,
        budget_seconds: budget,
        dataset_hash: data.hash.clone(),
        trace_file: None,
    };
    Ok((result, trace))
}

type TrialRun = Vec<(Algorithm, TrialResult, TraceLog)>;

fn run_trial(cfg: &ExperimentConfig, cell: &Cell, trial: usize) -> Result<TrialRun> {
    let data = TrialData::generate(cfg, cell, trial)?;
    let mut done: HashMap<Algorithm, (TrialResult, TraceLog)> = HashMap::new();
    let mut order = cfg.algorithms.clone();
    // ProjFGD first, so its times can set the baselines' budget.
    order.sort_by_key(|a| *a != Algorithm::Projfgd);
    order.dedup();
    for algo in order {
        let budget = match (cfg.baseline_budget, done.get(&Algorithm::Projfgd), algo.is_dense()) {
            (BaselineBudget::None, _, _) | (_, None, _) | (_, _, false) => None,
            (BaselineBudget::ProjfgdTotal, Some((p, _)), true) => Some(p.wall_clock_seconds * cfg.budget_scale),
            (BaselineBudget::ProjfgdTarget, Some((p, _)), true) => {
                Some(p.time_to_target.unwrap_or(p.wall_clock_seconds) * cfg.budget_scale)
            }
        };
        let out = run_algorithm(cfg, cell, trial, &data, algo, budget)?;
        done.insert(algo, out);
    }
    Ok(cfg
        .algorithms
        .iter()
        .filter_map(|a| done.remove(a).map(|(r, t)| (*a, r, t)))
        .collect())
}

/// Every cell, trial and algorithm of `cfg`; trials run on `cfg.workers` threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let mut records = Vec::new();
    let mut traces = Vec::new();
    for cell in cfg.cells()? {
        let runs: Vec<TrialRun> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, &cell, t))
                .collect::<Result<Vec<_>>>()
        })?;
        let mut per_algo: Vec<(Algorithm, Vec<TrialResult>)> = Vec::new();
        for (trial, run) in runs.into_iter().enumerate() {
            for (algo, mut result, trace) in run {
                let entry = TraceEntry {
                    cell: cell.clone(),
                    algorithm: algo,
                    trial,
                    trace,
                };
                if cfg.write_traces {
                    result.trace_file = Some(format!("traces/{}", entry.file_name()));
                }
                traces.push(entry);
                match per_algo.iter_mut().find(|(a, _)| *a == algo) {
                    Some((_, v)) => v.push(result),
                    None => per_algo.push((algo, vec![result])),
                }
            }
        }
        for (algo, trials) in per_algo {
            records.push(RunRecord {
                experiment: cfg.name.clone(),
                cell: cell.clone(),
                algorithm: algo,
                aggregates: Aggregates::of(&trials),
                trials,
            });
        }
    }
    Ok(ExperimentOutput {
        config: cfg.clone(),
        records,
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_is_lower_middle() {
        assert_eq!(lower_median(&[3.0, 1.0, 2.0, 4.0]), Some(2.0));
        assert_eq!(lower_median(&[5.0]), Some(5.0));
        assert_eq!(lower_median(&[]), None);
        assert_eq!(lower_median_opt(&[Some(1.0), None, None]), None);
        assert_eq!(lower_median_opt(&[Some(1.0), None, Some(0.5)]), Some(1.0));
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let s = TrialSeeds::derive(7);
        let all = [s.truth, s.ensemble, s.noise, s.solver];
        for i in 0..4 {
            for j in 0..i {
                assert_ne!(all[i], all[j]);
            }
        }
        assert_ne!(TrialSeeds::derive(8).truth, s.truth);
    }
}
