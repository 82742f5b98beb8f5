use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use projfgd_core::baselines::{run_rsvp, run_sparse_approx_sdp};
use projfgd_core::pauli::{generate_measurements, read_dataset, sample_ensemble, write_dataset, NoiseKind};
use projfgd_core::projfgd::{run, InitKind, SolverConfig, StepKind};
use projfgd_core::states::{
    frobenius_rel_error, read_factor, write_factor, Factor, GroundTruth, StateKind, StateSpec, StateView,
};
use projfgd_core::trace::{Reference, TraceLog};
use serde_json::json;

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{HarnessError, PathContext, Result};
use crate::experiment::{dataset_hash, run_experiment};
use crate::report::{emit_table, persist, report_dir};
use crate::suite::{run_suite, write_reports, Suite};

#[derive(Debug, Parser)]
#[command(name = "projfgd", version, about = "Pauli-measurement state tomography experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a ground truth, an ensemble and its measurements.
    Generate(GenerateArgs),
    /// Solve one dataset.
    Run(RunArgs),
    /// Execute an experiment config.
    Bench(BenchArgs),
    /// Run numerical checks of the convergence theory.
    Verify(VerifyArgs),
    /// Re-render tables and plot data from a results directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, conflicts_with = "c_sam")]
    pub m: Option<usize>,
    #[arg(long)]
    pub c_sam: Option<f64>,
    /// pure, low-rank or near-low-rank; pure for r = 1, low-rank otherwise.
    #[arg(long)]
    pub kind: Option<StateKind>,
    #[arg(long, default_value_t = StateSpec::DEFAULT_TAIL_MASS)]
    pub tail_mass: f64,
    #[arg(long, default_value_t = StateSpec::DEFAULT_TAIL_DECAY)]
    pub tail_decay: f64,
    /// none, gaussian_sigma or fixed_norm.
    #[arg(long, default_value = "none")]
    pub noise: NoiseKind,
    #[arg(long, default_value_t = 0.0)]
    pub noise_param: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "projfgd")]
    pub algo: Algorithm,
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long, default_value = "practical")]
    pub step: StepKind,
    #[arg(long, default_value = "projected_gradient_at_zero")]
    pub init: InitKind,
    #[arg(long, default_value_t = 5e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Factor file of the truth, for error columns.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Factor file for the estimate (ProjFGD only).
    #[arg(long)]
    pub factor_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "verify_results")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub dir: PathBuf,
}

/// Exit codes: 0 success, 1 usage or runtime error, 2 failed checks.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).at(path)?))
}

fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).at(parent)?;
    }
    File::create(path).at(path)
}

pub fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Generate(a) => generate(a).map(|_| 0),
        Command::Run(a) => run_one(a).map(|_| 0),
        Command::Bench(a) => {
            let mut cfg = ExperimentConfig::load(&a.config)?;
            if let Some(out) = a.out {
                cfg.output_dir = out;
            }
            if let Some(w) = a.workers {
                cfg.workers = w;
            }
            let out = run_experiment(&cfg)?;
            persist(&out, &cfg.output_dir)?;
            print!("{}", emit_table(&out.records).0);
            Ok(0)
        }
        Command::Verify(a) => {
            let reports = run_suite(a.suite, a.seed)?;
            write_reports(&a.out, &reports)?;
            for r in &reports {
                println!("{}", r.summary());
            }
            Ok(if reports.iter().all(|r| r.passed()) { 0 } else { 2 })
        }
        Command::Report(a) => {
            print!("{}", report_dir(&a.dir)?);
            Ok(0)
        }
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let d = 1usize << a.n.min(30);
    let m = match (a.m, a.c_sam) {
        (Some(m), _) => m,
        (None, c) => (c.unwrap_or(3.0) * (a.r * d) as f64).ceil() as usize,
    };
    let kind = a.kind.unwrap_or(if a.r == 1 { StateKind::Pure } else { StateKind::LowRank });
    let spec = StateSpec {
        n_qubits: a.n,
        rank: a.r,
        kind,
        tail_decay: a.tail_decay,
        tail_mass: a.tail_mass,
        seed: a.seed,
    };
    let truth = GroundTruth::<f64>::generate(&spec)?;
    let ens = sample_ensemble(a.n, m, a.seed.wrapping_add(1))?;
    let meas = generate_measurements(&ens, &truth, a.noise, a.noise_param, a.seed.wrapping_add(2))?;
    std::fs::create_dir_all(&a.out).at(&a.out)?;
    let p = a.out.join("dataset.txt");
    write_dataset(&mut create(&p)?, &ens, &meas)?;
    let p = a.out.join("truth.factor");
    write_factor(&mut create(&p)?, &truth.factor)?;
    if let Some(tail) = &truth.tail {
        let p = a.out.join("tail.factor");
        write_factor(&mut create(&p)?, &Factor::new(tail.clone())?)?;
    }
    println!("{}", json!({ "n": a.n, "r": a.r, "m": m, "dataset_sha256": dataset_hash(&ens, &meas)? }));
    Ok(())
}

fn run_one(a: RunArgs) -> Result<()> {
    let (ens, meas) = read_dataset::<f64, _>(open(&a.data)?)?;
    let truth = match &a.truth {
        Some(p) => Some(read_factor::<f64, _>(open(p)?)?),
        None => None,
    };
    let reference = truth
        .as_ref()
        .map(|f| Reference::with_factor(StateView::Factor(f.as_matrix()), f.as_matrix()));
    let scfg = SolverConfig {
        rank: a.rank,
        max_iters: a.max_iters,
        tol: a.tol,
        init_kind: a.init,
        step_kind: a.step,
        seed: a.seed,
        ..SolverConfig::default()
    };
    let (trace, summary, error): (TraceLog, serde_json::Value, Option<f64>) = match a.algo {
        Algorithm::Projfgd => {
            let out = run(&scfg, &ens, &meas, reference.as_ref())?;
            if let Some(p) = &a.factor_out {
                write_factor(&mut create(p)?, &out.factor)?;
            }
            let err = truth
                .as_ref()
                .map(|t| frobenius_rel_error(StateView::Factor(out.factor.as_matrix()), StateView::Factor(t.as_matrix())))
                .transpose()?;
            (out.trace.clone(), serde_json::to_value(out.summary())?, err)
        }
        algo => {
            let bcfg = projfgd_core::baselines::BaselineConfig {
                rank: a.rank,
                max_iters: a.max_iters,
                tol: a.tol,
                init_kind: a.init,
                seed: a.seed,
                ..Default::default()
            };
            let out = if algo == Algorithm::Rsvp {
                run_rsvp(&bcfg, &ens, &meas, reference.as_ref())?
            } else {
                run_sparse_approx_sdp(&bcfg, &ens, &meas, reference.as_ref())?
            };
            let err = truth
                .as_ref()
                .map(|t| frobenius_rel_error(StateView::Dense(out.state.as_matrix()), StateView::Factor(t.as_matrix())))
                .transpose()?;
            let s = json!({
                "iterations": out.iterations,
                "converged": out.converged,
                "seconds": out.seconds,
                "max_rank": out.max_rank,
            });
            (out.trace, s, err)
        }
    };
    if let Some(p) = &a.trace_out {
        trace.write_csv(&mut create(p)?)?;
    }
    let mut s = summary;
    s["algorithm"] = json!(a.algo.as_str());
    if let Some(e) = error {
        s["rel_frob_error"] = json!(e);
    }
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{s}").map_err(HarnessError::Io)?;
    Ok(())
}
