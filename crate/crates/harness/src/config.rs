use std::path::{Path, PathBuf};
use std::str::FromStr;

use projfgd_core::baselines::{BaselineConfig, StepRule};
use projfgd_core::pauli::NoiseKind;
use projfgd_core::projfgd::{InitKind, SolverConfig, StepKind};
use projfgd_core::states::{StateKind, StateSpec};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Projfgd,
    Rsvp,
    SparseApproxSdp,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Projfgd => "projfgd",
            Algorithm::Rsvp => "rsvp",
            Algorithm::SparseApproxSdp => "sparse_approx_sdp",
        }
    }

    pub fn is_dense(&self) -> bool {
        !matches!(self, Algorithm::Projfgd)
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "projfgd" => Ok(Algorithm::Projfgd),
            "rsvp" => Ok(Algorithm::Rsvp),
            "sparse_approx_sdp" | "fw" => Ok(Algorithm::SparseApproxSdp),
            _ => Err(HarnessError::Config(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// How `m` is chosen for each `(n, r)` cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MRule {
    /// `m = ⌈c_sam·r·d⌉`.
    CSam,
    /// `m = ⌈(7/3)·r·d·ln d⌉`.
    LogRule,
    /// The values in `m`, one per cell in order.
    Explicit,
}

/// Time budget handed to the baselines, derived from the ProjFGD run on the same data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineBudget {
    None,
    /// ProjFGD's total solve time.
    ProjfgdTotal,
    /// ProjFGD's time to `target_error`, or its total time when it never gets there.
    ProjfgdTarget,
}

fn d_ln_d(n: u32) -> f64 {
    let d = (1u64 << n) as f64;
    d * d.ln()
}

/// A sweep over `(n, r)` cells with `trials` Monte Carlo repetitions each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: Vec<u32>,
    pub r: Vec<usize>,
    pub m_rule: MRule,
    pub c_sam: f64,
    pub m: Vec<usize>,
    pub state: StateKind,
    pub tail_decay: f64,
    pub tail_mass: f64,
    pub noise: NoiseKind,
    pub noise_param: f64,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,

    pub tol: f64,
    pub max_iters: usize,
    pub init: InitKind,
    pub step: StepKind,
    pub log_every: usize,
    pub dense_cap: u32,
    /// Fixed RSVP step; `1/L̂` when absent.
    pub rsvp_step: Option<f64>,
    pub target_error: f64,
    pub baseline_budget: BaselineBudget,
    pub budget_scale: f64,
    /// Baseline iteration cap, if different from `max_iters`.
    pub baseline_max_iters: Option<usize>,
    pub write_traces: bool,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            name: "experiment".into(),
            n: vec![4],
            r: vec![1],
            m_rule: MRule::CSam,
            c_sam: 3.0,
            m: Vec::new(),
            state: StateKind::Pure,
            tail_decay: StateSpec::DEFAULT_TAIL_DECAY,
            tail_mass: StateSpec::DEFAULT_TAIL_MASS,
            noise: NoiseKind::None,
            noise_param: 0.0,
            algorithms: vec![Algorithm::Projfgd],
            trials: 1,
            base_seed: 1,
            output_dir: PathBuf::from("results"),
            tol: s.tol,
            max_iters: s.max_iters,
            init: s.init_kind,
            step: s.step_kind,
            log_every: 1,
            dense_cap: s.dense_cap,
            rsvp_step: None,
            target_error: 1e-3,
            baseline_budget: BaselineBudget::None,
            budget_scale: 1.0,
            baseline_max_iters: None,
            write_traces: true,
            workers: 1,
        }
    }
}

/// One `(n, r, m)` combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: u32,
    pub r: usize,
    pub m: usize,
}

impl Cell {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn label(&self) -> String {
        format!("n{}_r{}_m{}", self.n, self.r, self.m)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Path {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Cells in config order: `n` outer, `r` inner.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &r in &self.r {
                let d = 1usize << n;
                let m = match self.m_rule {
                    MRule::CSam => (self.c_sam * (r * d) as f64).ceil() as usize,
                    MRule::LogRule => (7.0 / 3.0 * r as f64 * d_ln_d(n)).ceil() as usize,
                    MRule::Explicit => *self
                        .m
                        .get(out.len())
                        .ok_or_else(|| HarnessError::Config(format!("no explicit m for cell {}", out.len())))?,
                };
                out.push(Cell { n, r, m });
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n.is_empty() || self.r.is_empty() {
            return bad("n and r need at least one value".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms listed".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.m_rule == MRule::CSam && !(self.c_sam > 0.0) {
            return bad(format!("c_sam must be positive, got {}", self.c_sam));
        }
        if self.m_rule == MRule::Explicit && self.m.len() != self.n.len() * self.r.len() {
            return bad(format!(
                "explicit m needs {} values, got {}",
                self.n.len() * self.r.len(),
                self.m.len()
            ));
        }
        if !(self.budget_scale > 0.0) {
            return bad("budget_scale must be positive".into());
        }
        for cell in self.cells()? {
            let available = 1u128 << (2 * cell.n);
            if cell.m == 0 || cell.m as u128 > available {
                return bad(format!(
                    "cell {}: m = {} is infeasible, need 1 ≤ m ≤ 4^n = {available}",
                    cell.label(),
                    cell.m
                ));
            }
            if cell.r > cell.dim() {
                return bad(format!("cell {}: rank exceeds dimension", cell.label()));
            }
            for algo in &self.algorithms {
                if algo.is_dense() && cell.n > self.dense_cap {
                    return bad(format!(
                        "{} keeps a dense iterate and is refused at n = {} above the dense cap {}",
                        algo.as_str(),
                        cell.n,
                        self.dense_cap
                    ));
                }
            }
            self.state_spec(&cell, 0).validate()?;
        }
        self.solver_config(&self.cells()?[0], 0).validate()?;
        Ok(())
    }

    pub fn state_spec(&self, cell: &Cell, seed: u64) -> StateSpec {
        StateSpec {
            n_qubits: cell.n,
            rank: cell.r,
            kind: self.state,
            tail_decay: self.tail_decay,
            tail_mass: self.tail_mass,
            seed,
        }
    }

    pub fn solver_config(&self, cell: &Cell, seed: u64) -> SolverConfig {
        SolverConfig {
            rank: cell.r,
            max_iters: self.max_iters,
            tol: self.tol,
            init_kind: self.init,
            step_kind: self.step,
            seed,
            log_every: self.log_every,
            dense_cap: self.dense_cap.max(SolverConfig::default().dense_cap),
            ..SolverConfig::default()
        }
    }

    pub fn baseline_config(&self, cell: &Cell, seed: u64, max_seconds: Option<f64>) -> BaselineConfig {
        BaselineConfig {
            rank: cell.r,
            max_iters: self.baseline_max_iters.unwrap_or(self.max_iters),
            tol: self.tol,
            step: self.rsvp_step.map_or(StepRule::Auto, StepRule::Fixed),
            init_kind: self.init,
            seed,
            log_every: self.log_every,
            dense_cap: self.dense_cap,
            max_seconds,
            ..BaselineConfig::default()
        }
    }
}
