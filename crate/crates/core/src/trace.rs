//! Per-iteration solver logs and the reference state they are scored against.

use std::io::{BufRead, Write};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::ComplexMatrix;
use crate::scalar::Real;
use crate::states::{dist_procrustes_matrices, frobenius_rel_error, StateView};

pub const TRACE_HEADER: &str = "iter,time_s,objective,rel_frob_error,dist,xi,eta";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    /// Solver time since the start of the run, initialization included, metric evaluation excluded.
    pub time_s: f64,
    /// `½‖y − M(ρ)‖₂²`.
    pub objective: f64,
    pub rel_frob_error: Option<f64>,
    pub dist: Option<f64>,
    pub xi: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceLog {
    pub records: Vec<TraceRecord>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.17e}")).unwrap_or_default()
}

impl TraceLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, rec: TraceRecord) {
        debug_assert!(self.records.last().is_none_or(|l| l.iter < rec.iter));
        self.records.push(rec);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn has_dist(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.dist.is_some())
    }

    /// First logged time at which the error drops to `target` or below.
    pub fn time_to_error(&self, target: f64) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.rel_frob_error.is_some_and(|e| e <= target))
            .map(|r| r.time_s)
    }

    pub fn iters_to_error(&self, target: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.rel_frob_error.is_some_and(|e| e <= target))
            .map(|r| r.iter)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let mut s = String::with_capacity(64 * (self.records.len() + 1));
        s.push_str(TRACE_HEADER);
        s.push('\n');
        for r in &self.records {
            s.push_str(&format!(
                "{},{:.9e},{:.17e},{},{},{:.17e},{:.17e}\n",
                r.iter,
                r.time_s,
                r.objective,
                opt(r.rel_frob_error),
                opt(r.dist),
                r.xi,
                r.eta
            ));
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut log = TraceLog::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            if i == 0 {
                if line.trim() != TRACE_HEADER {
                    return Err(bad(format!("unexpected header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad(format!("expected 7 fields, got {}", f.len())));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            let maybe = |s: &str| if s.trim().is_empty() { Ok(None) } else { num(s).map(Some) };
            log.records.push(TraceRecord {
                iter: f[0].trim().parse().map_err(|e| bad(format!("{e}")))?,
                time_s: num(f[1])?,
                objective: num(f[2])?,
                rel_frob_error: maybe(f[3])?,
                dist: maybe(f[4])?,
                xi: num(f[5])?,
                eta: num(f[6])?,
            });
        }
        Ok(log)
    }
}

/// What a run is scored against: the error target and optionally a `d × r` factor for DIST.
#[derive(Clone, Copy, Debug)]
pub struct Reference<'a, T: Real> {
    pub target: StateView<'a, T>,
    pub factor: Option<&'a ComplexMatrix<T>>,
}

impl<'a, T: Real> Reference<'a, T> {
    pub fn new(target: StateView<'a, T>) -> Self {
        Self { target, factor: None }
    }

    pub fn with_factor(target: StateView<'a, T>, factor: &'a ComplexMatrix<T>) -> Self {
        Self {
            target,
            factor: Some(factor),
        }
    }

    /// `‖ρ⋆‖_F²` of the target.
    pub(crate) fn target_norm_sq(&self) -> T {
        match self.target {
            StateView::Factor(b) => b.adjoint_matmul(b).frobenius_norm_sq(),
            StateView::Dense(m) => m.frobenius_norm_sq(),
        }
    }

    /// `⟨v, ρ⋆ v⟩` for a unit column `v`.
    pub(crate) fn quad_form(&self, v: &ComplexMatrix<T>) -> T {
        match self.target {
            StateView::Factor(b) => b.adjoint_matmul(v).frobenius_norm_sq(),
            StateView::Dense(m) => v.adjoint_matmul(&m.matmul(v)).trace().re,
        }
    }

    pub(crate) fn score(&self, est: StateView<'_, T>) -> Result<(Option<f64>, Option<f64>)> {
        let err = frobenius_rel_error(est, self.target)?.as_f64();
        let dist = match (self.factor, est) {
            (Some(b), StateView::Factor(a)) if a.cols() == b.cols() => Some(dist_procrustes_matrices(a, b)?.as_f64()),
            _ => None,
        };
        Ok((Some(err), dist))
    }
}

/// A wall clock that can be paused while metrics are evaluated.
#[derive(Debug)]
pub(crate) struct Stopwatch {
    spent: Duration,
    since: Option<Instant>,
}

impl Stopwatch {
    pub fn started() -> Self {
        Self {
            spent: Duration::ZERO,
            since: Some(Instant::now()),
        }
    }

    pub fn pause(&mut self) {
        if let Some(t) = self.since.take() {
            self.spent += t.elapsed();
        }
    }

    pub fn resume(&mut self) {
        if self.since.is_none() {
            self.since = Some(Instant::now());
        }
    }

    pub fn seconds(&self) -> f64 {
        let live = self.since.map(|t| t.elapsed()).unwrap_or_default();
        (self.spent + live).as_secs_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut log = TraceLog::new();
        log.push(TraceRecord {
            iter: 0,
            time_s: 0.5,
            objective: 1.0 / 3.0,
            rel_frob_error: Some(0.1),
            dist: None,
            xi: 1.0,
            eta: 0.01,
        });
        log.push(TraceRecord {
            iter: 1,
            time_s: 0.75,
            objective: 1e-20,
            rel_frob_error: None,
            dist: Some(2.0f64.sqrt()),
            xi: 128.0 / 129.0,
            eta: 0.01,
        });
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        let back = TraceLog::read_csv(&buf[..]).unwrap();
        assert_eq!(back.records[1].dist, log.records[1].dist);
        assert_eq!(back.records[0].objective, log.records[0].objective);
        assert_eq!(back.records[1].xi, log.records[1].xi);
        assert_eq!(back.time_to_error(0.2), Some(0.5));
        assert_eq!(back.iters_to_error(0.01), None);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(TraceLog::read_csv(&b"a,b\n"[..]).is_err());
    }
}
