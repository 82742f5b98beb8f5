use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use projfgd_core::trace::TraceLog;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{PathContext, Result};
use crate::experiment::{ExperimentOutput, RunRecord, TraceEntry};

pub const RESULTS_FILE: &str = "results.json";

/// Keys whose values depend on the clock.
pub const TIMING_KEYS: &[&str] = &[
    "wall_clock_seconds",
    "time_to_target",
    "budget_seconds",
    "median_time",
    "median_time_to_target",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
}

fn sci(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4e}"))
}

fn full(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.17e}"))
}

/// Aligned text table and its full-precision CSV twin, one row per record in order.
pub fn emit_table(records: &[RunRecord]) -> (String, String) {
    let header = ["cell", "algorithm", "error", "time_s", "infidelity", "t_target_s", "iters", "trials"];
    let rows: Vec<[String; 8]> = records
        .iter()
        .map(|r| {
            let a = &r.aggregates;
            [
                r.cell.label(),
                r.algorithm.as_str().to_string(),
                sci(Some(a.median_error)),
                format!("{:.4}", a.median_time),
                sci(a.median_infidelity),
                a.median_time_to_target.map_or("-".into(), |t| format!("{t:.4}")),
                a.median_iterations.to_string(),
                r.trials.len().to_string(),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut text = String::new();
    let line = |cols: &[String], out: &mut String| {
        let cells: Vec<String> = cols
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    };
    line(&header.map(String::from), &mut text);
    let _ = writeln!(text, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    for row in &rows {
        line(row, &mut text);
    }

    let mut csv = String::from(
        "experiment,n,r,m,algorithm,median_error,median_time_s,median_infidelity,median_time_to_target_s,median_iterations,trials\n",
    );
    for r in records {
        let a = &r.aggregates;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{:.17e},{:.9e},{},{},{},{}",
            r.experiment,
            r.cell.n,
            r.cell.r,
            r.cell.m,
            r.algorithm.as_str(),
            a.median_error,
            a.median_time,
            full(a.median_infidelity),
            full(a.median_time_to_target),
            a.median_iterations,
            r.trials.len()
        );
    }
    (text, csv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotAxis {
    Iteration,
    Seconds,
}

/// `(x, error)` pairs of a trace; records without an error are skipped.
pub fn plot_series(trace: &TraceLog, axis: PlotAxis) -> Vec<(f64, f64)> {
    trace
        .records
        .iter()
        .filter_map(|r| {
            let x = match axis {
                PlotAxis::Iteration => r.iter as f64,
                PlotAxis::Seconds => r.time_s,
            };
            r.rel_frob_error.map(|e| (x, e))
        })
        .collect()
}

/// Two CSVs per trace in `dir`: error against iteration and against cumulative seconds.
pub fn emit_plotdata(dir: &Path, traces: &[TraceEntry]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).at(dir)?;
    let mut written = Vec::new();
    for t in traces {
        let stem = t.file_name().trim_end_matches(".csv").to_string();
        for (axis, suffix, head) in [
            (PlotAxis::Iteration, "iter", "iter"),
            (PlotAxis::Seconds, "time", "seconds"),
        ] {
            let mut s = format!("{head},rel_frob_error\n");
            for (x, y) in plot_series(&t.trace, axis) {
                match axis {
                    PlotAxis::Iteration => writeln!(s, "{},{y:.17e}", x as usize),
                    PlotAxis::Seconds => writeln!(s, "{x:.9e},{y:.17e}"),
                }
                .expect("writing to a string");
            }
            let path = dir.join(format!("{stem}_{suffix}.csv"));
            fs::write(&path, s).at(&path)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes the results file, traces, tables and plot data under `dir`.
pub fn persist(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).at(dir)?;
    let results = ResultsFile {
        config: out.config.clone(),
        records: out.records.clone(),
    };
    let path = dir.join(RESULTS_FILE);
    fs::write(&path, serde_json::to_string_pretty(&results)?).at(&path)?;
    write_tables(&out.records, dir)?;
    if out.config.write_traces {
        let tdir = dir.join("traces");
        fs::create_dir_all(&tdir).at(&tdir)?;
        for t in &out.traces {
            let path = tdir.join(t.file_name());
            let mut f = fs::File::create(&path).at(&path)?;
            t.trace.write_csv(&mut f)?;
        }
        emit_plotdata(&dir.join("plots"), &out.traces)?;
    }
    Ok(())
}

fn write_tables(records: &[RunRecord], dir: &Path) -> Result<()> {
    let (text, csv) = emit_table(records);
    let p = dir.join("table.txt");
    fs::write(&p, text).at(&p)?;
    let p = dir.join("table.csv");
    fs::write(&p, csv).at(&p)?;
    Ok(())
}

pub fn load_results(dir: &Path) -> Result<ResultsFile> {
    let path = dir.join(RESULTS_FILE);
    let text = fs::read_to_string(&path).at(&path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Rebuilds tables and plot data from a results directory written by [`persist`].
pub fn report_dir(dir: &Path) -> Result<String> {
    let results = load_results(dir)?;
    write_tables(&results.records, dir)?;
    let mut traces = Vec::new();
    for r in &results.records {
        for t in &r.trials {
            if let Some(file) = &t.trace_file {
                let path = dir.join(file);
                let f = fs::File::open(&path).at(&path)?;
                traces.push(TraceEntry {
                    cell: r.cell.clone(),
                    algorithm: r.algorithm,
                    trial: t.trial,
                    trace: TraceLog::read_csv(std::io::BufReader::new(f))?,
                });
            }
        }
    }
    if !traces.is_empty() {
        emit_plotdata(&dir.join("plots"), &traces)?;
    }
    Ok(emit_table(&results.records).0)
}

/// The results file as JSON with every timing value nulled.
pub fn strip_timing(results: &ResultsFile) -> Result<serde_json::Value> {
    fn walk(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, val) in map.iter_mut() {
                    if TIMING_KEYS.contains(&k.as_str()) {
                        *val = serde_json::Value::Null;
                    } else {
                        walk(val);
                    }
                }
            }
            serde_json::Value::Array(items) => items.iter_mut().for_each(walk),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(results)?;
    walk(&mut v);
    Ok(v)
}

/// A trace CSV with the time column blanked, for byte comparisons.
pub fn trace_without_timing(csv: &str) -> String {
    csv.lines()
        .map(|l| match l.split_once(',') {
            Some((iter, rest)) if iter != "iter" => match rest.split_once(',') {
                Some((_, tail)) => format!("{iter},,{tail}"),
                None => l.to_string(),
            },
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}
