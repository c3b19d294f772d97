//! Executing solver entries and summarizing their traces.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{f_star, Resolved, RunConfig, SolverSpec};
use super::stats::median;
use crate::data::Bundle;
use crate::error::{Error, Result};
use crate::problem::{is_exact_recovery, LsProblem};
use crate::solvers::{
    acc_gpis, accelerated_pgd, gpis, pgd, saga_minibatch, Budgets, SolveOutput, StopReason,
};

/// Per-run summary written next to each trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub solver: String,
    pub seed: u64,
    pub final_rel_error: Option<f64>,
    #[serde(rename = "epochs_to_1e-6")]
    pub epochs_to_1e_6: Option<f64>,
    #[serde(rename = "epochs_to_1e-10")]
    pub epochs_to_1e_10: Option<f64>,
    #[serde(rename = "wall_to_1e-6")]
    pub wall_to_1e_6: Option<f64>,
    pub exact_recovery: bool,
    pub stop: Option<StopReason>,
    pub truncated: bool,
    pub epochs: f64,
    pub wall_seconds: f64,
    /// Error message when the solver aborted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl RunSummary {
    pub fn from_output(solver: &str, seed: u64, out: &SolveOutput) -> Self {
        let trace = &out.trace;
        let final_rel_error = trace.final_rel_error();
        let last = trace.last();
        RunSummary {
            solver: solver.to_string(),
            seed,
            final_rel_error,
            epochs_to_1e_6: trace.epochs_to(1e-6),
            epochs_to_1e_10: trace.epochs_to(1e-10),
            wall_to_1e_6: trace.wall_to(1e-6),
            exact_recovery: final_rel_error.is_some_and(is_exact_recovery),
            stop: Some(out.stop),
            truncated: out.truncated,
            epochs: last.map_or(0.0, |r| r.epochs),
            wall_seconds: last.map_or(0.0, |r| r.wall_seconds),
            failure: None,
        }
    }

    fn failed(solver: &str, seed: u64, err: &Error) -> Self {
        RunSummary {
            solver: solver.to_string(),
            seed,
            final_rel_error: None,
            epochs_to_1e_6: None,
            epochs_to_1e_10: None,
            wall_to_1e_6: None,
            exact_recovery: false,
            stop: None,
            truncated: false,
            epochs: 0.0,
            wall_seconds: 0.0,
            failure: Some(err.to_string()),
        }
    }

    /// A run stalls when it aborted or never reached relative error 1e-6.
    pub fn stalled(&self) -> bool {
        self.failure.is_some() || self.epochs_to_1e_6.is_none()
    }
}

/// Runs one solver entry. Wall-clock time covers solver compute only.
pub fn run_solver(
    problem: &LsProblem,
    f_star: Option<f64>,
    spec: &SolverSpec,
    seed: u64,
    budgets: Budgets,
) -> Result<SolveOutput> {
    match spec.resolve(problem, seed, budgets)? {
        Resolved::Sketched { accelerate: true, cfg } => acc_gpis(problem, &cfg, f_star),
        Resolved::Sketched { accelerate: false, cfg } => gpis(problem, &cfg, f_star),
        Resolved::Full { accelerate: true, cfg } => accelerated_pgd(problem, &cfg, f_star),
        Resolved::Full { accelerate: false, cfg } => pgd(problem, &cfg, f_star),
        Resolved::Saga(cfg) => saga_minibatch(problem, &cfg, f_star),
    }
}

/// Writes the trace CSV and summary JSON of a finished run.
pub fn write_run(out: &SolveOutput, summary: &RunSummary, trace_path: &Path, summary_path: &Path) -> Result<()> {
    out.trace.write_csv(BufWriter::new(File::create(trace_path)?))?;
    fs::write(summary_path, serde_json::to_vec_pretty(summary)?)?;
    Ok(())
}

/// Median-summary row for one solver across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSummary {
    pub solver: String,
    pub runs: usize,
    pub stalls: usize,
    pub exact_recoveries: usize,
    pub median_final_rel_error: Option<f64>,
    #[serde(rename = "median_epochs_to_1e-6")]
    pub median_epochs_to_1e_6: Option<f64>,
    #[serde(rename = "median_epochs_to_1e-10")]
    pub median_epochs_to_1e_10: Option<f64>,
    #[serde(rename = "median_wall_to_1e-6")]
    pub median_wall_to_1e_6: Option<f64>,
}

/// Median over runs, counting a run that never got there as +∞.
fn median_reached(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.map(|x| x.unwrap_or(f64::INFINITY)).collect();
    median(&v).filter(|m| m.is_finite())
}

pub fn summarize(solver: &str, runs: &[RunSummary]) -> SolverSummary {
    SolverSummary {
        solver: solver.to_string(),
        runs: runs.len(),
        stalls: runs.iter().filter(|r| r.stalled()).count(),
        exact_recoveries: runs.iter().filter(|r| r.exact_recovery).count(),
        median_final_rel_error: median_reached(runs.iter().map(|r| r.final_rel_error)),
        median_epochs_to_1e_6: median_reached(runs.iter().map(|r| r.epochs_to_1e_6)),
        median_epochs_to_1e_10: median_reached(runs.iter().map(|r| r.epochs_to_1e_10)),
        median_wall_to_1e_6: median_reached(runs.iter().map(|r| r.wall_to_1e_6)),
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub runs: Vec<RunSummary>,
    pub summaries: Vec<SolverSummary>,
    pub output: PathBuf,
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

/// Runs every solver entry for every seed on `jobs` worker threads.
///
/// Writes `traces/<solver>_seed<s>.csv` and `.json` per run, the long-format
/// `long.csv` (`solver,seed,epochs,wall_seconds,rel_error`), `summary.csv`
/// and `summary.json`. Failed runs are recorded, not propagated.
pub fn bench(cfg: &RunConfig, bundle: &Bundle, output: &Path, jobs: usize) -> Result<BenchReport> {
    cfg.validate()?;
    let traces = output.join("traces");
    fs::create_dir_all(&traces)?;
    let problem = &bundle.problem;
    let fs_ = f_star(bundle);
    let budgets = cfg.budgets.budgets();
    for spec in &cfg.solvers {
        for seed in cfg.seeds() {
            spec.resolve(problem, seed, budgets)?;
        }
    }
    let tasks: Vec<(usize, u64)> = (0..cfg.solvers.len())
        .flat_map(|s| cfg.seeds().map(move |seed| (s, seed)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let results: Vec<Result<(RunSummary, Option<SolveOutput>)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(s, seed)| {
                let spec = &cfg.solvers[s];
                let name = spec.name();
                let stem = traces.join(format!("{}_seed{seed}", file_stem(&name)));
                match run_solver(problem, fs_, spec, seed, budgets) {
                    Ok(out) => {
                        let summary = RunSummary::from_output(&name, seed, &out);
                        write_run(&out, &summary, &stem.with_extension("csv"), &stem.with_extension("json"))?;
                        Ok((summary, Some(out)))
                    }
                    Err(err) => {
                        let summary = RunSummary::failed(&name, seed, &err);
                        fs::write(stem.with_extension("json"), serde_json::to_vec_pretty(&summary)?)?;
                        Ok((summary, None))
                    }
                }
            })
            .collect()
    });

    let mut long = csv::Writer::from_path(output.join("long.csv"))?;
    long.write_record(["solver", "seed", "epochs", "wall_seconds", "rel_error"])?;
    let mut runs = Vec::with_capacity(results.len());
    for r in results {
        let (summary, out) = r?;
        if let Some(out) = out {
            for rec in &out.trace.records {
                long.write_record([
                    summary.solver.clone(),
                    summary.seed.to_string(),
                    format!("{:e}", rec.epochs),
                    format!("{:e}", rec.wall_seconds),
                    format!("{:e}", rec.rel_error),
                ])?;
            }
        }
        runs.push(summary);
    }
    long.flush()?;

    let summaries: Vec<SolverSummary> = cfg
        .solvers
        .iter()
        .map(|spec| {
            let name = spec.name();
            let mine: Vec<RunSummary> = runs.iter().filter(|r| r.solver == name).cloned().collect();
            summarize(&name, &mine)
        })
        .collect();
    let mut table = csv::Writer::from_path(output.join("summary.csv"))?;
    table.write_record([
        "solver",
        "runs",
        "stalls",
        "exact_recoveries",
        "median_final_rel_error",
        "median_epochs_to_1e-6",
        "median_epochs_to_1e-10",
        "median_wall_to_1e-6",
    ])?;
    for s in &summaries {
        table.write_record([
            s.solver.clone(),
            s.runs.to_string(),
            s.stalls.to_string(),
            s.exact_recoveries.to_string(),
            opt(s.median_final_rel_error),
            opt(s.median_epochs_to_1e_6),
            opt(s.median_epochs_to_1e_10),
            opt(s.median_wall_to_1e_6),
        ])?;
    }
    table.flush()?;
    let mut json = BufWriter::new(File::create(output.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut json, &summaries)?;
    json.flush()?;
    Ok(BenchReport {
        runs,
        summaries,
        output: output.to_path_buf(),
    })
}

/// Fixed-width rendering of the median table.
pub fn render_table(summaries: &[SolverSummary]) -> String {
    let mut out = format!(
        "{:<14} {:>4} {:>6} {:>6} {:>12} {:>12} {:>12} {:>12}\n",
        "solver", "runs", "stalls", "exact", "final_err", "ep_to_1e-6", "ep_to_1e-10", "wall_1e-6"
    );
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
    for s in summaries {
        out.push_str(&format!(
            "{:<14} {:>4} {:>6} {:>6} {:>12} {:>12} {:>12} {:>12}\n",
            s.solver,
            s.runs,
            s.stalls,
            s.exact_recoveries,
            cell(s.median_final_rel_error),
            cell(s.median_epochs_to_1e_6),
            cell(s.median_epochs_to_1e_10),
            cell(s.median_wall_to_1e_6),
        ));
    }
    out
}
