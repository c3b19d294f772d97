//! Benchmark harness: run configurations, solver comparisons, the
//! bound sweep and the step-size experiment. The `sketchls` binary is a thin
//! front end over this module.

pub mod bounds;
pub mod config;
pub mod runner;
pub mod stats;
pub mod stepsizes;

pub use bounds::{bounds_sweep, parse_m_list, write_bounds_csv, BoundsOptions};
pub use config::{Preset, ProblemSource, RunConfig, SolverSpec, CONFIG_VERSION, SOLVER_NAMES};
pub use runner::{bench, render_table, run_solver, write_run, BenchReport, RunSummary, SolverSummary};
pub use stats::{mann_whitney_greater, median, RankTest};
pub use stepsizes::{stepsize_sweep, write_stepsizes_csv, StepsizeOptions, StepsizeRow};
