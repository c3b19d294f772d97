//! Sketched solvers (GPIS and its accelerated variant) and the
//! full-gradient and stochastic baselines. All of them emit the same
//! [`IterateTrace`] so runs can be compared by epochs or wall-clock time.

mod baselines;
mod gpis;
pub mod line_search;
mod saga;
pub mod subproblem;
pub mod trace;

use serde::{Deserialize, Serialize};

pub use baselines::{accelerated_pgd, accelerated_pgd_observed, pgd, pgd_observed, BaselineConfig};
pub use gpis::{acc_gpis, acc_gpis_observed, gpis, gpis_observed, gradient_restart, next_tau};
pub use line_search::{line_search, LineSearchOutcome, LineSearchParams};
pub use saga::{saga_minibatch, SagaConfig, SagaTable};
pub use subproblem::{FullObjective, Phase, QuadraticObjective, SketchedSubproblem};
pub use trace::{
    epoch_cost, Budgets, EpochEvent, IterateTrace, SolveOutput, StopReason, TraceRecord,
    TRACE_HEADER,
};

use crate::error::{Error, Result};
use crate::problem::Point;
use crate::sketch::{SketchKind, SketchOperator};

/// Power-iteration tolerance for the fixed step `1/‖SA‖²`.
pub const FIXED_STEP_POWER_TOL: f64 = 1e-4;
/// Power iterations used to seed the first line-search step.
pub const LINE_SEARCH_INIT_ITERS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum StepPolicy {
    /// Constant step. `None` means the reciprocal Lipschitz constant of each
    /// (sub)problem, `1/‖SᵗA‖²` for the sketched solvers.
    Fixed { eta: Option<f64> },
    /// Backtracking on the composite gradient map. `initial: None` seeds the
    /// first step from a short power iteration.
    LineSearch {
        gamma_u: f64,
        gamma_d: f64,
        initial: Option<f64>,
    },
}

impl StepPolicy {
    pub fn line_search() -> Self {
        StepPolicy::LineSearch {
            gamma_u: 2.0,
            gamma_d: 2.0,
            initial: None,
        }
    }

    pub fn fixed() -> Self {
        StepPolicy::Fixed { eta: None }
    }

    pub fn is_line_search(&self) -> bool {
        matches!(self, StepPolicy::LineSearch { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepPolicy::Fixed { eta: Some(eta) } if !(eta > 0.0) || !eta.is_finite() => {
                Err(Error::InvalidConfig(format!("fixed step {eta} must be positive")))
            }
            StepPolicy::Fixed { .. } => Ok(()),
            StepPolicy::LineSearch {
                gamma_u,
                gamma_d,
                initial,
            } => {
                LineSearchParams {
                    shrink: gamma_u,
                    grow: gamma_d,
                }
                .validate()?;
                match initial {
                    Some(eta) if !(eta > 0.0) || !eta.is_finite() => Err(Error::InvalidConfig(
                        format!("initial step {eta} must be positive"),
                    )),
                    _ => Ok(()),
                }
            }
        }
    }
}

/// Configuration of GPIS / Acc-GPIS.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub sketch: SketchKind,
    /// Sketch size `m`.
    pub m: usize,
    /// Run the classical-sketch warm start.
    pub run_gpcs: bool,
    /// Inner iterations of the warm start.
    pub k0: usize,
    /// Outer loops `N`.
    pub outer: usize,
    /// Inner iterations per outer loop `k`.
    pub inner: usize,
    pub step: StepPolicy,
    /// Gradient restart (accelerated variant only).
    pub restart: bool,
    pub seed: u64,
    pub budgets: Budgets,
}

impl SolverConfig {
    pub fn new(m: usize) -> Self {
        SolverConfig {
            sketch: SketchKind::Count,
            m,
            run_gpcs: false,
            k0: 0,
            outer: 20,
            inner: 20,
            step: StepPolicy::line_search(),
            restart: true,
            seed: 0,
            budgets: Budgets::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidConfig("sketch size m must be at least 1".into()));
        }
        if self.outer == 0 || self.inner == 0 {
            return Err(Error::InvalidConfig("outer and inner counts must be at least 1".into()));
        }
        if self.run_gpcs && self.k0 == 0 {
            return Err(Error::InvalidConfig("GPCS phase needs k0 >= 1".into()));
        }
        self.step.validate()?;
        self.budgets.validate()
    }
}

/// One accepted inner step, passed to an [`Observer`].
pub struct StepEvent<'a> {
    pub t: usize,
    pub i: usize,
    /// Objective minimized by this inner loop.
    pub objective: &'a dyn QuadraticObjective,
    /// Point at which the gradient was taken (`z` for accelerated methods).
    pub from: &'a Point,
    pub grad: &'a Point,
    pub next: &'a Point,
    pub eta: f64,
    pub evals: usize,
    pub line_search: bool,
    pub restarted: bool,
}

/// Hooks into a running solver, used for diagnostics and invariant checks.
pub trait Observer {
    fn inner_step(&mut self, _event: &StepEvent<'_>) {}
    /// Called at the start of outer loop `t ≥ 1` with its anchor `x₀ᵗ`.
    fn outer_start(&mut self, _t: usize, _anchor: &Point) {}
    /// Replaces the random sketch of loop `t` (`t = 0` is the warm start).
    fn override_sketch(&mut self, _t: usize) -> Option<SketchOperator> {
        None
    }
}

impl Observer for () {}
