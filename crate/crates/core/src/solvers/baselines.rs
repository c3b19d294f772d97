//! Full-gradient baselines: projected gradient descent and its accelerated
//! (FISTA-type) variant with line search and gradient restart.

use super::gpis::{inner_loop, LoopSpec, StepRule};
use super::subproblem::FullObjective;
use super::trace::{Budgets, EpochEvent, SolveOutput, StopReason, Tracker};
use super::{Observer, StepPolicy};
use crate::error::{Error, Result};
use crate::problem::LsProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub step: StepPolicy,
    pub restart: bool,
    pub max_iters: usize,
    pub budgets: Budgets,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            step: StepPolicy::line_search(),
            restart: true,
            max_iters: 1000,
            budgets: Budgets::default(),
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        self.step.validate()?;
        self.budgets.validate()
    }
}

fn run_full(
    problem: &LsProblem,
    cfg: &BaselineConfig,
    f_star: Option<f64>,
    accelerate: bool,
    observer: &mut dyn Observer,
) -> Result<SolveOutput> {
    cfg.validate()?;
    let mut tracker = Tracker::new(problem, f_star, cfg.budgets)?;
    let x = problem.zero_point();
    tracker.resume();
    if let Some(stop) = tracker.record_start(&x)? {
        return tracker.finish(x, None, stop);
    }
    let mut carried = None;
    let mut rule = StepRule::for_loop(&cfg.step, problem.a(), &mut carried);
    let spec = LoopSpec {
        t: 0,
        iterations: cfg.max_iters,
        accelerate,
        restart: cfg.restart,
        constraint: problem.constraint(),
        gradient_cost: EpochEvent::FullGradient,
        evaluation_cost: EpochEvent::FullEvaluation,
    };
    let f = FullObjective(problem);
    let out = inner_loop(&f, &spec, x, &mut rule, &mut tracker, observer)?;
    tracker.finish(out.x, out.last, out.stop.unwrap_or(StopReason::Completed))
}

/// Projected gradient descent on the full objective.
pub fn pgd(problem: &LsProblem, cfg: &BaselineConfig, f_star: Option<f64>) -> Result<SolveOutput> {
    run_full(problem, cfg, f_star, false, &mut ())
}

pub fn pgd_observed(
    problem: &LsProblem,
    cfg: &BaselineConfig,
    f_star: Option<f64>,
    observer: &mut dyn Observer,
) -> Result<SolveOutput> {
    run_full(problem, cfg, f_star, false, observer)
}

/// Accelerated projected gradient descent on the full objective.
pub fn accelerated_pgd(
    problem: &LsProblem,
    cfg: &BaselineConfig,
    f_star: Option<f64>,
) -> Result<SolveOutput> {
    run_full(problem, cfg, f_star, true, &mut ())
}

pub fn accelerated_pgd_observed(
    problem: &LsProblem,
    cfg: &BaselineConfig,
    f_star: Option<f64>,
    observer: &mut dyn Observer,
) -> Result<SolveOutput> {
    run_full(problem, cfg, f_star, true, observer)
}
