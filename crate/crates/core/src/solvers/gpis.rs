use nalgebra::DMatrix;

use super::line_search::{line_search, LineSearchParams};
use super::subproblem::{spectral_norm_sq, QuadraticObjective, SketchedSubproblem};
use super::trace::{EpochEvent, SolveOutput, StepInfo, StopReason, Tracker};
use super::{
    Observer, SolverConfig, StepEvent, StepPolicy, FIXED_STEP_POWER_TOL, LINE_SEARCH_INIT_ITERS,
};
use crate::error::Result;
use crate::problem::{ConstraintSet, LsProblem, Point};
use crate::projection::project;
use crate::sketch::{derive_seed, SketchOperator};

/// `τ_i = (1 + √(1 + 4τ²_{i−1}))/2`.
pub fn next_tau(tau: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * tau * tau).sqrt())
}

/// Gradient restart test: momentum is reset when `⟨∇f(z_i), x_{i+1} − x_i⟩ > 0`.
pub fn gradient_restart(grad_at_z: &Point, x_next: &Point, x_curr: &Point) -> bool {
    grad_at_z.dot(&(x_next - x_curr)) > 0.0
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum StepRule {
    Fixed(f64),
    Search { params: LineSearchParams, eta_prev: f64 },
}

impl StepRule {
    /// Builds the rule for one inner loop on a quadratic whose Hessian is
    /// `BᵀB` for `b = hessian_factor`. `carried` holds the last accepted
    /// line-search step across loops.
    pub(crate) fn for_loop(
        policy: &StepPolicy,
        hessian_factor: &DMatrix<f64>,
        carried: &mut Option<f64>,
    ) -> StepRule {
        let reciprocal = |l: f64| if l > 0.0 { 1.0 / l } else { 1.0 };
        match *policy {
            StepPolicy::Fixed { eta: Some(eta) } => StepRule::Fixed(eta),
            StepPolicy::Fixed { eta: None } => {
                let l = spectral_norm_sq(hessian_factor, FIXED_STEP_POWER_TOL, 10_000);
                // power iteration approaches from below
                StepRule::Fixed(reciprocal(l * (1.0 + FIXED_STEP_POWER_TOL)))
            }
            StepPolicy::LineSearch {
                gamma_u,
                gamma_d,
                initial,
            } => {
                let eta_prev = *carried.get_or_insert_with(|| {
                    initial.unwrap_or_else(|| {
                        reciprocal(spectral_norm_sq(hessian_factor, 0.0, LINE_SEARCH_INIT_ITERS))
                    })
                });
                StepRule::Search {
                    params: LineSearchParams {
                        shrink: gamma_u,
                        grow: gamma_d,
                    },
                    eta_prev,
                }
            }
        }
    }

    pub(crate) fn carried(&self) -> Option<f64> {
        match self {
            StepRule::Fixed(_) => None,
            StepRule::Search { eta_prev, .. } => Some(*eta_prev),
        }
    }
}

pub(crate) struct LoopSpec<'c> {
    pub t: usize,
    pub iterations: usize,
    pub accelerate: bool,
    pub restart: bool,
    pub constraint: &'c ConstraintSet,
    pub gradient_cost: EpochEvent,
    pub evaluation_cost: EpochEvent,
}

pub(crate) struct LoopResult {
    pub x: Point,
    pub stop: Option<StopReason>,
    pub last: Option<StepInfo>,
}

/// Projected-gradient inner loop, optionally with Nesterov extrapolation and
/// gradient restart. Momentum starts fresh (`τ₀ = 1`) on every call.
pub(crate) fn inner_loop<F: QuadraticObjective>(
    f: &F,
    spec: &LoopSpec<'_>,
    start: Point,
    rule: &mut StepRule,
    tracker: &mut Tracker<'_>,
    observer: &mut dyn Observer,
) -> Result<LoopResult> {
    let mut x = start;
    let mut z = x.clone();
    let mut tau = 1.0;
    let mut last = None;
    for i in 1..=spec.iterations {
        let from = if spec.accelerate { &z } else { &x };
        let grad = f.gradient(from);
        tracker.charge(spec.gradient_cost);
        let (x_next, eta, evals) = match rule {
            StepRule::Fixed(eta) => {
                let trial = from - &grad * *eta;
                (project(spec.constraint, &trial)?.point, *eta, 0)
            }
            StepRule::Search { params, eta_prev } => {
                let out = line_search(f, spec.constraint, from, &grad, *eta_prev, *params)?;
                *eta_prev = out.eta;
                // the first trial evaluation shares the gradient's pass
                tracker.charge_n(spec.evaluation_cost, out.evals.saturating_sub(1));
                (out.x_next, out.eta, out.evals)
            }
        };

        let mut restarted = false;
        let z_next = if spec.accelerate {
            if spec.restart && gradient_restart(&grad, &x_next, &x) {
                restarted = true;
                tau = 1.0;
                x_next.clone()
            } else {
                let tau_next = next_tau(tau);
                let beta = (tau - 1.0) / tau_next;
                tau = tau_next;
                &x_next + (&x_next - &x) * beta
            }
        } else {
            x_next.clone()
        };

        tracker.pause();
        observer.inner_step(&StepEvent {
            t: spec.t,
            i,
            objective: f,
            from,
            grad: &grad,
            next: &x_next,
            eta,
            evals,
            line_search: matches!(rule, StepRule::Search { .. }),
            restarted,
        });
        tracker.resume();

        x = x_next;
        z = z_next;
        let info = StepInfo {
            t: spec.t,
            i,
            step: eta,
            restarted,
            func_evals: evals,
        };
        if let Some(stop) = tracker.step(&x, info.clone())? {
            return Ok(LoopResult {
                x,
                stop: Some(stop),
                last: Some(info),
            });
        }
        last = Some(info);
    }
    Ok(LoopResult { x, stop: None, last })
}

fn run_sketched(
    problem: &LsProblem,
    cfg: &SolverConfig,
    f_star: Option<f64>,
    accelerate: bool,
    observer: &mut dyn Observer,
) -> Result<SolveOutput> {
    cfg.validate()?;
    let n = problem.rows();
    let constraint = problem.constraint();
    let mut tracker = Tracker::new(problem, f_star, cfg.budgets)?;
    let mut x = problem.zero_point();
    tracker.resume();
    if let Some(stop) = tracker.record_start(&x)? {
        return tracker.finish(x, None, stop);
    }

    let mut carried = match cfg.step {
        StepPolicy::LineSearch { initial, .. } => initial,
        StepPolicy::Fixed { .. } => None,
    };
    let sketched = |m| {
        (
            EpochEvent::SketchedGradient { m },
            EpochEvent::SketchedEvaluation { m },
        )
    };
    let mut last = None;

    if cfg.run_gpcs {
        let sketch = match observer.override_sketch(0) {
            Some(s) => s,
            None => SketchOperator::new(cfg.sketch, cfg.m, n, derive_seed(cfg.seed, 0))?,
        };
        let sp = SketchedSubproblem::classical(problem, &sketch)?;
        tracker.charge(EpochEvent::SketchBuild);
        let mut rule = StepRule::for_loop(&cfg.step, sp.sketched_matrix(), &mut carried);
        let (gradient_cost, evaluation_cost) = sketched(cfg.m);
        let spec = LoopSpec {
            t: 0,
            iterations: cfg.k0,
            accelerate,
            restart: cfg.restart,
            constraint,
            gradient_cost,
            evaluation_cost,
        };
        let out = inner_loop(&sp, &spec, x, &mut rule, &mut tracker, observer)?;
        carried = rule.carried().or(carried);
        x = out.x;
        last = out.last.or(last);
        if let Some(stop) = out.stop {
            return tracker.finish(x, last, stop);
        }
    }

    for t in 1..=cfg.outer {
        tracker.pause();
        observer.outer_start(t, &x);
        tracker.resume();
        let g = problem.gradient(&x)?;
        tracker.charge(EpochEvent::FullGradient);
        let sketch = match observer.override_sketch(t) {
            Some(s) => s,
            None => SketchOperator::new(cfg.sketch, cfg.m, n, derive_seed(cfg.seed, t))?,
        };
        let sp = SketchedSubproblem::hessian(problem, &sketch, x.clone(), g)?;
        tracker.charge(EpochEvent::SketchBuild);
        let mut rule = StepRule::for_loop(&cfg.step, sp.sketched_matrix(), &mut carried);
        let (gradient_cost, evaluation_cost) = sketched(cfg.m);
        let spec = LoopSpec {
            t,
            iterations: cfg.inner,
            accelerate,
            restart: cfg.restart,
            constraint,
            gradient_cost,
            evaluation_cost,
        };
        let out = inner_loop(&sp, &spec, x, &mut rule, &mut tracker, observer)?;
        carried = rule.carried().or(carried);
        x = out.x;
        last = out.last.or(last);
        if let Some(stop) = out.stop {
            return tracker.finish(x, last, stop);
        }
    }
    tracker.finish(x, last, StopReason::Completed)
}

/// Gradient Projection Iterative Sketch. `f_star`, when known, enables
/// relative-error tracking and the convergence stop.
pub fn gpis(problem: &LsProblem, cfg: &SolverConfig, f_star: Option<f64>) -> Result<SolveOutput> {
    run_sketched(problem, cfg, f_star, false, &mut ())
}

pub fn gpis_observed(
    problem: &LsProblem,
    cfg: &SolverConfig,
    f_star: Option<f64>,
    observer: &mut dyn Observer,
) -> Result<SolveOutput> {
    run_sketched(problem, cfg, f_star, false, observer)
}

/// Accelerated GPIS: Nesterov extrapolation inside each inner loop, with
/// optional gradient restart.
pub fn acc_gpis(problem: &LsProblem, cfg: &SolverConfig, f_star: Option<f64>) -> Result<SolveOutput> {
    run_sketched(problem, cfg, f_star, true, &mut ())
}

pub fn acc_gpis_observed(
    problem: &LsProblem,
    cfg: &SolverConfig,
    f_star: Option<f64>,
    observer: &mut dyn Observer,
) -> Result<SolveOutput> {
    run_sketched(problem, cfg, f_star, true, observer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::SketchKind;
    use crate::solvers::Observer;

    #[test]
    fn tau_sequence() {
        let t1 = next_tau(1.0);
        assert!((t1 - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        let t2 = next_tau(t1);
        assert!((t2 - 2.1935271).abs() < 1e-6);
    }

    #[test]
    fn restart_test_sign() {
        let x = Point::from_column_slice(2, 1, &[0.0, 0.0]);
        let x_next = Point::from_column_slice(2, 1, &[1.0, 0.0]);
        let orth = Point::from_column_slice(2, 1, &[0.0, 3.0]);
        assert!(!gradient_restart(&orth, &x_next, &x));
        assert!(gradient_restart(&(&x_next - &x), &x_next, &x));
    }

    #[test]
    fn momentum_vanishes_when_iterate_is_unchanged() {
        let x = Point::from_column_slice(2, 1, &[1.0, 2.0]);
        let beta = (next_tau(next_tau(1.0)) - 1.0) / next_tau(next_tau(next_tau(1.0)));
        let z = &x + (&x - &x) * beta;
        assert_eq!(z, x);
    }

    #[test]
    fn identity_problem_with_exact_sketch() {
        let d = 6;
        let y = DMatrix::from_fn(d, 1, |i, _| (i as f64 + 1.0) * 0.5 - 1.0);
        let p = LsProblem::new(DMatrix::identity(d, d), y.clone(), ConstraintSet::Unconstrained).unwrap();
        let mut cfg = SolverConfig::new(d);
        cfg.sketch = SketchKind::Count;
        cfg.outer = 1;
        cfg.inner = 60;
        cfg.step = StepPolicy::fixed();

        struct Permutation(usize);
        impl Observer for Permutation {
            fn override_sketch(&mut self, _t: usize) -> Option<SketchOperator> {
                let buckets = (0..self.0).map(|i| (i + 1) % self.0).collect();
                SketchOperator::count_from_parts(self.0, buckets, vec![1.0; self.0]).ok()
            }
        }
        let out = gpis_observed(&p, &cfg, None, &mut Permutation(d)).unwrap();
        assert!((&out.x - &y).amax() < 1e-12, "{}", (&out.x - &y).amax());
        assert_eq!(out.stop, StopReason::Completed);
    }
}
