//! Minibatch SAGA baseline.
//!
//! Rows are split into `J = ⌈n/b⌉` contiguous batches. Batch `j` carries the
//! unbiased gradient estimate `ĝ_j(x) = J·A_jᵀ(A_j x − y_j)`, and the step is
//! `1/(3L̂)` with `L̂ = mean_j J·σ_max(A_j)²`, the Lipschitz constant of `ĝ_j`
//! averaged over batches.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::trace::{Budgets, EpochEvent, SolveOutput, StepInfo, StopReason, Tracker};
use crate::error::{Error, Result};
use crate::problem::{gram_extremes, LsProblem, Point};
use crate::projection::project;

#[derive(Debug, Clone, PartialEq)]
pub struct SagaConfig {
    pub batch: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub budgets: Budgets,
}

impl SagaConfig {
    pub fn new(batch: usize) -> Self {
        SagaConfig {
            batch,
            seed: 0,
            max_iters: usize::MAX,
            budgets: Budgets::default(),
        }
    }
}

/// Table of stored batch gradients and their running average.
#[derive(Debug, Clone)]
pub struct SagaTable {
    ranges: Vec<(usize, usize)>,
    stored: Vec<Point>,
    average: Point,
    updates: usize,
}

impl SagaTable {
    /// Splits the rows into batches and fills the table at `x`.
    pub fn new(problem: &LsProblem, batch: usize, x: &Point) -> Result<Self> {
        let n = problem.rows();
        if batch == 0 || batch > n {
            return Err(Error::InvalidConfig(format!(
                "batch size {batch} must lie in 1..={n}"
            )));
        }
        let ranges: Vec<(usize, usize)> = (0..n)
            .step_by(batch)
            .map(|start| (start, (start + batch).min(n)))
            .collect();
        let mut table = SagaTable {
            stored: Vec::with_capacity(ranges.len()),
            average: Point::zeros(x.nrows(), x.ncols()),
            ranges,
            updates: 0,
        };
        for j in 0..table.batches() {
            let g = table.batch_gradient(problem, j, x);
            table.stored.push(g);
        }
        table.resync();
        Ok(table)
    }

    pub fn batches(&self) -> usize {
        self.ranges.len()
    }

    pub fn batch_rows(&self, j: usize) -> usize {
        self.ranges[j].1 - self.ranges[j].0
    }

    /// `ĝ_j(x) = J·A_jᵀ(A_j x − y_j)`.
    pub fn batch_gradient(&self, problem: &LsProblem, j: usize, x: &Point) -> Point {
        let (start, end) = self.ranges[j];
        let rows = end - start;
        let a = problem.a().rows(start, rows);
        let y = problem.y().rows(start, rows);
        let r = a * x - y;
        let mut g = a.tr_mul(&r);
        let scale = self.batches() as f64;
        if scale != 1.0 {
            g *= scale;
        }
        g
    }

    /// `mean_j J·σ_max(A_j)²`.
    pub fn lipschitz_estimate(&self, problem: &LsProblem) -> Result<f64> {
        let scale = self.batches() as f64;
        let mut total = 0.0;
        for &(start, end) in &self.ranges {
            let a = problem.a().rows(start, end - start);
            // eigenvalues of the smaller Gram matrix
            let gram: DMatrix<f64> = if a.nrows() < a.ncols() {
                a * a.transpose()
            } else {
                a.tr_mul(&a)
            };
            total += scale * gram_extremes(gram, 1e-12)?.l;
        }
        Ok(total / scale)
    }

    pub fn stored(&self, j: usize) -> &Point {
        &self.stored[j]
    }

    pub fn average(&self) -> &Point {
        &self.average
    }

    /// Average of the stored gradients recomputed from scratch.
    pub fn recomputed_average(&self) -> Point {
        let mut sum = Point::zeros(self.average.nrows(), self.average.ncols());
        for g in &self.stored {
            sum += g;
        }
        sum / self.batches() as f64
    }

    fn resync(&mut self) {
        self.average = self.recomputed_average();
    }

    /// Replaces entry `j` with `g_new`. The average is updated incrementally
    /// and recomputed exactly once every `J` refreshes.
    pub fn refresh(&mut self, j: usize, g_new: Point) {
        let scale = 1.0 / self.batches() as f64;
        let diff = &g_new - &self.stored[j];
        self.average += diff * scale;
        self.stored[j] = g_new;
        self.updates += 1;
        if self.updates.is_multiple_of(self.batches()) {
            self.resync();
        }
    }
}

/// Minibatch SAGA with projection after every step. Estimating `L̂` and
/// filling the initial table are excluded from the wall clock; the initial
/// table costs one epoch.
pub fn saga_minibatch(
    problem: &LsProblem,
    cfg: &SagaConfig,
    f_star: Option<f64>,
) -> Result<SolveOutput> {
    if cfg.max_iters == 0 {
        return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
    }
    let mut tracker = Tracker::new(problem, f_star, cfg.budgets)?;
    let mut x = problem.zero_point();
    let mut table = SagaTable::new(problem, cfg.batch, &x)?;
    let l_hat = table.lipschitz_estimate(problem)?;
    let eta = if l_hat > 0.0 { 1.0 / (3.0 * l_hat) } else { 1.0 };
    tracker.charge(EpochEvent::FullGradient);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let constraint = problem.constraint();

    tracker.resume();
    if let Some(stop) = tracker.record_start(&x)? {
        return tracker.finish(x, None, stop);
    }
    let mut last = None;
    let mut iter = 0usize;
    while iter < cfg.max_iters {
        iter += 1;
        let j = if table.batches() == 1 {
            0
        } else {
            rng.random_range(0..table.batches())
        };
        let g_new = table.batch_gradient(problem, j, &x);
        let dir = &g_new + (table.average() - table.stored(j));
        x = project(constraint, &(&x - dir * eta))?.point;
        table.refresh(j, g_new);
        tracker.charge(EpochEvent::SagaStep {
            batch: table.batch_rows(j),
        });
        let info = StepInfo {
            t: 0,
            i: iter,
            step: eta,
            restarted: false,
            func_evals: 0,
        };
        if let Some(stop) = tracker.step(&x, info.clone())? {
            return tracker.finish(x, Some(info), stop);
        }
        last = Some(info);
    }
    tracker.finish(x, last, StopReason::Completed)
}
