//! Mean accepted line-search step as a function of solution sparsity.

use std::io::Write;

use crate::data::synthetic::{gen_problem, SynthSpec, TransformKind};
use crate::error::{Error, Result};
use crate::problem::LsProblem;
use crate::sketch::{derive_seed, SketchKind, SketchOperator};
use crate::solvers::{gpis_observed, Observer, SolverConfig, StepEvent, StepPolicy};

use super::stats::{mean, std_dev};

#[derive(Debug, Clone, PartialEq)]
pub struct StepsizeOptions {
    pub n: usize,
    pub d: usize,
    pub kappa: f64,
    pub snr: f64,
    pub sparsities: Vec<usize>,
    pub trials: usize,
    /// Sketch size; `8d` when `None`.
    pub m: Option<usize>,
    pub sketch: SketchKind,
    pub inner: usize,
    pub outer: usize,
    pub seed: u64,
}

impl StepsizeOptions {
    /// Desk-scale defaults: `n = 2000`, `d = 100`, `κ = 10`, 20 trials.
    pub fn desk(sparsities: Vec<usize>) -> Self {
        StepsizeOptions {
            n: 2000,
            d: 100,
            kappa: 10.0,
            snr: 10.0,
            sparsities,
            trials: 20,
            m: None,
            sketch: SketchKind::Count,
            inner: 20,
            outer: 5,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.sparsities.is_empty() {
            return Err(Error::InvalidConfig("need at least one trial and one sparsity".into()));
        }
        Ok(())
    }
}

/// One trial: mean accepted step over all IHS inner iterations, and the mean
/// of `1/‖SᵗA‖²` over the outer loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsizeTrial {
    pub sparsity: usize,
    pub trial: usize,
    pub mean_eta: f64,
    pub baseline_eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsizeRow {
    pub sparsity: usize,
    pub trials: usize,
    pub mean_eta: f64,
    pub std_eta: f64,
    pub baseline_eta: f64,
    /// `mean_eta / baseline_eta`.
    pub ratio: f64,
}

struct StepRecorder<'a> {
    problem: &'a LsProblem,
    kind: SketchKind,
    m: usize,
    seed: u64,
    etas: Vec<f64>,
    baselines: Vec<f64>,
    failure: Option<Error>,
}

impl Observer for StepRecorder<'_> {
    fn inner_step(&mut self, event: &StepEvent<'_>) {
        if event.t >= 1 && event.line_search {
            self.etas.push(event.eta);
        }
    }

    fn override_sketch(&mut self, t: usize) -> Option<SketchOperator> {
        let built = SketchOperator::new(self.kind, self.m, self.problem.rows(), derive_seed(self.seed, t))
            .and_then(|s| {
                if t >= 1 {
                    let sa = s.apply(self.problem.a())?;
                    let top = sa.singular_values().max();
                    self.baselines.push(1.0 / (top * top));
                }
                Ok(s)
            });
        match built {
            Ok(s) => Some(s),
            Err(e) => {
                self.failure.get_or_insert(e);
                None
            }
        }
    }
}

/// Runs GPIS with line search on one generated problem.
pub fn stepsize_trial(spec: &SynthSpec, opts: &StepsizeOptions, trial: usize) -> Result<StepsizeTrial> {
    let (problem, _) = gen_problem(spec)?;
    let m = opts.m.unwrap_or(8 * spec.d);
    let seed = opts.seed.wrapping_add(trial as u64);
    let mut cfg = SolverConfig::new(m);
    cfg.sketch = opts.sketch;
    cfg.outer = opts.outer;
    cfg.inner = opts.inner;
    cfg.step = StepPolicy::line_search();
    cfg.seed = seed;
    let mut rec = StepRecorder {
        problem: &problem,
        kind: opts.sketch,
        m,
        seed,
        etas: Vec::new(),
        baselines: Vec::new(),
        failure: None,
    };
    gpis_observed(&problem, &cfg, None, &mut rec)?;
    if let Some(e) = rec.failure {
        return Err(e);
    }
    match (mean(&rec.etas), mean(&rec.baselines)) {
        (Some(mean_eta), Some(baseline_eta)) => Ok(StepsizeTrial {
            sparsity: spec.sparsity,
            trial,
            mean_eta,
            baseline_eta,
        }),
        _ => Err(Error::Numerical("no line-search steps were recorded".into())),
    }
}

/// Trial `r` at every sparsity uses the same problem seed `seed + r`, so the
/// sweep varies only the support of the ground truth.
pub fn stepsize_sweep(opts: &StepsizeOptions) -> Result<(Vec<StepsizeRow>, Vec<StepsizeTrial>)> {
    opts.validate()?;
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for &s in &opts.sparsities {
        let mut trials = Vec::with_capacity(opts.trials);
        for r in 0..opts.trials {
            let spec = SynthSpec {
                n: opts.n,
                d: opts.d,
                sparsity: s,
                kappa: opts.kappa,
                transform: TransformKind::Identity,
                snr: opts.snr,
                seed: opts.seed.wrapping_add(r as u64),
            };
            trials.push(stepsize_trial(&spec, opts, r)?);
        }
        let etas: Vec<f64> = trials.iter().map(|t| t.mean_eta).collect();
        let bases: Vec<f64> = trials.iter().map(|t| t.baseline_eta).collect();
        let mean_eta = mean(&etas).unwrap_or(f64::NAN);
        let baseline_eta = mean(&bases).unwrap_or(f64::NAN);
        rows.push(StepsizeRow {
            sparsity: s,
            trials: trials.len(),
            mean_eta,
            std_eta: std_dev(&etas).unwrap_or(f64::NAN),
            baseline_eta,
            ratio: mean_eta / baseline_eta,
        });
        all.extend(trials);
    }
    Ok((rows, all))
}

pub fn write_stepsizes_csv<W: Write>(writer: W, rows: &[StepsizeRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["sparsity", "trials", "mean_eta", "std_eta", "baseline_eta", "ratio"])?;
    for r in rows {
        w.write_record([
            r.sparsity.to_string(),
            r.trials.to_string(),
            format!("{:e}", r.mean_eta),
            format!("{:e}", r.std_eta),
            format!("{:e}", r.baseline_eta),
            format!("{:e}", r.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trials_csv<W: Write>(writer: W, trials: &[StepsizeTrial]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["sparsity", "trial", "mean_eta", "baseline_eta"])?;
    for t in trials {
        w.write_record([
            t.sparsity.to_string(),
            t.trial.to_string(),
            format!("{:e}", t.mean_eta),
            format!("{:e}", t.baseline_eta),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(trials: usize) -> StepsizeOptions {
        StepsizeOptions {
            n: 300,
            d: 20,
            kappa: 10.0,
            snr: 10.0,
            sparsities: vec![1, 20],
            trials,
            m: None,
            sketch: SketchKind::Count,
            inner: 10,
            outer: 3,
            seed: 2,
        }
    }

    #[test]
    fn single_trial_has_zero_spread() {
        let (rows, trials) = stepsize_sweep(&tiny(1)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(trials.len(), 2);
        for (r, t) in rows.iter().zip(&trials) {
            assert_eq!(r.std_eta, 0.0);
            assert_eq!(r.mean_eta, t.mean_eta);
            assert!(r.mean_eta > 0.0 && r.baseline_eta > 0.0);
        }
    }

    #[test]
    fn rejects_empty_sweep() {
        let mut o = tiny(1);
        o.sparsities.clear();
        assert!(stepsize_sweep(&o).is_err());
    }
}
