//! Per-iteration records, epoch accounting and the run bookkeeping shared
//! by every solver.

use std::io::{Read, Write};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{relative_error_from_values, LsProblem, Point};

/// Exact header of the trace CSV.
pub const TRACE_HEADER: [&str; 9] = [
    "t",
    "i",
    "epochs",
    "wall_seconds",
    "objective",
    "rel_error",
    "step",
    "restarted",
    "func_evals",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub i: usize,
    pub epochs: f64,
    pub wall_seconds: f64,
    pub objective: f64,
    /// `NaN` when no oracle value was supplied.
    pub rel_error: f64,
    pub step: f64,
    pub restarted: bool,
    pub func_evals: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterateTrace {
    pub records: Vec<TraceRecord>,
}

impl IterateTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn final_rel_error(&self) -> Option<f64> {
        self.records.last().map(|r| r.rel_error).filter(|v| !v.is_nan())
    }

    fn first_below(&self, threshold: f64) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.rel_error < threshold)
    }

    /// Epochs spent when the relative error first dropped below `threshold`.
    pub fn epochs_to(&self, threshold: f64) -> Option<f64> {
        self.first_below(threshold).map(|r| r.epochs)
    }

    /// Wall-clock seconds when the relative error first dropped below `threshold`.
    pub fn wall_to(&self, threshold: f64) -> Option<f64> {
        self.first_below(threshold).map(|r| r.wall_seconds)
    }

    pub fn total_restarts(&self) -> usize {
        self.records.iter().filter(|r| r.restarted).count()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TRACE_HEADER)?;
        for r in &self.records {
            w.write_record(&[
                r.t.to_string(),
                r.i.to_string(),
                fmt_float(r.epochs),
                fmt_float(r.wall_seconds),
                fmt_float(r.objective),
                fmt_float(r.rel_error),
                fmt_float(r.step),
                (r.restarted as u8).to_string(),
                r.func_evals.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.iter().ne(TRACE_HEADER.iter().copied()) {
            return Err(Error::Parse {
                row: 0,
                column: 0,
                message: format!("unexpected trace header {:?}", header),
            });
        }
        let mut records = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |col: usize| -> Result<&str> {
                rec.get(col).ok_or(Error::Parse {
                    row: row + 1,
                    column: col,
                    message: "missing field".into(),
                })
            };
            let num = |col: usize| -> Result<f64> {
                field(col)?.parse::<f64>().map_err(|e| Error::Parse {
                    row: row + 1,
                    column: col,
                    message: e.to_string(),
                })
            };
            let int = |col: usize| -> Result<usize> {
                field(col)?.parse::<usize>().map_err(|e| Error::Parse {
                    row: row + 1,
                    column: col,
                    message: e.to_string(),
                })
            };
            records.push(TraceRecord {
                t: int(0)?,
                i: int(1)?,
                epochs: num(2)?,
                wall_seconds: num(3)?,
                objective: num(4)?,
                rel_error: num(5)?,
                step: num(6)?,
                restarted: int(7)? != 0,
                func_evals: int(8)?,
            });
        }
        Ok(IterateTrace { records })
    }
}

/// Shortest representation that parses back to the same `f64`.
fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:e}")
    }
}

/// Data-access events charged against the epoch budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpochEvent {
    FullGradient,
    FullEvaluation,
    /// Forming `SA` (one pass over the rows).
    SketchBuild,
    SketchedGradient { m: usize },
    SketchedEvaluation { m: usize },
    SagaStep { batch: usize },
    Projection,
}

/// Epoch cost of `event` on a problem with `n` rows.
pub fn epoch_cost(event: EpochEvent, n: usize) -> f64 {
    let n = n as f64;
    match event {
        EpochEvent::FullGradient | EpochEvent::FullEvaluation | EpochEvent::SketchBuild => 1.0,
        EpochEvent::SketchedGradient { m } | EpochEvent::SketchedEvaluation { m } => m as f64 / n,
        EpochEvent::SagaStep { batch } => batch as f64 / n,
        EpochEvent::Projection => 0.0,
    }
}

/// Stopping caps. The run ends at whichever triggers first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    pub max_epochs: f64,
    pub max_seconds: f64,
    /// Stop once the relative error falls below this (needs an oracle value).
    pub target_rel_error: f64,
    /// Record every `record_every`-th iteration (the last state is always recorded).
    pub record_every: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_epochs: f64::INFINITY,
            max_seconds: f64::INFINITY,
            target_rel_error: 1e-14,
            record_every: 1,
        }
    }
}

impl Budgets {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_epochs > 0.0) || !(self.max_seconds > 0.0) {
            return Err(Error::InvalidConfig("budgets must be positive".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// All configured iterations ran.
    Completed,
    /// Relative error reached the target.
    Converged,
    EpochBudget,
    TimeBudget,
}

impl StopReason {
    pub fn is_truncation(self) -> bool {
        matches!(self, StopReason::EpochBudget | StopReason::TimeBudget)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    /// Final iterate, or the best recorded one when a budget cut the run short.
    pub x: Point,
    pub trace: IterateTrace,
    pub stop: StopReason,
    pub truncated: bool,
}

/// Run bookkeeping: epochs, a pausable stopwatch, trace records and stop checks.
/// Monitoring (objective evaluation for the trace) is excluded from both the
/// epoch count and the wall clock.
pub(crate) struct Tracker<'a> {
    problem: &'a LsProblem,
    f_star: Option<f64>,
    budgets: Budgets,
    epochs: f64,
    elapsed: Duration,
    running_since: Option<Instant>,
    records: Vec<TraceRecord>,
    best: Option<(f64, Point)>,
    steps: usize,
    pending: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct StepInfo {
    pub t: usize,
    pub i: usize,
    pub step: f64,
    pub restarted: bool,
    pub func_evals: usize,
}

impl<'a> Tracker<'a> {
    pub fn new(problem: &'a LsProblem, f_star: Option<f64>, budgets: Budgets) -> Result<Self> {
        budgets.validate()?;
        if let Some(f) = f_star {
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::InvalidOracle(f));
            }
        }
        Ok(Tracker {
            problem,
            f_star,
            budgets,
            epochs: 0.0,
            elapsed: Duration::ZERO,
            running_since: None,
            records: Vec::new(),
            best: None,
            steps: 0,
            pending: false,
        })
    }

    pub fn resume(&mut self) {
        if self.running_since.is_none() {
            self.running_since = Some(Instant::now());
        }
    }

    pub fn pause(&mut self) {
        if let Some(start) = self.running_since.take() {
            self.elapsed += start.elapsed();
        }
    }

    fn wall(&self) -> f64 {
        let live = self.running_since.map(|s| s.elapsed()).unwrap_or_default();
        (self.elapsed + live).as_secs_f64()
    }

    pub fn charge(&mut self, event: EpochEvent) {
        self.epochs += epoch_cost(event, self.problem.rows());
    }

    pub fn charge_n(&mut self, event: EpochEvent, count: usize) {
        self.epochs += count as f64 * epoch_cost(event, self.problem.rows());
    }

    fn push(&mut self, x: &Point, info: &StepInfo) -> Result<f64> {
        let objective = self.problem.objective(x)?;
        let rel_error = match self.f_star {
            Some(f) => relative_error_from_values(objective, f)?,
            None => f64::NAN,
        };
        let wall = self.wall();
        let epochs = self.epochs;
        self.records.push(TraceRecord {
            t: info.t,
            i: info.i,
            epochs,
            wall_seconds: wall,
            objective,
            rel_error,
            step: info.step,
            restarted: info.restarted,
            func_evals: info.func_evals,
        });
        if self.best.as_ref().is_none_or(|(f, _)| objective < *f) {
            self.best = Some((objective, x.clone()));
        }
        Ok(rel_error)
    }

    /// Records the starting point (iteration 0) without counting a step.
    pub fn record_start(&mut self, x: &Point) -> Result<Option<StopReason>> {
        self.pause();
        let rel = self.push(
            x,
            &StepInfo {
                t: 0,
                i: 0,
                step: 0.0,
                restarted: false,
                func_evals: 0,
            },
        )?;
        self.resume();
        Ok((rel < self.budgets.target_rel_error).then_some(StopReason::Converged))
    }

    /// Called after every iteration. Returns a stop reason when the run must end.
    pub fn step(&mut self, x: &Point, info: StepInfo) -> Result<Option<StopReason>> {
        self.pause();
        self.steps += 1;
        let mut stop = None;
        let due = self.steps.is_multiple_of(self.budgets.record_every);
        if due {
            let rel = self.push(x, &info)?;
            self.pending = false;
            if rel < self.budgets.target_rel_error {
                stop = Some(StopReason::Converged);
            }
        } else {
            self.pending = true;
        }
        if stop.is_none() {
            if self.epochs >= self.budgets.max_epochs {
                stop = Some(StopReason::EpochBudget);
            } else if self.wall() >= self.budgets.max_seconds {
                stop = Some(StopReason::TimeBudget);
            }
        }
        if stop.is_some() && self.pending {
            self.push(x, &info)?;
            self.pending = false;
        }
        self.resume();
        Ok(stop)
    }

    /// Closes the run. `last` is the final iterate and its step info, used if
    /// it has not been recorded yet.
    pub fn finish(mut self, x: Point, last: Option<StepInfo>, stop: StopReason) -> Result<SolveOutput> {
        self.pause();
        if self.pending {
            if let Some(info) = last {
                self.push(&x, &info)?;
            }
        }
        let truncated = stop.is_truncation();
        let x = if truncated {
            self.best.map(|(_, p)| p).unwrap_or(x)
        } else {
            x
        };
        Ok(SolveOutput {
            x,
            trace: IterateTrace {
                records: self.records,
            },
            stop,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accounting_rules() {
        let n = 1000;
        let m = 80;
        let k = 7;
        let outer = epoch_cost(EpochEvent::FullGradient, n)
            + epoch_cost(EpochEvent::SketchBuild, n)
            + k as f64 * epoch_cost(EpochEvent::SketchedGradient { m }, n);
        assert!((outer - (2.0 + k as f64 * m as f64 / n as f64)).abs() < 1e-15);

        let b = 10;
        let saga: f64 = (0..n / b).map(|_| epoch_cost(EpochEvent::SagaStep { batch: b }, n)).sum();
        assert!((saga - 1.0).abs() < 1e-12);

        let acc = epoch_cost(EpochEvent::FullGradient, n)
            + 2.0 * epoch_cost(EpochEvent::FullEvaluation, n);
        assert_eq!(acc, 3.0);
        assert_eq!(epoch_cost(EpochEvent::Projection, n), 0.0);
    }

    #[test]
    fn csv_roundtrip_and_header() {
        let trace = IterateTrace {
            records: vec![
                TraceRecord {
                    t: 0,
                    i: 0,
                    epochs: 0.0,
                    wall_seconds: 0.0,
                    objective: 1.5,
                    rel_error: f64::NAN,
                    step: 0.0,
                    restarted: false,
                    func_evals: 0,
                },
                TraceRecord {
                    t: 1,
                    i: 3,
                    epochs: 2.24,
                    wall_seconds: 0.001,
                    objective: 0.1 + 0.2,
                    rel_error: 1e-11,
                    step: 1.0 / 3.0,
                    restarted: true,
                    func_evals: 2,
                },
            ],
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,i,epochs,wall_seconds,objective,rel_error,step,restarted,func_evals\n"));
        let back = IterateTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.records[1], trace.records[1]);
        assert!(back.records[0].rel_error.is_nan());
        assert_eq!(trace.epochs_to(1e-10), Some(2.24));
        assert_eq!(trace.epochs_to(1e-12), None);
    }
}
