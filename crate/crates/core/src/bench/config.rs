//! Run configuration: problem source, solver entries, budgets, repetitions.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::oracle::{oracle_solution, ORACLE_TOL};
use crate::data::regression::{load_regression_csv, RegressionOptions};
use crate::data::synthetic::{gen_lowrank, gen_synthetic, LowRankSpec, SynthSpec};
use crate::data::{Bundle, Oracle};
use crate::error::{Error, Result};
use crate::problem::LsProblem;
use crate::sketch::SketchKind;
use crate::solvers::{BaselineConfig, Budgets, SagaConfig, SolverConfig, StepPolicy};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Syn1Small,
    Syn2Small,
    Syn3Small,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "syn1-small" => Ok(Preset::Syn1Small),
            "syn2-small" => Ok(Preset::Syn2Small),
            "syn3-small" => Ok(Preset::Syn3Small),
            other => Err(Error::InvalidConfig(format!("unknown preset `{other}`"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Syn1Small => "syn1-small",
            Preset::Syn2Small => "syn2-small",
            Preset::Syn3Small => "syn3-small",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSource {
    Preset {
        name: Preset,
        #[serde(default)]
        seed: u64,
    },
    Synthetic(SynthSpec),
    LowRank(LowRankSpec),
    Csv {
        path: PathBuf,
        #[serde(default)]
        relevant: Option<usize>,
        #[serde(default)]
        irrelevant: usize,
        #[serde(default)]
        target_column: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
    Bundle {
        path: PathBuf,
    },
}

impl ProblemSource {
    /// Builds (or loads) the problem and its oracle. Relative paths are
    /// resolved against `base`.
    pub fn materialize(&self, base: &Path) -> Result<Bundle> {
        let synthetic = |s: crate::data::Synthetic, seed: u64, spec: serde_json::Value| Bundle {
            problem: s.problem,
            oracle: Some(s.oracle),
            x_gt: Some(s.x_gt),
            seed: Some(seed),
            spec,
        };
        match self {
            ProblemSource::Preset { name, seed } => {
                let spec = serde_json::to_value(self)?;
                let s = match name {
                    Preset::Syn1Small => gen_synthetic(&SynthSpec::syn1_small(*seed))?,
                    Preset::Syn2Small => gen_synthetic(&SynthSpec::syn2_small(*seed))?,
                    Preset::Syn3Small => gen_lowrank(&LowRankSpec::syn3_small(*seed))?,
                };
                Ok(synthetic(s, *seed, spec))
            }
            ProblemSource::Synthetic(spec) => {
                Ok(synthetic(gen_synthetic(spec)?, spec.seed, serde_json::to_value(self)?))
            }
            ProblemSource::LowRank(spec) => {
                Ok(synthetic(gen_lowrank(spec)?, spec.seed, serde_json::to_value(self)?))
            }
            ProblemSource::Csv {
                path,
                relevant,
                irrelevant,
                target_column,
                seed,
            } => {
                let opts = RegressionOptions {
                    relevant: *relevant,
                    irrelevant: *irrelevant,
                    target_column: *target_column,
                    seed: *seed,
                };
                let problem = load_regression_csv(&base.join(path), &opts)?;
                let oracle = oracle_solution(&problem, ORACLE_TOL)?;
                Ok(Bundle {
                    problem,
                    oracle: Some(oracle),
                    x_gt: None,
                    seed: Some(*seed),
                    spec: serde_json::to_value(self)?,
                })
            }
            ProblemSource::Bundle { path } => Bundle::load(&base.join(path)),
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_loops() -> usize {
    20
}

fn default_gamma() -> f64 {
    2.0
}

fn default_max_iters() -> usize {
    1000
}

fn step_policy(line_search: bool, eta: Option<f64>, gamma_u: f64, gamma_d: f64) -> StepPolicy {
    if line_search {
        StepPolicy::LineSearch {
            gamma_u,
            gamma_d,
            initial: eta,
        }
    } else {
        StepPolicy::Fixed { eta }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SketchedParams {
    #[serde(default)]
    pub label: Option<String>,
    /// Sketch size; `8d` when omitted.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "default_sketch")]
    pub sketch: SketchKind,
    /// Warm-start iterations; 0 disables the classical-sketch phase.
    #[serde(default)]
    pub k0: usize,
    #[serde(default = "default_loops")]
    pub outer: usize,
    #[serde(default = "default_loops")]
    pub inner: usize,
    #[serde(default = "default_true")]
    pub restart: bool,
    #[serde(default = "default_true")]
    pub line_search: bool,
    /// Fixed step, or the first trial step with line search. `None` uses the
    /// reciprocal Lipschitz constant.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_gamma")]
    pub gamma_u: f64,
    #[serde(default = "default_gamma")]
    pub gamma_d: f64,
}

fn default_sketch() -> SketchKind {
    SketchKind::Count
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineParams {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_true")]
    pub restart: bool,
    #[serde(default = "default_true")]
    pub line_search: bool,
    /// Fixed step, or the first trial step with line search. `None` uses the
    /// reciprocal Lipschitz constant.
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default = "default_gamma")]
    pub gamma_u: f64,
    #[serde(default = "default_gamma")]
    pub gamma_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SagaParams {
    #[serde(default)]
    pub label: Option<String>,
    pub batch: usize,
    #[serde(default)]
    pub max_iters: Option<usize>,
}

/// One solver entry of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "kebab-case")]
pub enum SolverSpec {
    Gpis(SketchedParams),
    AccGpis(SketchedParams),
    Pgd(BaselineParams),
    AccPgd(BaselineParams),
    Saga(SagaParams),
}

/// Solver names accepted on the command line.
pub const SOLVER_NAMES: [&str; 5] = ["gpis", "acc-gpis", "pgd", "acc-pgd", "saga"];

/// Concrete solver settings for one problem and seed.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    Sketched { accelerate: bool, cfg: SolverConfig },
    Full { accelerate: bool, cfg: BaselineConfig },
    Saga(SagaConfig),
}

impl SolverSpec {
    /// Display name: the label, or a name derived from the solver.
    pub fn name(&self) -> String {
        let (label, base) = match self {
            SolverSpec::Gpis(p) => (&p.label, "gpis".to_string()),
            SolverSpec::AccGpis(p) => (&p.label, "acc-gpis".to_string()),
            SolverSpec::Pgd(p) => (&p.label, "pgd".to_string()),
            SolverSpec::AccPgd(p) => (&p.label, "acc-pgd".to_string()),
            SolverSpec::Saga(p) => (&p.label, format!("saga-{}", p.batch)),
        };
        label.clone().unwrap_or(base)
    }

    pub fn resolve(&self, problem: &LsProblem, seed: u64, budgets: Budgets) -> Result<Resolved> {
        let resolved = match self {
            SolverSpec::Gpis(p) | SolverSpec::AccGpis(p) => {
                let m = p.m.unwrap_or(8 * problem.dim());
                let cfg = SolverConfig {
                    sketch: p.sketch,
                    m,
                    run_gpcs: p.k0 > 0,
                    k0: p.k0,
                    outer: p.outer,
                    inner: p.inner,
                    step: step_policy(p.line_search, p.eta, p.gamma_u, p.gamma_d),
                    restart: p.restart,
                    seed,
                    budgets,
                };
                cfg.validate()?;
                Resolved::Sketched {
                    accelerate: matches!(self, SolverSpec::AccGpis(_)),
                    cfg,
                }
            }
            SolverSpec::Pgd(p) | SolverSpec::AccPgd(p) => {
                let cfg = BaselineConfig {
                    step: step_policy(p.line_search, p.eta, p.gamma_u, p.gamma_d),
                    restart: p.restart,
                    max_iters: p.max_iters,
                    budgets,
                };
                cfg.validate()?;
                Resolved::Full {
                    accelerate: matches!(self, SolverSpec::AccPgd(_)),
                    cfg,
                }
            }
            SolverSpec::Saga(p) => {
                if p.batch == 0 || p.batch > problem.rows() {
                    return Err(Error::InvalidConfig(format!(
                        "saga batch {} must lie in 1..={}",
                        p.batch,
                        problem.rows()
                    )));
                }
                budgets.validate()?;
                let mut cfg = SagaConfig::new(p.batch);
                cfg.seed = seed;
                cfg.budgets = budgets;
                if let Some(iters) = p.max_iters {
                    if iters == 0 {
                        return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
                    }
                    cfg.max_iters = iters;
                }
                Resolved::Saga(cfg)
            }
        };
        Ok(resolved)
    }
}

fn default_repetitions() -> usize {
    1
}

/// Caps shared by every run of a configuration. Unset caps are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    #[serde(default)]
    pub max_epochs: Option<f64>,
    #[serde(default)]
    pub max_seconds: Option<f64>,
    #[serde(default)]
    pub target_rel_error: Option<f64>,
    #[serde(default)]
    pub record_every: Option<usize>,
}

impl BudgetSpec {
    pub fn budgets(&self) -> Budgets {
        let d = Budgets::default();
        Budgets {
            max_epochs: self.max_epochs.unwrap_or(d.max_epochs),
            max_seconds: self.max_seconds.unwrap_or(d.max_seconds),
            target_rel_error: self.target_rel_error.unwrap_or(d.target_rel_error),
            record_every: self.record_every.unwrap_or(d.record_every),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub problem: ProblemSource,
    pub solvers: Vec<SolverSpec>,
    #[serde(default)]
    pub budgets: BudgetSpec,
    /// Runs per solver; run `r` uses seed `seed + r`.
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        match raw.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == CONFIG_VERSION as u64 => {}
            Some(v) => {
                return Err(Error::InvalidConfig(format!(
                    "config version {v} is not supported (expected {CONFIG_VERSION})"
                )))
            }
            None => return Err(Error::InvalidConfig("config needs a numeric `version`".into())),
        }
        let cfg: RunConfig = serde_json::from_value(raw)
            .map_err(|e| Error::InvalidConfig(format!("bad run config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(Error::InvalidConfig("at least one solver entry is required".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
        }
        self.budgets.budgets().validate()?;
        let mut names: Vec<String> = self.solvers.iter().map(SolverSpec::name).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!(
                "duplicate solver name `{}`; add a label",
                w[0]
            )));
        }
        Ok(())
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.repetitions as u64).map(move |r| self.seed + r)
    }
}

/// Oracle value, if the bundle carries one.
pub fn f_star(bundle: &Bundle) -> Option<f64> {
    bundle.oracle.as_ref().map(|o: &Oracle| o.f_star)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "version": 1,
        "problem": {"source": "preset", "name": "syn1-small", "seed": 7},
        "solvers": [
            {"solver": "acc-gpis", "m": 800, "inner": 40, "outer": 12},
            {"solver": "saga", "batch": 10},
            {"solver": "acc-pgd", "line_search": false}
        ],
        "budgets": {"max_epochs": 60}
    }"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.repetitions, 1);
        assert_eq!(cfg.solvers.len(), 3);
        assert_eq!(cfg.solvers[1].name(), "saga-10");
        assert_eq!(cfg.budgets.budgets().max_epochs, 60.0);
        match &cfg.solvers[0] {
            SolverSpec::AccGpis(p) => {
                assert_eq!(p.m, Some(800));
                assert!(p.line_search);
                assert_eq!(p.sketch, SketchKind::Count);
            }
            other => panic!("{other:?}"),
        }
    }

    fn edited(edit: impl FnOnce(&mut serde_json::Value)) -> Result<RunConfig> {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        edit(&mut v);
        RunConfig::from_json(&v.to_string())
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(
            edited(|v| v["solvers"] = serde_json::json!([])),
            Err(Error::InvalidConfig(_))
        ));
        assert!(edited(|v| v["colour"] = 3.into()).is_err());
        assert!(edited(|v| v["solvers"][0]["iner"] = 40.into()).is_err());
        assert!(edited(|v| v["solvers"][0]["solver"] = "newton".into()).is_err());
        assert!(edited(|v| v["version"] = 2.into()).is_err());
        assert!(edited(|v| v["budgets"]["max_epochs"] = 0.into()).is_err());
        assert!(edited(|v| v["repetitions"] = 0.into()).is_err());
        assert!(edited(|v| v["solvers"][2] = serde_json::json!({"solver": "saga", "batch": 10})).is_err());
        assert!(edited(|v| v["solvers"][2] = serde_json::json!({"solver": "saga", "batch": 10, "label": "b"})).is_ok());
    }

    #[test]
    fn resolve_defaults() {
        let a = nalgebra::DMatrix::from_fn(50, 4, |i, j| ((i + j) as f64).sin());
        let y = nalgebra::DMatrix::from_fn(50, 1, |i, _| i as f64);
        let p = LsProblem::new(a, y, crate::problem::ConstraintSet::l1(1.0).unwrap()).unwrap();
        let spec: SolverSpec = serde_json::from_str(r#"{"solver": "gpis", "line_search": false}"#).unwrap();
        match spec.resolve(&p, 3, Budgets::default()).unwrap() {
            Resolved::Sketched { accelerate, cfg } => {
                assert!(!accelerate);
                assert_eq!(cfg.m, 32);
                assert_eq!(cfg.seed, 3);
                assert_eq!(cfg.step, StepPolicy::Fixed { eta: None });
            }
            other => panic!("{other:?}"),
        }
        let saga: SolverSpec = serde_json::from_str(r#"{"solver": "saga", "batch": 51}"#).unwrap();
        assert!(saga.resolve(&p, 0, Budgets::default()).is_err());
    }
}
