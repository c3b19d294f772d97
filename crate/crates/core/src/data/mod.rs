//! Problem generators, reference solutions and on-disk formats.

pub mod bundle;
pub mod oracle;
pub mod regression;
pub mod synthetic;

pub use bundle::{Bundle, BUNDLE_VERSION};
pub use oracle::{gradient_map_norm, oracle_solution, verify_oracle, Oracle, OracleMethod, ORACLE_TOL};
pub use regression::{load_regression_csv, RegressionOptions};
pub use synthetic::{gen_lowrank, gen_synthetic, LowRankSpec, SynthSpec, Synthetic, TransformKind};
