use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid radius {0}: must be finite and nonnegative")]
    InvalidRadius(f64),

    #[error("transform is not orthogonal (max |PhiᵀPhi - I| = {defect:e})")]
    InvalidTransform { defect: f64 },

    #[error("invalid oracle value f_star = {0}: must be positive")]
    InvalidOracle(f64),

    #[error("{what} did not converge after {iterations} iterations (best estimate {best})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        best: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line search failed: step underflow at eta = {eta:e}")]
    LineSearchFailure { eta: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("oracle not certified: gradient-map norm {certificate:e} above tolerance {tolerance:e}")]
    OracleFailure { certificate: f64, tolerance: f64 },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported bundle version {found} (expected {expected})")]
    BundleVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    ) -> Self {
        Error::DimensionMismatch {
            context,
            expected: format!("{}x{}", expected.0, expected.1),
            found: format!("{}x{}", found.0, found.1),
        }
    }
}
