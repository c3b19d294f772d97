//! Random sketch operators `S ∈ R^{m×n}` normalized so that `E(SᵀS/m) = I`.
//!
//! Gaussian sketches hold i.i.d. `N(0, 1)` entries. Count sketches keep one
//! signed entry of magnitude `√m` per column and are applied in a single
//! streaming pass over the rows of the input.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::LsProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SketchKind {
    Gaussian,
    Count,
}

impl fmt::Display for SketchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SketchKind::Gaussian => "gaussian",
            SketchKind::Count => "count",
        })
    }
}

impl FromStr for SketchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(SketchKind::Gaussian),
            "count" => Ok(SketchKind::Count),
            other => Err(Error::InvalidConfig(format!("unknown sketch kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Dense(DMatrix<f64>),
    Count { buckets: Vec<usize>, signs: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct SketchOperator {
    kind: SketchKind,
    m: usize,
    n: usize,
    seed: u64,
    repr: Repr,
}

/// Seed of the sketch drawn in outer loop `t` of a run seeded with `base`.
pub fn derive_seed(base: u64, t: usize) -> u64 {
    base.wrapping_add(t as u64)
}

impl SketchOperator {
    pub fn new(kind: SketchKind, m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidDimension(format!("sketch size {m}x{n}")));
        }
        if kind == SketchKind::Count && m > n {
            return Err(Error::InvalidDimension(format!(
                "count sketch with {m} buckets for {n} rows"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let repr = match kind {
            SketchKind::Gaussian => {
                Repr::Dense(DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal)))
            }
            SketchKind::Count => {
                let buckets = (0..n).map(|_| rng.random_range(0..m)).collect();
                let signs = (0..n)
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                Repr::Count { buckets, signs }
            }
        };
        Ok(SketchOperator {
            kind,
            m,
            n,
            seed,
            repr,
        })
    }

    /// A count sketch with explicitly supplied bucket indices and signs.
    pub fn count_from_parts(m: usize, buckets: Vec<usize>, signs: Vec<f64>) -> Result<Self> {
        let n = buckets.len();
        if m == 0 || n == 0 || signs.len() != n {
            return Err(Error::InvalidDimension(format!(
                "count sketch parts: m={m}, {} buckets, {} signs",
                n,
                signs.len()
            )));
        }
        if let Some(b) = buckets.iter().find(|&&b| b >= m) {
            return Err(Error::InvalidDimension(format!("bucket {b} out of range 0..{m}")));
        }
        if signs.iter().any(|s| s.abs() != 1.0) {
            return Err(Error::InvalidDimension("signs must be ±1".into()));
        }
        Ok(SketchOperator {
            kind: SketchKind::Count,
            m,
            n,
            seed: 0,
            repr: Repr::Count { buckets, signs },
        })
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    /// Embedding dimension.
    pub fn rows(&self) -> usize {
        self.m
    }

    /// Ambient dimension.
    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `S · M`.
    pub fn apply(&self, mat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if mat.nrows() != self.n {
            return Err(Error::shape(
                "sketch apply",
                (self.n, mat.ncols()),
                mat.shape(),
            ));
        }
        match &self.repr {
            Repr::Dense(s) => Ok(s * mat),
            Repr::Count { buckets, signs } => {
                let scale = (self.m as f64).sqrt();
                let mut out = DMatrix::zeros(self.m, mat.ncols());
                // column-major storage: stream rows per column
                for c in 0..mat.ncols() {
                    let src = mat.column(c);
                    let mut dst = out.column_mut(c);
                    for (i, (&b, &s)) in buckets.iter().zip(signs).enumerate() {
                        dst[b] += s * scale * src[i];
                    }
                }
                Ok(out)
            }
        }
    }

    /// Materializes `S` as a dense `m × n` matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.repr {
            Repr::Dense(s) => s.clone(),
            Repr::Count { buckets, signs } => {
                let scale = (self.m as f64).sqrt();
                let mut s = DMatrix::zeros(self.m, self.n);
                for (i, (&b, &sg)) in buckets.iter().zip(signs).enumerate() {
                    s[(b, i)] = sg * scale;
                }
                s
            }
        }
    }
}

/// `(SA, SY)` for the classical-sketch objective `½‖SY − SAX‖²`.
pub fn sketch_problem(
    problem: &LsProblem,
    sketch: &SketchOperator,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if sketch.cols() != problem.rows() {
        return Err(Error::shape(
            "sketch/problem",
            (problem.rows(), problem.dim()),
            (sketch.cols(), problem.dim()),
        ));
    }
    Ok((sketch.apply(problem.a())?, sketch.apply(problem.y())?))
}
