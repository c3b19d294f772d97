//! JSON bundle holding a problem, its oracle and generation metadata.
//!
//! Matrices are stored as little-endian `f64` in row-major order, either
//! inline (base64) or in a binary sidecar file next to the bundle.

use std::fs;
use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::oracle::{Oracle, OracleMethod};
use crate::error::{Error, Result};
use crate::problem::{ConstraintSet, LsProblem, Point};

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixPayload {
    rows: usize,
    cols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base64: Option<String>,
    /// Sidecar file, relative to the bundle's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum ConstraintPayload {
    Unconstrained,
    L1 {
        radius: f64,
    },
    TransformedL1 {
        radius: f64,
        transform: MatrixPayload,
    },
    Nuclear {
        radius: f64,
        rows: usize,
        cols: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleFile {
    version: u32,
    a: MatrixPayload,
    y: MatrixPayload,
    constraint: ConstraintPayload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x_star: Option<MatrixPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oracle_method: Option<OracleMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x_gt: Option<MatrixPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default)]
    spec: serde_json::Value,
}

/// In-memory form of a bundle.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub problem: LsProblem,
    pub oracle: Option<Oracle>,
    pub x_gt: Option<Point>,
    pub seed: Option<u64>,
    pub spec: serde_json::Value,
}

fn to_bytes(mat: &DMatrix<f64>) -> Vec<u8> {
    let mut out = Vec::with_capacity(mat.len() * 8);
    for i in 0..mat.nrows() {
        for v in mat.row(i).iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn from_bytes(bytes: &[u8], rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    if bytes.len() != rows * cols * 8 {
        return Err(Error::InvalidDimension(format!(
            "payload has {} bytes, expected {} for a {rows}x{cols} matrix",
            bytes.len(),
            rows * cols * 8
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

struct Writer<'a> {
    dir: &'a Path,
    stem: String,
    sidecar: bool,
}

impl Writer<'_> {
    fn encode(&self, name: &str, mat: &DMatrix<f64>) -> Result<MatrixPayload> {
        let bytes = to_bytes(mat);
        let (base64, path) = if self.sidecar {
            let file = format!("{}.{name}.bin", self.stem);
            fs::write(self.dir.join(&file), bytes)?;
            (None, Some(file))
        } else {
            (Some(STANDARD.encode(bytes)), None)
        };
        Ok(MatrixPayload {
            rows: mat.nrows(),
            cols: mat.ncols(),
            base64,
            path,
        })
    }
}

fn decode(payload: &MatrixPayload, dir: &Path) -> Result<DMatrix<f64>> {
    let bytes = match (&payload.base64, &payload.path) {
        (Some(text), None) => STANDARD
            .decode(text)
            .map_err(|e| Error::InvalidConfig(format!("bad base64 payload: {e}")))?,
        (None, Some(path)) => fs::read(dir.join(path))?,
        _ => {
            return Err(Error::InvalidConfig(
                "matrix payload needs exactly one of base64 or path".into(),
            ))
        }
    };
    from_bytes(&bytes, payload.rows, payload.cols)
}

impl Bundle {
    /// Writes the bundle to `path`. With `sidecar`, matrices go to
    /// `<stem>.<name>.bin` files in the same directory.
    pub fn save(&self, path: &Path, sidecar: bool) -> Result<()> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "bundle".into());
        let w = Writer { dir, stem, sidecar };
        let p = &self.problem;
        let constraint = match p.constraint() {
            ConstraintSet::Unconstrained => ConstraintPayload::Unconstrained,
            ConstraintSet::L1Ball { radius } => ConstraintPayload::L1 { radius: *radius },
            ConstraintSet::TransformedL1Ball { transform, radius } => ConstraintPayload::TransformedL1 {
                radius: *radius,
                transform: w.encode("transform", transform)?,
            },
            ConstraintSet::NuclearBall { radius, rows, cols } => ConstraintPayload::Nuclear {
                radius: *radius,
                rows: *rows,
                cols: *cols,
            },
        };
        let file = BundleFile {
            version: BUNDLE_VERSION,
            a: w.encode("a", p.a())?,
            y: w.encode("y", p.y())?,
            constraint,
            x_star: self.oracle.as_ref().map(|o| w.encode("x_star", &o.x_star)).transpose()?,
            f_star: self.oracle.as_ref().map(|o| o.f_star),
            oracle_method: self.oracle.as_ref().map(|o| o.method),
            certificate: self.oracle.as_ref().map(|o| o.certificate),
            x_gt: self.x_gt.as_ref().map(|x| w.encode("x_gt", x)).transpose()?,
            seed: self.seed,
            spec: self.spec.clone(),
        };
        fs::write(path, serde_json::to_vec_pretty(&file)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read(path)?;
        let raw: serde_json::Value = serde_json::from_slice(&text)?;
        let found = raw.get("version").and_then(|v| v.as_u64()).unwrap_or(0);
        if found != BUNDLE_VERSION as u64 {
            return Err(Error::BundleVersion {
                found: found as u32,
                expected: BUNDLE_VERSION,
            });
        }
        let file: BundleFile = serde_json::from_value(raw)?;
        let dir: PathBuf = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        let a = decode(&file.a, &dir)?;
        let y = decode(&file.y, &dir)?;
        let constraint = match &file.constraint {
            ConstraintPayload::Unconstrained => ConstraintSet::Unconstrained,
            ConstraintPayload::L1 { radius } => ConstraintSet::l1(*radius)?,
            ConstraintPayload::TransformedL1 { radius, transform } => {
                ConstraintSet::transformed_l1(decode(transform, &dir)?, *radius)?
            }
            ConstraintPayload::Nuclear { radius, rows, cols } => ConstraintSet::nuclear(*radius, *rows, *cols)?,
        };
        let problem = LsProblem::new(a, y, constraint)?;
        let oracle = match (&file.x_star, file.f_star) {
            (Some(x), Some(f_star)) => Some(Oracle {
                x_star: decode(x, &dir)?,
                f_star,
                method: file.oracle_method.unwrap_or(OracleMethod::LongRunAccPgd),
                certificate: file.certificate.unwrap_or(f64::NAN),
            }),
            (None, None) => None,
            _ => {
                return Err(Error::InvalidConfig(
                    "bundle must carry both x_star and f_star or neither".into(),
                ))
            }
        };
        let x_gt = file.x_gt.as_ref().map(|x| decode(x, &dir)).transpose()?;
        Ok(Bundle {
            problem,
            oracle,
            x_gt,
            seed: file.seed,
            spec: file.spec,
        })
    }
}
