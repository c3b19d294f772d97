//! Regression data from CSV files.
//!
//! Features are optionally augmented with irrelevant standard-normal columns,
//! every feature column is scaled to unit Euclidean norm, and the problem is
//! constrained to the ℓ1 ball whose radius is the ℓ1 norm of the least-squares
//! solution on the relevant features alone.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::oracle::{oracle_solution, ORACLE_TOL};
use crate::error::{Error, Result};
use crate::problem::{ConstraintSet, LsProblem};

/// A numeric table read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub header: Option<Vec<String>>,
    pub values: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegressionOptions {
    /// Use only the first `relevant` feature columns (all when `None`).
    pub relevant: Option<usize>,
    pub irrelevant: usize,
    /// Zero-based target column; the last column when `None`.
    pub target_column: Option<usize>,
    pub seed: u64,
}

/// Reads a numeric CSV. A first row containing any non-numeric cell is
/// treated as a header. Rows and columns in errors are 1-based.
pub fn read_numeric_csv<R: Read>(reader: R) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = None;
    let mut data: Vec<f64> = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if idx == 0 && record.iter().any(|c| c.parse::<f64>().is_err()) {
            header = Some(record.iter().map(str::to_owned).collect());
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                row,
                column: record.len().min(expected) + 1,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: col + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            data.push(v);
        }
        rows += 1;
    }
    let cols = width.unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "no numeric rows".into(),
        });
    }
    Ok(NumericTable {
        header,
        values: DMatrix::from_row_slice(rows, cols, &data),
    })
}

/// Writes a matrix as CSV with shortest round-trip float formatting.
pub fn write_matrix_csv<W: Write>(writer: W, mat: &DMatrix<f64>, header: Option<&[String]>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    if let Some(h) = header {
        wtr.write_record(h)?;
    }
    for i in 0..mat.nrows() {
        wtr.write_record(mat.row(i).iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Scales every nonzero column to unit Euclidean norm.
pub fn normalize_columns(mat: &mut DMatrix<f64>) {
    for mut col in mat.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
}

/// Splits a table into features and target, appends irrelevant columns and
/// normalizes. Returns the assembled matrix, the target and the number of
/// relevant columns.
pub fn assemble(table: &NumericTable, opts: &RegressionOptions) -> Result<(DMatrix<f64>, DMatrix<f64>, usize)> {
    let values = &table.values;
    let cols = values.ncols();
    if cols < 2 {
        return Err(Error::InvalidDimension(format!(
            "need at least one feature and a target, found {cols} columns"
        )));
    }
    let target = opts.target_column.unwrap_or(cols - 1);
    if target >= cols {
        return Err(Error::InvalidConfig(format!(
            "target column {target} out of range for {cols} columns"
        )));
    }
    let features: Vec<usize> = (0..cols).filter(|&c| c != target).collect();
    let relevant = opts.relevant.unwrap_or(features.len());
    if relevant == 0 || relevant > features.len() {
        return Err(Error::InvalidConfig(format!(
            "relevant = {relevant} but the file has {} feature columns",
            features.len()
        )));
    }
    let n = values.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut a = DMatrix::zeros(n, relevant + opts.irrelevant);
    for (j, &c) in features[..relevant].iter().enumerate() {
        a.set_column(j, &values.column(c));
    }
    for j in relevant..relevant + opts.irrelevant {
        for i in 0..n {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    normalize_columns(&mut a);
    let y = values.column(target).clone_owned();
    Ok((a, DMatrix::from_column_slice(n, 1, y.as_slice()), relevant))
}

/// Loads a regression problem. The ℓ1 radius is `‖x̂‖₁` where `x̂` solves the
/// unconstrained problem on the (normalized) relevant columns.
pub fn load_regression_csv(path: &Path, opts: &RegressionOptions) -> Result<LsProblem> {
    let table = read_numeric_csv(File::open(path)?)?;
    regression_problem(&table, opts)
}

pub fn regression_problem(table: &NumericTable, opts: &RegressionOptions) -> Result<LsProblem> {
    let (a, y, relevant) = assemble(table, opts)?;
    let base = LsProblem::new(a.columns(0, relevant).clone_owned(), y.clone(), ConstraintSet::Unconstrained)?;
    let x_hat = oracle_solution(&base, ORACLE_TOL)?.x_star;
    let radius = x_hat.iter().map(|v| v.abs()).sum::<f64>();
    LsProblem::new(a, y, ConstraintSet::l1(radius)?)
}
