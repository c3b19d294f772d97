//! Sketch-size sweep of the theoretical diagnostics.

use std::io::Write;

use crate::data::Bundle;
use crate::error::{Error, Result};
use crate::problem::{ConstraintSet, Point};
use crate::sketch::SketchKind;
use crate::theory::{l1_cone_width, nuclear_cone_width, transformed_cone_width, BoundInputs, Diagnostics};

/// Relative magnitude below which an entry or singular value counts as zero.
const SUPPORT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsOptions {
    pub ms: Vec<usize>,
    pub theta: f64,
    /// Inner iterations per outer loop.
    pub k: usize,
    /// 1 for fixed steps, `γ_u` with line search.
    pub beta: f64,
    pub sketch: SketchKind,
}

/// Parses a comma-separated list of sketch sizes. An entry `8d` means `8·d`.
pub fn parse_m_list(text: &str, d: usize) -> Result<Vec<usize>> {
    let bad = |item: &str| Error::InvalidConfig(format!("bad sketch size `{item}`"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m = match item.strip_suffix('d') {
            Some("") => d,
            Some(mult) => mult.parse::<usize>().map_err(|_| bad(item))? * d,
            None => item.parse::<usize>().map_err(|_| bad(item))?,
        };
        if m == 0 {
            return Err(bad(item));
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err(Error::InvalidConfig("empty sketch-size sweep".into()));
    }
    Ok(out)
}

fn support_size(values: impl Iterator<Item = f64> + Clone) -> usize {
    let peak = values.clone().fold(0.0f64, |m, v| m.max(v.abs()));
    values.filter(|v| v.abs() > SUPPORT_TOL * peak).count().max(1)
}

/// Gaussian-width bound of the descent cone at `x_ref`: the ℓ1 bound at the
/// support size of `x_ref` (of `Φ x_ref` for transformed balls), the
/// nuclear bound at its numerical rank, and `√d` without a constraint.
pub fn cone_width(constraint: &ConstraintSet, x_ref: &Point) -> Result<f64> {
    let d = x_ref.nrows();
    match constraint {
        ConstraintSet::Unconstrained => Ok((d as f64).sqrt()),
        ConstraintSet::L1Ball { .. } => l1_cone_width(support_size(x_ref.iter().copied()), d),
        ConstraintSet::TransformedL1Ball { transform, .. } => {
            let u = transform * x_ref;
            transformed_cone_width(Some(support_size(u.iter().copied())), d)
        }
        ConstraintSet::NuclearBall { .. } => {
            let sv = x_ref.clone().singular_values();
            nuclear_cone_width(support_size(sv.iter().copied()), x_ref.nrows(), x_ref.ncols())
        }
    }
}

/// Diagnostics for every sketch size, evaluated at the oracle solution (or
/// the ground truth when the bundle has no oracle).
pub fn bounds_sweep(bundle: &Bundle, opts: &BoundsOptions) -> Result<Vec<Diagnostics>> {
    let problem = &bundle.problem;
    let x_ref = bundle
        .oracle
        .as_ref()
        .map(|o| &o.x_star)
        .or(bundle.x_gt.as_ref())
        .ok_or_else(|| Error::InvalidConfig("bundle has neither an oracle nor a ground truth".into()))?;
    let width = cone_width(problem.constraint(), x_ref)?;
    let spectral = problem.spectral_constants(1e-12)?;
    opts.ms
        .iter()
        .map(|&m| {
            let input = BoundInputs {
                m,
                d: problem.dim(),
                width,
                theta: opts.theta,
                l: spectral.l,
                mu: spectral.mu,
                k: opts.k,
                beta: opts.beta,
            };
            Diagnostics::compute(&input, problem.rows(), opts.sketch)
        })
        .collect()
}

pub const BOUNDS_HEADER: [&str; 10] = [
    "m",
    "b_m",
    "width",
    "alpha",
    "rho",
    "sigma",
    "theorem1",
    "epochs_per_outer",
    "advisory_only",
    "b_m_in_range",
];

/// Writes the sweep as CSV. Unavailable bounds are written as `NA`.
pub fn write_bounds_csv<W: Write>(writer: W, rows: &[Diagnostics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BOUNDS_HEADER)?;
    let cell = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| format!("{x:e}"));
    for r in rows {
        let m = r.m as f64;
        let in_range = r.b_m >= (m - 1.0).sqrt() && r.b_m <= m.sqrt();
        w.write_record([
            r.m.to_string(),
            format!("{:e}", r.b_m),
            format!("{:e}", r.width),
            cell(r.alpha),
            cell(r.rho),
            cell(r.sigma),
            cell(r.theorem1),
            format!("{:e}", r.epochs_per_outer),
            r.advisory_only.to_string(),
            in_range.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
