//! Euclidean projections onto the supported constraint sets.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::problem::{check_orthogonal, check_radius, ConstraintSet, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub point: Point,
    /// True when the input was outside the set and has been moved.
    pub active: bool,
}

impl ProjectionResult {
    fn unchanged(point: Point) -> Self {
        ProjectionResult {
            point,
            active: false,
        }
    }
}

/// Soft-threshold level `θ ≥ 0` with `Σ max(|v_i| − θ, 0) = r`, or `None`
/// when `‖v‖₁ ≤ r` already.
pub fn l1_threshold(values: &[f64], radius: f64) -> Option<f64> {
    let l1: f64 = values.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return None;
    }
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / (j + 1) as f64;
        if j == 0 || u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    Some(theta.max(0.0))
}

fn soft_threshold(v: &Point, theta: f64) -> Point {
    v.map(|x| x.signum() * (x.abs() - theta).max(0.0))
}

/// `argmin_{‖x‖₁ ≤ r} ‖x − v‖₂` (entrywise ℓ1 for matrix inputs).
pub fn project_l1(v: &Point, radius: f64) -> Result<ProjectionResult> {
    check_radius(radius)?;
    match l1_threshold(v.as_slice(), radius) {
        None => Ok(ProjectionResult::unchanged(v.clone())),
        Some(theta) => Ok(ProjectionResult {
            point: soft_threshold(v, theta),
            active: true,
        }),
    }
}

/// Projection onto `{x : ‖Φx‖₁ ≤ r}` for orthogonal `Φ`, computed as
/// `Φᵀ P_{ℓ1}(Φv)`.
pub fn project_transformed_l1(
    v: &Point,
    transform: &DMatrix<f64>,
    radius: f64,
) -> Result<ProjectionResult> {
    check_radius(radius)?;
    check_orthogonal(transform)?;
    transformed_unchecked(v, transform, radius)
}

fn transformed_unchecked(
    v: &Point,
    transform: &DMatrix<f64>,
    radius: f64,
) -> Result<ProjectionResult> {
    if transform.ncols() != v.nrows() {
        return Err(Error::shape(
            "transformed projection",
            (transform.ncols(), v.ncols()),
            v.shape(),
        ));
    }
    let coeffs = transform * v;
    match l1_threshold(coeffs.as_slice(), radius) {
        None => Ok(ProjectionResult::unchanged(v.clone())),
        Some(theta) => Ok(ProjectionResult {
            point: transform.tr_mul(&soft_threshold(&coeffs, theta)),
            active: true,
        }),
    }
}

/// Projection onto the nuclear-norm ball via a full SVD: the singular values
/// are projected onto the ℓ1 ball and the matrix is reassembled.
pub fn project_nuclear(x: &Point, radius: f64) -> Result<ProjectionResult> {
    check_radius(radius)?;
    let svd = x.clone().svd(true, true);
    let sv = &svd.singular_values;
    let theta = match l1_threshold(sv.as_slice(), radius) {
        None => return Ok(ProjectionResult::unchanged(x.clone())),
        Some(theta) => theta,
    };
    let u = svd
        .u
        .as_ref()
        .ok_or_else(|| Error::Numerical("SVD did not return U".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numerical("SVD did not return Vᵀ".into()))?;
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("non-finite singular values".into()));
    }
    let mut scaled_u = u.clone();
    for (j, s) in sv.iter().enumerate() {
        let shrunk = (s - theta).max(0.0);
        scaled_u.column_mut(j).scale_mut(shrunk);
    }
    Ok(ProjectionResult {
        point: scaled_u * v_t,
        active: true,
    })
}

/// Dispatch on the constraint variant. `Unconstrained` returns the input.
pub fn project(constraint: &ConstraintSet, v: &Point) -> Result<ProjectionResult> {
    match constraint {
        ConstraintSet::Unconstrained => Ok(ProjectionResult::unchanged(v.clone())),
        ConstraintSet::L1Ball { radius } => project_l1(v, *radius),
        // orthogonality was validated when the set was built
        ConstraintSet::TransformedL1Ball { transform, radius } => {
            transformed_unchecked(v, transform, *radius)
        }
        ConstraintSet::NuclearBall { radius, rows, cols } => {
            if v.shape() != (*rows, *cols) {
                return Err(Error::shape("nuclear projection", (*rows, *cols), v.shape()));
            }
            project_nuclear(v, *radius)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::nuclear_norm;

    fn col(v: &[f64]) -> Point {
        Point::from_column_slice(v.len(), 1, v)
    }

    fn assert_close(a: &Point, b: &Point, tol: f64) {
        assert!((a - b).amax() <= tol, "{a} vs {b}");
    }

    #[test]
    fn l1_interior_point_untouched() {
        let r = project_l1(&col(&[0.2, -0.1]), 1.0).unwrap();
        assert_eq!(r.point, col(&[0.2, -0.1]));
        assert!(!r.active);
    }

    #[test]
    fn l1_examples() {
        assert_close(&project_l1(&col(&[3.0, 0.0]), 1.0).unwrap().point, &col(&[1.0, 0.0]), 1e-15);
        let r = project_l1(&col(&[2.0, 1.0]), 1.0).unwrap();
        assert_close(&r.point, &col(&[1.0, 0.0]), 1e-15);
        assert!(r.active);
        assert_eq!(l1_threshold(&[2.0, 1.0], 1.0), Some(1.0));
        assert_close(&project_l1(&col(&[-3.0, 2.0]), 0.0).unwrap().point, &col(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn l1_ties_at_threshold() {
        let r = project_l1(&col(&[1.0, 1.0, 1.0, -1.0]), 2.0).unwrap();
        assert_close(&r.point, &col(&[0.5, 0.5, 0.5, -0.5]), 1e-15);
    }

    #[test]
    fn invalid_radius() {
        assert!(matches!(project_l1(&col(&[1.0]), -0.5), Err(Error::InvalidRadius(_))));
    }

    #[test]
    fn transformed_identity_matches_l1() {
        let v = col(&[0.3, -2.0, 1.5]);
        let a = project_transformed_l1(&v, &DMatrix::identity(3, 3), 1.2).unwrap();
        let b = project_l1(&v, 1.2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transformed_rotation() {
        // Φ rotates by 90°: Φ·(2,1) = (−1,2); P_{ℓ1}((−1,2),1) = (0,1); Φᵀ(0,1) = (1,0)
        let phi = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let r = project_transformed_l1(&col(&[2.0, 1.0]), &phi, 1.0).unwrap();
        assert_close(&r.point, &col(&[1.0, 0.0]), 1e-15);
        let inside = col(&[0.1, 0.2]);
        assert_eq!(project_transformed_l1(&inside, &phi, 1.0).unwrap().point, inside);
        let bad = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(project_transformed_l1(&inside, &bad, 1.0).is_err());
    }

    #[test]
    fn nuclear_examples() {
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[2.0, 1.0]));
        let r = project_nuclear(&x, 1.0).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[1.0, 0.0]));
        assert_close(&r.point, &expected, 1e-14);

        let inside = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.2]);
        let r = project_nuclear(&inside, 1.0).unwrap();
        assert!(!r.active);
        assert_eq!(r.point, inside);

        let u = nalgebra::DVector::from_row_slice(&[0.6, 0.8, 0.0]);
        let v = nalgebra::DVector::from_row_slice(&[0.0, 1.0]);
        let rank1 = &u * v.transpose() * 3.0;
        let r = project_nuclear(&rank1, 1.0).unwrap();
        assert_close(&r.point, &(&u * v.transpose()), 1e-14);
        assert!((nuclear_norm(&r.point) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dispatch() {
        let v = col(&[5.0, -4.0]);
        assert_eq!(project(&ConstraintSet::Unconstrained, &v).unwrap().point, v);
        assert_eq!(
            project(&ConstraintSet::l1(1.0).unwrap(), &v).unwrap(),
            project_l1(&v, 1.0).unwrap()
        );
        let c = ConstraintSet::nuclear(1.0, 2, 2).unwrap();
        assert!(project(&c, &v).is_err());
    }
}
