//! The constrained least-squares problem `min ½‖Y − AX‖²_F  s.t.  X ∈ K`.
//!
//! Every variable is stored as a `d × q` matrix. Vector problems use `q = 1`,
//! and the multiple-response (nuclear-norm) problem uses `q > 1` with all
//! norms taken in the Frobenius sense.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// A point in the solution domain (`d × q`, `q = 1` for vector problems).
pub type Point = DMatrix<f64>;

/// Relative errors below this level count as exact recovery.
pub const EXACT_RECOVERY_THRESHOLD: f64 = 1e-10;

/// Lower clamp applied by [`LsProblem::relative_error`].
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-16;

const ORTHOGONALITY_TOL: f64 = 1e-10;

/// The feasible set `K`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    Unconstrained,
    /// `‖x‖₁ ≤ radius` (entrywise for matrix variables).
    L1Ball { radius: f64 },
    /// `‖Φx‖₁ ≤ radius` with `Φ` orthogonal.
    TransformedL1Ball { transform: DMatrix<f64>, radius: f64 },
    /// `‖X‖_* ≤ radius` for a `rows × cols` matrix variable.
    NuclearBall {
        radius: f64,
        rows: usize,
        cols: usize,
    },
}

impl ConstraintSet {
    pub fn l1(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(ConstraintSet::L1Ball { radius })
    }

    pub fn transformed_l1(transform: DMatrix<f64>, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        check_orthogonal(&transform)?;
        Ok(ConstraintSet::TransformedL1Ball { transform, radius })
    }

    pub fn nuclear(radius: f64, rows: usize, cols: usize) -> Result<Self> {
        check_radius(radius)?;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "nuclear ball shape {rows}x{cols}"
            )));
        }
        Ok(ConstraintSet::NuclearBall { radius, rows, cols })
    }

    pub fn radius(&self) -> Option<f64> {
        match self {
            ConstraintSet::Unconstrained => None,
            ConstraintSet::L1Ball { radius }
            | ConstraintSet::TransformedL1Ball { radius, .. }
            | ConstraintSet::NuclearBall { radius, .. } => Some(*radius),
        }
    }

    /// Short tag used in file formats and diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            ConstraintSet::Unconstrained => "unconstrained",
            ConstraintSet::L1Ball { .. } => "l1",
            ConstraintSet::TransformedL1Ball { .. } => "transformed-l1",
            ConstraintSet::NuclearBall { .. } => "nuclear",
        }
    }

    /// The gauge value of `x` (ℓ1 norm, ‖Φx‖₁ or nuclear norm). Zero when
    /// unconstrained.
    pub fn gauge(&self, x: &Point) -> f64 {
        match self {
            ConstraintSet::Unconstrained => 0.0,
            ConstraintSet::L1Ball { .. } => x.iter().map(|v| v.abs()).sum(),
            ConstraintSet::TransformedL1Ball { transform, .. } => {
                (transform * x).iter().map(|v| v.abs()).sum()
            }
            ConstraintSet::NuclearBall { .. } => nuclear_norm(x),
        }
    }

    /// Feasibility up to `rel_tol · max(1, r)`.
    pub fn contains(&self, x: &Point, rel_tol: f64) -> bool {
        match self.radius() {
            None => true,
            Some(r) => self.gauge(x) <= r + rel_tol * r.max(1.0),
        }
    }

    pub(crate) fn check_shape(&self, d: usize, q: usize) -> Result<()> {
        match self {
            ConstraintSet::Unconstrained | ConstraintSet::L1Ball { .. } => Ok(()),
            ConstraintSet::TransformedL1Ball { transform, .. } => {
                if transform.nrows() != d || transform.ncols() != d {
                    Err(Error::shape("transform", (d, d), transform.shape()))
                } else {
                    Ok(())
                }
            }
            ConstraintSet::NuclearBall { rows, cols, .. } => {
                if *rows != d || *cols != q {
                    Err(Error::shape("nuclear ball", (d, q), (*rows, *cols)))
                } else {
                    Ok(())
                }
            }
        }
    }
}

pub(crate) fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRadius(radius))
    }
}

/// Max-entry deviation of `ΦᵀΦ` from the identity.
pub fn orthogonality_defect(transform: &DMatrix<f64>) -> f64 {
    if transform.nrows() != transform.ncols() {
        return f64::INFINITY;
    }
    let gram = transform.tr_mul(transform);
    let mut worst = 0.0f64;
    for (idx, v) in gram.iter().enumerate() {
        let (i, j) = (idx % gram.nrows(), idx / gram.nrows());
        let target = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((v - target).abs());
    }
    worst
}

pub(crate) fn check_orthogonal(transform: &DMatrix<f64>) -> Result<()> {
    let defect = orthogonality_defect(transform);
    if defect <= ORTHOGONALITY_TOL {
        Ok(())
    } else {
        Err(Error::InvalidTransform { defect })
    }
}

pub fn nuclear_norm(x: &DMatrix<f64>) -> f64 {
    x.clone().singular_values().iter().sum()
}

/// Extreme eigenvalues of `AᵀA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants {
    /// Largest eigenvalue (Lipschitz constant of the gradient).
    pub l: f64,
    /// Smallest eigenvalue, clamped at zero.
    pub mu: f64,
}

impl SpectralConstants {
    pub fn is_strongly_convex(&self) -> bool {
        self.mu > 0.0
    }

    pub fn condition_number(&self) -> f64 {
        if self.mu > 0.0 {
            self.l / self.mu
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone)]
pub struct LsProblem {
    a: DMatrix<f64>,
    y: DMatrix<f64>,
    constraint: ConstraintSet,
}

impl LsProblem {
    pub fn new(a: DMatrix<f64>, y: DMatrix<f64>, constraint: ConstraintSet) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidDimension(format!(
                "design matrix is {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if y.nrows() != a.nrows() || y.ncols() == 0 {
            return Err(Error::shape("observation", (a.nrows(), 1), y.shape()));
        }
        constraint.check_shape(a.ncols(), y.ncols())?;
        Ok(LsProblem { a, y, constraint })
    }

    /// Vector-response constructor.
    pub fn from_vector(a: DMatrix<f64>, y: DVector<f64>, constraint: ConstraintSet) -> Result<Self> {
        let n = y.len();
        let y = DMatrix::from_column_slice(n, 1, y.as_slice());
        Self::new(a, y, constraint)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn constraint(&self) -> &ConstraintSet {
        &self.constraint
    }

    pub fn with_constraint(mut self, constraint: ConstraintSet) -> Result<Self> {
        constraint.check_shape(self.dim(), self.responses())?;
        self.constraint = constraint;
        Ok(self)
    }

    /// Number of rows `n`.
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    /// Number of columns `d`.
    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// Number of response columns `q`.
    pub fn responses(&self) -> usize {
        self.y.ncols()
    }

    pub fn zero_point(&self) -> Point {
        Point::zeros(self.dim(), self.responses())
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.nrows() != self.dim() || x.ncols() != self.responses() {
            Err(Error::shape("point", (self.dim(), self.responses()), x.shape()))
        } else {
            Ok(())
        }
    }

    /// `AX − Y`.
    pub fn residual(&self, x: &Point) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        Ok(&self.a * x - &self.y)
    }

    /// `½‖Y − AX‖²_F`.
    pub fn objective(&self, x: &Point) -> Result<f64> {
        Ok(0.5 * self.residual(x)?.norm_squared())
    }

    /// `Aᵀ(AX − Y)`.
    pub fn gradient(&self, x: &Point) -> Result<Point> {
        let r = self.residual(x)?;
        Ok(self.a.tr_mul(&r))
    }

    /// `‖AV‖_F`.
    pub fn a_norm(&self, v: &Point) -> Result<f64> {
        self.check_point(v)?;
        Ok((&self.a * v).norm())
    }

    /// `(f(x) − f⋆)/f⋆`, clamped below at [`RELATIVE_ERROR_FLOOR`].
    pub fn relative_error(&self, x: &Point, f_star: f64) -> Result<f64> {
        let f = self.objective(x)?;
        relative_error_from_values(f, f_star)
    }

    /// Extreme eigenvalues of `AᵀA` from a full symmetric eigendecomposition.
    pub fn spectral_constants(&self, tol: f64) -> Result<SpectralConstants> {
        if !(tol > 0.0) {
            return Err(Error::InvalidConfig(format!("spectral tolerance {tol}")));
        }
        let gram = self.a.tr_mul(&self.a);
        gram_extremes(gram, tol)
    }
}

pub fn relative_error_from_values(f: f64, f_star: f64) -> Result<f64> {
    if !(f_star > 0.0) || !f_star.is_finite() {
        return Err(Error::InvalidOracle(f_star));
    }
    Ok(((f - f_star) / f_star).max(RELATIVE_ERROR_FLOOR))
}

pub fn is_exact_recovery(rel_error: f64) -> bool {
    rel_error < EXACT_RECOVERY_THRESHOLD
}

const EIGEN_MAX_ITER: usize = 10_000;

pub(crate) fn gram_extremes(gram: DMatrix<f64>, tol: f64) -> Result<SpectralConstants> {
    let fallback = gram.diagonal().max();
    let eig = SymmetricEigen::try_new(gram, tol.min(f64::EPSILON), EIGEN_MAX_ITER).ok_or(
        Error::Convergence {
            what: "symmetric eigendecomposition",
            iterations: EIGEN_MAX_ITER,
            best: fallback,
        },
    )?;
    let l = eig.eigenvalues.max().max(0.0);
    let mu = eig.eigenvalues.min().max(0.0);
    Ok(SpectralConstants { l, mu: mu.min(l) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn identity_problem(y: &[f64]) -> LsProblem {
        LsProblem::from_vector(
            DMatrix::identity(2, 2),
            DVector::from_row_slice(y),
            ConstraintSet::Unconstrained,
        )
        .unwrap()
    }

    fn col(v: &[f64]) -> Point {
        Point::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn objective_trivial_cases() {
        let p = identity_problem(&[1.0, 0.0]);
        assert_eq!(p.objective(&col(&[1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(p.objective(&col(&[0.0, 0.0])).unwrap(), 0.5);
    }

    #[test]
    fn objective_elementwise() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let p = LsProblem::from_vector(a, DVector::from_element(3, 1.0), ConstraintSet::Unconstrained)
            .unwrap();
        // rows: 1-2=-1, 3-4=-1, 5-6=-1 → residuals -2 each → ½·12 = 6
        assert_eq!(p.objective(&col(&[1.0, -1.0])).unwrap(), 6.0);
    }

    #[test]
    fn gradient_trivial_cases() {
        let p = identity_problem(&[1.0, 0.0]);
        assert_eq!(p.gradient(&col(&[1.0, 0.0])).unwrap(), col(&[0.0, 0.0]));
        let p = identity_problem(&[0.0, 0.0]);
        assert_eq!(p.gradient(&col(&[2.0, 3.0])).unwrap(), col(&[2.0, 3.0]));
    }

    #[test]
    fn dimension_errors() {
        let p = identity_problem(&[1.0, 0.0]);
        assert!(matches!(
            p.objective(&col(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(LsProblem::from_vector(
            DMatrix::identity(2, 2),
            DVector::from_element(3, 0.0),
            ConstraintSet::Unconstrained
        )
        .is_err());
    }

    #[test]
    fn spectral_constants_diagonal_and_single_column() {
        let a = DMatrix::from_diagonal(&DVector::from_row_slice(&[3.0, 1.0]));
        let p = LsProblem::from_vector(a, DVector::zeros(2), ConstraintSet::Unconstrained).unwrap();
        let sc = p.spectral_constants(1e-12).unwrap();
        assert_relative_eq!(sc.l, 9.0, max_relative = 1e-12);
        assert_relative_eq!(sc.mu, 1.0, max_relative = 1e-12);

        let a = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 2.0]);
        let p = LsProblem::from_vector(a, DVector::zeros(3), ConstraintSet::Unconstrained).unwrap();
        let sc = p.spectral_constants(1e-12).unwrap();
        assert_relative_eq!(sc.l, 9.0, max_relative = 1e-12);
        assert_relative_eq!(sc.mu, 9.0, max_relative = 1e-12);
    }

    #[test]
    fn relative_error_clamp_and_scale() {
        assert_eq!(relative_error_from_values(3.0, 3.0).unwrap(), RELATIVE_ERROR_FLOOR);
        assert_eq!(relative_error_from_values(4.0, 2.0).unwrap(), 1.0);
        assert!(matches!(
            relative_error_from_values(1.0, 0.0),
            Err(Error::InvalidOracle(_))
        ));
        assert!(is_exact_recovery(RELATIVE_ERROR_FLOOR));
    }

    #[test]
    fn constraint_validation() {
        assert!(matches!(ConstraintSet::l1(-1.0), Err(Error::InvalidRadius(_))));
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(
            ConstraintSet::transformed_l1(bad, 1.0),
            Err(Error::InvalidTransform { .. })
        ));
        let p = identity_problem(&[1.0, 0.0]);
        assert!(p.with_constraint(ConstraintSet::nuclear(1.0, 3, 1).unwrap()).is_err());
    }
}
