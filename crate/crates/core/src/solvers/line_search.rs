//! Backtracking line search on the composite gradient map.
//!
//! Starting from `η = γ_d·η_prev`, the candidate `x = P_K(x_i − η∇f(x_i))` is
//! accepted once `f(x) < m_L(x; η)` where
//! `m_L = f(x_i) + ⟨x − x_i, ∇f(x_i)⟩ + ‖x − x_i‖²/(2η)`; otherwise `η` is
//! divided by `γ_u`. For a quadratic the test reads `½ΔᵀHΔ < ‖Δ‖²/(2η)`,
//! which is how it is evaluated here.

use crate::error::{Error, Result};
use crate::problem::{ConstraintSet, Point};
use crate::projection::project;
use crate::solvers::subproblem::QuadraticObjective;

const ETA_UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    /// `γ_u > 1`: shrink factor after a rejected candidate.
    pub shrink: f64,
    /// `γ_d ≥ 1`: growth applied to the previous step before searching.
    pub grow: f64,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        LineSearchParams {
            shrink: 2.0,
            grow: 2.0,
        }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.shrink > 1.0) || !(self.grow >= 1.0) || !self.shrink.is_finite() || !self.grow.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "line search needs gamma_u > 1 and gamma_d >= 1, got {} and {}",
                self.shrink, self.grow
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub x_next: Point,
    pub eta: f64,
    /// Candidates whose objective was evaluated.
    pub evals: usize,
}

/// `true` when the gradient is numerically zero relative to the iterate.
pub fn is_stationary(x: &Point, grad: &Point) -> bool {
    grad.norm() <= 1e-14 * (1.0 + x.norm())
}

pub fn line_search<F: QuadraticObjective + ?Sized>(
    f: &F,
    constraint: &ConstraintSet,
    x_i: &Point,
    grad_i: &Point,
    eta_prev: f64,
    params: LineSearchParams,
) -> Result<LineSearchOutcome> {
    params.validate()?;
    if !(eta_prev > 0.0) || !eta_prev.is_finite() {
        return Err(Error::InvalidConfig(format!("previous step {eta_prev} must be positive")));
    }
    let mut eta = params.grow * eta_prev;
    if is_stationary(x_i, grad_i) {
        return Ok(LineSearchOutcome {
            x_next: x_i.clone(),
            eta,
            evals: 0,
        });
    }
    let mut evals = 0;
    loop {
        let trial = x_i - grad_i * eta;
        let x = project(constraint, &trial)?.point;
        let delta = &x - x_i;
        let scale = delta.amax();
        if scale == 0.0 {
            // the gradient map vanishes: x_i is a fixed point of the projected step
            return Ok(LineSearchOutcome {
                x_next: x,
                eta,
                evals,
            });
        }
        evals += 1;
        // both sides are quadratic in delta, so compare on delta/max|delta|
        let unit = delta / scale;
        if f.excess(&unit) < unit.norm_squared() / (2.0 * eta) {
            return Ok(LineSearchOutcome {
                x_next: x,
                eta,
                evals,
            });
        }
        eta /= params.shrink;
        if eta < ETA_UNDERFLOW {
            return Err(Error::LineSearchFailure { eta });
        }
    }
}

/// `m_L(x; η) − f(x)` evaluated from objective values. Positive for an
/// accepted step (up to rounding in the two values).
pub fn composite_gap<F: QuadraticObjective + ?Sized>(
    f: &F,
    x_i: &Point,
    grad_i: &Point,
    x: &Point,
    eta: f64,
) -> f64 {
    let delta = x - x_i;
    let m_l = f.value(x_i) + delta.dot(grad_i) + delta.norm_squared() / (2.0 * eta);
    m_l - f.value(x)
}

/// Exact form of [`composite_gap`] for quadratics: `‖Δ‖²/(2η) − ½ΔᵀHΔ`.
pub fn composite_gap_exact<F: QuadraticObjective + ?Sized>(
    f: &F,
    x_i: &Point,
    x: &Point,
    eta: f64,
) -> f64 {
    let delta = x - x_i;
    delta.norm_squared() / (2.0 * eta) - f.excess(&delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `f(x) = ½‖x‖²`.
    struct HalfNormSq;

    impl QuadraticObjective for HalfNormSq {
        fn value(&self, x: &Point) -> f64 {
            0.5 * x.norm_squared()
        }
        fn gradient(&self, x: &Point) -> Point {
            x.clone()
        }
        fn excess(&self, delta: &Point) -> f64 {
            0.5 * delta.norm_squared()
        }
    }

    fn e1() -> Point {
        Point::from_column_slice(2, 1, &[1.0, 0.0])
    }

    #[test]
    fn hand_executed_quadratic() {
        // η=2 rejected, η=1 rejected (f = m_L = 0), η=0.5 accepted
        let x = e1();
        let g = HalfNormSq.gradient(&x);
        let out = line_search(&HalfNormSq, &ConstraintSet::Unconstrained, &x, &g, 1.0, LineSearchParams::default())
            .unwrap();
        assert_eq!(out.eta, 0.5);
        assert_eq!(out.evals, 3);
        assert_eq!(out.x_next, e1() * 0.5);
        assert!(composite_gap(&HalfNormSq, &x, &g, &out.x_next, out.eta) > 0.0);
    }

    #[test]
    fn value_form_agrees_on_rejections() {
        let x = e1();
        let g = HalfNormSq.gradient(&x);
        // η = 1: x = 0, f = 0, m_L = ½ − 1 + ½ = 0 → gap is exactly zero
        let zero = Point::zeros(2, 1);
        assert_eq!(composite_gap(&HalfNormSq, &x, &g, &zero, 1.0), 0.0);
        assert_eq!(composite_gap_exact(&HalfNormSq, &x, &zero, 1.0), 0.0);
    }

    #[test]
    fn stationary_point_returns_immediately() {
        let x = Point::zeros(2, 1);
        let g = Point::zeros(2, 1);
        let out = line_search(&HalfNormSq, &ConstraintSet::Unconstrained, &x, &g, 0.25, LineSearchParams::default())
            .unwrap();
        assert_eq!(out.x_next, x);
        assert_eq!(out.eta, 0.5);
        assert_eq!(out.evals, 0);
    }

    #[test]
    fn projected_fixed_point_is_accepted() {
        // minimizer of ½‖x − (2,0)‖² over the unit ℓ1 ball is (1,0) with nonzero gradient
        struct Shifted;
        impl QuadraticObjective for Shifted {
            fn value(&self, x: &Point) -> f64 {
                0.5 * ((x[0] - 2.0).powi(2) + x[1].powi(2))
            }
            fn gradient(&self, x: &Point) -> Point {
                Point::from_column_slice(2, 1, &[x[0] - 2.0, x[1]])
            }
            fn excess(&self, delta: &Point) -> f64 {
                0.5 * delta.norm_squared()
            }
        }
        let x = e1();
        let g = Shifted.gradient(&x);
        let c = ConstraintSet::l1(1.0).unwrap();
        let out = line_search(&Shifted, &c, &x, &g, 1.0, LineSearchParams::default()).unwrap();
        assert_eq!(out.x_next, x);
    }

    #[test]
    fn rejects_bad_parameters() {
        let x = e1();
        let bad = LineSearchParams { shrink: 1.0, grow: 2.0 };
        assert!(line_search(&HalfNormSq, &ConstraintSet::Unconstrained, &x, &x, 1.0, bad).is_err());
        assert!(line_search(&HalfNormSq, &ConstraintSet::Unconstrained, &x, &x, 0.0, LineSearchParams::default())
            .is_err());
    }

    #[test]
    fn inconsistent_gradient_underflows() {
        // a gradient pointing uphill can never satisfy the decrease test
        struct Liar;
        impl QuadraticObjective for Liar {
            fn value(&self, _: &Point) -> f64 {
                0.0
            }
            fn gradient(&self, x: &Point) -> Point {
                -x
            }
            fn excess(&self, delta: &Point) -> f64 {
                1e300 * delta.norm_squared().sqrt()
            }
        }
        let x = Point::zeros(2, 1);
        let err = line_search(&Liar, &ConstraintSet::Unconstrained, &x, &e1(), 1.0, LineSearchParams::default());
        assert!(matches!(err, Err(Error::LineSearchFailure { .. })));
    }
}
