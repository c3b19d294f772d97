//! Quadratic objectives minimized by the inner loops.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::problem::{LsProblem, Point};
use crate::sketch::{sketch_problem, SketchOperator};

/// A convex quadratic with cheap access to its curvature along a direction.
pub trait QuadraticObjective {
    fn value(&self, x: &Point) -> f64;

    fn gradient(&self, x: &Point) -> Point;

    /// `f(x + Δ) − f(x) − ⟨∇f(x), Δ⟩`, i.e. `½ ΔᵀHΔ`. Evaluated without
    /// cancellation so that acceptance tests stay exact near convergence.
    fn excess(&self, delta: &Point) -> f64;
}

/// The full objective `½‖Y − AX‖²_F`.
pub struct FullObjective<'a>(pub &'a LsProblem);

impl QuadraticObjective for FullObjective<'_> {
    fn value(&self, x: &Point) -> f64 {
        0.5 * (self.0.a() * x - self.0.y()).norm_squared()
    }

    fn gradient(&self, x: &Point) -> Point {
        self.0.a().tr_mul(&(self.0.a() * x - self.0.y()))
    }

    fn excess(&self, delta: &Point) -> f64 {
        0.5 * (self.0.a() * delta).norm_squared()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Classical sketch: `½‖SAx − Sy‖²`.
    Gpcs,
    /// Iterative Hessian sketch: `½‖SA(x − anchor)‖² + m·⟨x, g⟩`.
    Gpihs,
}

#[derive(Debug, Clone)]
enum Linear {
    Gpcs { sy: DMatrix<f64> },
    Gpihs { anchor: Point, g: Point },
}

#[derive(Debug, Clone)]
pub struct SketchedSubproblem {
    sa: DMatrix<f64>,
    m: usize,
    linear: Linear,
}

impl SketchedSubproblem {
    /// Classical-sketch objective built from `S` applied to `A` and `Y`.
    pub fn classical(problem: &LsProblem, sketch: &SketchOperator) -> Result<Self> {
        let (sa, sy) = sketch_problem(problem, sketch)?;
        Ok(SketchedSubproblem {
            sa,
            m: sketch.rows(),
            linear: Linear::Gpcs { sy },
        })
    }

    /// Hessian-sketch objective anchored at `anchor` with full gradient `g`.
    pub fn hessian(
        problem: &LsProblem,
        sketch: &SketchOperator,
        anchor: Point,
        g: Point,
    ) -> Result<Self> {
        let (d, q) = (problem.dim(), problem.responses());
        if anchor.shape() != (d, q) || g.shape() != (d, q) {
            return Err(Error::shape("subproblem anchor", (d, q), anchor.shape()));
        }
        let sa = sketch.apply(problem.a())?;
        Ok(SketchedSubproblem {
            sa,
            m: sketch.rows(),
            linear: Linear::Gpihs { anchor, g },
        })
    }

    /// Builds a hessian subproblem from an already sketched matrix.
    pub fn from_parts_hessian(sa: DMatrix<f64>, m: usize, anchor: Point, g: Point) -> Result<Self> {
        if anchor.nrows() != sa.ncols() || g.shape() != anchor.shape() {
            return Err(Error::shape("subproblem anchor", (sa.ncols(), g.ncols()), anchor.shape()));
        }
        Ok(SketchedSubproblem {
            sa,
            m,
            linear: Linear::Gpihs { anchor, g },
        })
    }

    pub fn phase(&self) -> Phase {
        match self.linear {
            Linear::Gpcs { .. } => Phase::Gpcs,
            Linear::Gpihs { .. } => Phase::Gpihs,
        }
    }

    pub fn sketched_matrix(&self) -> &DMatrix<f64> {
        &self.sa
    }

    pub fn sketch_size(&self) -> usize {
        self.m
    }

    fn check(&self, x: &Point) -> Result<()> {
        let q = match &self.linear {
            Linear::Gpcs { sy } => sy.ncols(),
            Linear::Gpihs { g, .. } => g.ncols(),
        };
        if x.nrows() != self.sa.ncols() || x.ncols() != q {
            Err(Error::shape("subproblem point", (self.sa.ncols(), q), x.shape()))
        } else {
            Ok(())
        }
    }

    /// Checked variant of [`QuadraticObjective::value`].
    pub fn try_value(&self, x: &Point) -> Result<f64> {
        self.check(x)?;
        Ok(self.value(x))
    }

    /// Checked variant of [`QuadraticObjective::gradient`].
    pub fn try_gradient(&self, x: &Point) -> Result<Point> {
        self.check(x)?;
        Ok(self.gradient(x))
    }
}

impl QuadraticObjective for SketchedSubproblem {
    fn value(&self, x: &Point) -> f64 {
        match &self.linear {
            Linear::Gpcs { sy } => 0.5 * (&self.sa * x - sy).norm_squared(),
            Linear::Gpihs { anchor, g } => {
                0.5 * (&self.sa * (x - anchor)).norm_squared() + self.m as f64 * x.dot(g)
            }
        }
    }

    fn gradient(&self, x: &Point) -> Point {
        match &self.linear {
            Linear::Gpcs { sy } => self.sa.tr_mul(&(&self.sa * x - sy)),
            Linear::Gpihs { anchor, g } => {
                let mut grad = self.sa.tr_mul(&(&self.sa * (x - anchor)));
                grad += g * self.m as f64;
                grad
            }
        }
    }

    fn excess(&self, delta: &Point) -> f64 {
        0.5 * (&self.sa * delta).norm_squared()
    }
}

/// Power-iteration estimate of `‖M‖₂²`. Stops after `max_iter` iterations or
/// once the Rayleigh quotient changes by less than `tol` relative.
pub fn spectral_norm_sq(mat: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let d = mat.ncols();
    if d == 0 || mat.nrows() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_d0f5_ca1e);
    let mut v = DMatrix::<f64>::from_fn(d, 1, |_, _| rng.sample(StandardNormal));
    v /= v.norm();
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let w = mat.tr_mul(&(mat * &v));
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        let done = (next - estimate).abs() <= tol * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}
