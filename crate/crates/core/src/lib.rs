//! Sketched projected-gradient solvers for constrained least squares.
//!
//! The central entry points are [`solvers::gpis`] and [`solvers::acc_gpis`],
//! which minimize `½‖Y − AX‖²_F` over a convex set by repeatedly solving a
//! randomly sketched Hessian subproblem.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod data;
pub mod error;
pub mod problem;
pub mod projection;
pub mod sketch;
pub mod solvers;
pub mod theory;

pub use error::{Error, Result};
pub use problem::{ConstraintSet, LsProblem, Point};
pub use sketch::{SketchKind, SketchOperator};
