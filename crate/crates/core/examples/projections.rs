//! Euclidean projections onto the ℓ1 ball, a transformed ℓ1 ball and the
//! nuclear-norm ball.
//!
//! cargo run --release --example projections

use nalgebra::DMatrix;
use sketchls::problem::{nuclear_norm, ConstraintSet, Point};
use sketchls::projection::{project, project_l1, project_nuclear};

fn l1(x: &Point) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

fn main() -> sketchls::Result<()> {
    let v = Point::from_column_slice(5, 1, &[3.0, -1.5, 0.2, 0.0, -0.7]);
    let p = project_l1(&v, 2.0)?;
    println!("project_l1({:?}, 2) = {:?}", v.as_slice(), p.point.as_slice());
    println!("  ‖x‖₁ = {:.6}, active = {}", l1(&p.point), p.active);

    // rotation by 45° in the plane: the ball becomes a square aligned with the axes
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi = DMatrix::from_row_slice(2, 2, &[s, s, -s, s]);
    let c = ConstraintSet::transformed_l1(phi.clone(), 1.0)?;
    let w = Point::from_column_slice(2, 1, &[2.0, 0.1]);
    let q = project(&c, &w)?;
    println!("transformed: {:?} -> {:?}, ‖Φx‖₁ = {:.6}", w.as_slice(), q.point.as_slice(), l1(&(&phi * &q.point)));

    let x = DMatrix::from_fn(6, 4, |i, j| ((i + 1) * (j + 2)) as f64 / 5.0 + if i == j { 1.0 } else { 0.0 });
    let r = project_nuclear(&x, 3.0)?;
    println!(
        "nuclear: ‖X‖_* = {:.4} -> {:.4}, singular values {:?}",
        nuclear_norm(&x),
        nuclear_norm(&r.point),
        r.point.singular_values().iter().map(|v| (v * 1e6).round() / 1e6).collect::<Vec<_>>()
    );
    Ok(())
}
