//! Gaussian and Count sketches: cost of applying them and a Monte-Carlo look
//! at `E(SᵀS)/m = I`.
//!
//! cargo run --release --example sketches

use std::time::Instant;

use nalgebra::DMatrix;
use sketchls::sketch::{SketchKind, SketchOperator};

fn main() -> sketchls::Result<()> {
    let (n, d, m) = (20_000, 100, 800);
    let a = DMatrix::from_fn(n, d, |i, j| ((i * 31 + j * 17) % 97) as f64 / 97.0 - 0.5);
    for kind in [SketchKind::Gaussian, SketchKind::Count] {
        let s = SketchOperator::new(kind, m, n, 1)?;
        let start = Instant::now();
        let sa = s.apply(&a)?;
        println!(
            "{kind:>8}: SA is {}x{}, applied in {:.2?}, ‖SA‖_F²/(m‖A‖_F²) = {:.4}",
            sa.nrows(),
            sa.ncols(),
            start.elapsed(),
            sa.norm_squared() / (m as f64 * a.norm_squared())
        );
    }

    let (n, m, draws) = (64, 16, 2000);
    for kind in [SketchKind::Gaussian, SketchKind::Count] {
        let mut mean = DMatrix::<f64>::zeros(n, n);
        for seed in 0..draws {
            let s = SketchOperator::new(kind, m, n, seed)?.to_dense();
            mean += s.tr_mul(&s) / m as f64;
        }
        mean /= draws as f64;
        let dev = (mean - DMatrix::<f64>::identity(n, n)).amax();
        println!("{kind:>8}: max |mean(SᵀS)/m − I| over {draws} draws = {dev:.4}");
    }
    Ok(())
}
