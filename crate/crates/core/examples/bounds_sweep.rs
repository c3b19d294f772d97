//! Theoretical diagnostics over a dyadic sweep of sketch sizes, showing where
//! the outer-loop bound starts to contract and what each loop costs.
//!
//! cargo run --release --example bounds_sweep

use sketchls::bench::{bounds_sweep, BoundsOptions};
use sketchls::data::synthetic::{gen_synthetic, SynthSpec, TransformKind};
use sketchls::data::Bundle;
use sketchls::SketchKind;

fn main() -> sketchls::Result<()> {
    let spec = SynthSpec {
        n: 20_000,
        d: 50,
        sparsity: 5,
        kappa: 10.0,
        transform: TransformKind::Identity,
        snr: 10.0,
        seed: 1,
    };
    let syn = gen_synthetic(&spec)?;
    let bundle = Bundle {
        problem: syn.problem,
        oracle: Some(syn.oracle),
        x_gt: Some(syn.x_gt),
        seed: Some(1),
        spec: serde_json::Value::Null,
    };
    let opts = BoundsOptions {
        ms: (1..=9).map(|p| 50 << p).collect(),
        theta: 2.0,
        k: 20,
        beta: 1.0,
        sketch: SketchKind::Gaussian,
    };
    let show = |v: Option<f64>| v.map_or("  n/a".to_string(), |x| format!("{x:.4}"));
    println!("{:>6} {:>8} {:>8} {:>10} {:>10} {:>10}", "m", "b_m", "rho", "sigma", "theorem1", "ep/outer");
    for r in bounds_sweep(&bundle, &opts)? {
        println!(
            "{:>6} {:>8.3} {:>8} {:>10} {:>10} {:>10.2}",
            r.m,
            r.b_m,
            show(r.rho),
            show(r.sigma),
            show(r.theorem1),
            r.epochs_per_outer
        );
    }
    Ok(())
}
