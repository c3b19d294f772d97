//! Save a generated problem as a bundle, reload it and re-verify the oracle.
//!
//! cargo run --release --example bundles

use sketchls::data::synthetic::{gen_synthetic, SynthSpec, TransformKind};
use sketchls::data::{verify_oracle, Bundle};

fn main() -> sketchls::Result<()> {
    let spec = SynthSpec {
        n: 1000,
        d: 40,
        sparsity: 4,
        kappa: 50.0,
        transform: TransformKind::RandomOrthogonal,
        snr: 10.0,
        seed: 9,
    };
    let syn = gen_synthetic(&spec)?;
    let bundle = Bundle {
        problem: syn.problem,
        oracle: Some(syn.oracle),
        x_gt: Some(syn.x_gt),
        seed: Some(spec.seed),
        spec: serde_json::to_value(&spec)?,
    };
    let dir = std::env::temp_dir();
    for sidecar in [false, true] {
        let path = dir.join(format!("sketchls_bundle_{sidecar}.json"));
        bundle.save(&path, sidecar)?;
        let back = Bundle::load(&path)?;
        let oracle = back.oracle.as_ref().expect("oracle stored");
        let size = std::fs::metadata(&path)?.len();
        println!(
            "{} ({size} bytes, sidecar = {sidecar}): identical A = {}, certificate {:.2e} -> {:.2e}",
            path.display(),
            back.problem.a() == bundle.problem.a(),
            oracle.certificate,
            verify_oracle(&back.problem, oracle)?
        );
    }
    Ok(())
}
