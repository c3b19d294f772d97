//! Generate a Syn1-small problem and solve it with GPIS and Acc-GPIS.
//!
//! cargo run --release --example quickstart -- [seed]

use std::time::Instant;

use sketchls::data::synthetic::{gen_synthetic, SynthSpec};
use sketchls::solvers::{acc_gpis, gpis, Budgets, SolverConfig};

fn main() -> sketchls::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let start = Instant::now();
    let syn = gen_synthetic(&SynthSpec::syn1_small(seed))?;
    println!(
        "syn1-small seed {seed}: f* = {:.6e}, certificate {:.2e} ({:.2?})",
        syn.oracle.f_star,
        syn.oracle.certificate,
        start.elapsed()
    );

    let d = syn.problem.dim();
    let mut cfg = SolverConfig::new(8 * d);
    cfg.run_gpcs = true;
    cfg.k0 = 30;
    cfg.inner = 25;
    cfg.outer = 30;
    cfg.seed = seed;
    cfg.budgets = Budgets {
        max_epochs: 60.0,
        target_rel_error: 1e-14,
        ..Budgets::default()
    };

    for (name, solve) in [("gpis", gpis as fn(_, _, _) -> _), ("acc-gpis", acc_gpis)] {
        let out = solve(&syn.problem, &cfg, Some(syn.oracle.f_star))?;
        let last = out.trace.last().expect("non-empty trace");
        println!(
            "{name:>9}: rel_error {:.3e} after {:.1} epochs, {:.3}s, epochs to 1e-10: {:?}",
            last.rel_error,
            last.epochs,
            last.wall_seconds,
            out.trace.epochs_to(1e-10)
        );
    }
    Ok(())
}
