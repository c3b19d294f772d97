//! Multi-response regression with a nuclear-norm constraint.
//!
//! cargo run --release --example lowrank_nuclear

use sketchls::data::synthetic::{gen_lowrank, LowRankSpec};
use sketchls::solvers::{acc_gpis, accelerated_pgd, BaselineConfig, Budgets, SolverConfig};

fn main() -> sketchls::Result<()> {
    let spec = LowRankSpec {
        n: 2000,
        d: 30,
        q: 20,
        rank: 3,
        kappa: 10.0,
        snr: 10.0,
        seed: 5,
    };
    let syn = gen_lowrank(&spec)?;
    let f_star = syn.oracle.f_star;
    let budgets = Budgets {
        max_epochs: 100.0,
        ..Budgets::default()
    };

    let mut cfg = SolverConfig::new(8 * spec.d);
    cfg.inner = 30;
    cfg.outer = 20;
    cfg.budgets = budgets;
    let sketched = acc_gpis(&syn.problem, &cfg, Some(f_star))?;
    let full = accelerated_pgd(
        &syn.problem,
        &BaselineConfig {
            max_iters: 5000,
            budgets,
            ..BaselineConfig::default()
        },
        Some(f_star),
    )?;
    for (name, out) in [("acc-gpis", &sketched), ("acc-pgd", &full)] {
        let sv = out.x.singular_values();
        let rank = sv.iter().filter(|s| **s > 1e-6 * sv.max()).count();
        println!(
            "{name:>8}: rel_error {:.3e}, epochs {:.1}, numerical rank {rank}",
            out.trace.final_rel_error().unwrap_or(f64::NAN),
            out.trace.last().map_or(0.0, |r| r.epochs),
        );
    }
    let err = (&sketched.x - &syn.x_gt).norm() / syn.x_gt.norm();
    println!("relative distance to the ground truth: {err:.3}");
    Ok(())
}
