//! Mean accepted line-search step as the solution gets sparser.
//!
//! cargo run --release --example stepsize_sparsity

use sketchls::bench::{mann_whitney_greater, stepsize_sweep, StepsizeOptions};

fn main() -> sketchls::Result<()> {
    let mut opts = StepsizeOptions::desk(vec![1, 5, 20, 100]);
    opts.trials = 8;
    let (rows, trials) = stepsize_sweep(&opts)?;
    println!("{:>8} {:>12} {:>12} {:>8}", "s", "mean eta", "1/L_t", "ratio");
    for r in &rows {
        println!("{:>8} {:>12.4e} {:>12.4e} {:>8.2}", r.sparsity, r.mean_eta, r.baseline_eta, r.ratio);
    }
    let pick = |s| trials.iter().filter(|t| t.sparsity == s).map(|t| t.mean_eta).collect::<Vec<_>>();
    if let Some(t) = mann_whitney_greater(&pick(1), &pick(100)) {
        println!("one-sided rank test s=1 > s=100: U = {}, p = {:.2e}", t.u, t.p_value);
    }
    Ok(())
}
