//! Load a regression CSV, pad it with irrelevant features and solve the
//! ℓ1-constrained problem.
//!
//! cargo run --release --example regression_csv -- [path.csv]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sketchls::data::{load_regression_csv, oracle_solution, RegressionOptions, ORACLE_TOL};
use sketchls::solvers::{acc_gpis, Budgets, SolverConfig};

fn write_demo_csv(path: &PathBuf) -> std::io::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut text = String::from("x1,x2,x3,x4,y\n");
    for _ in 0..3000 {
        let x: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let noise: f64 = rng.sample(StandardNormal);
        let y = 2.0 * x[0] - x[2] + 0.5 * x[3] + 0.3 * noise;
        text.push_str(&format!("{},{},{},{},{}\n", x[0], x[1], x[2], x[3], y));
    }
    std::fs::write(path, text)
}

fn main() -> sketchls::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let p = std::env::temp_dir().join("sketchls_demo.csv");
            write_demo_csv(&p)?;
            p
        }
    };
    let opts = RegressionOptions {
        irrelevant: 36,
        seed: 1,
        ..RegressionOptions::default()
    };
    let problem = load_regression_csv(&path, &opts)?;
    let oracle = oracle_solution(&problem, ORACLE_TOL)?;
    println!(
        "{}: n = {}, d = {}, radius = {:.4}, f* = {:.6e}",
        path.display(),
        problem.rows(),
        problem.dim(),
        problem.constraint().radius().unwrap_or(f64::NAN),
        oracle.f_star
    );
    let mut cfg = SolverConfig::new(8 * problem.dim());
    cfg.inner = 20;
    cfg.outer = 15;
    cfg.budgets = Budgets {
        max_epochs: 80.0,
        ..Budgets::default()
    };
    let out = acc_gpis(&problem, &cfg, Some(oracle.f_star))?;
    let weights: Vec<String> = out.x.iter().take(8).map(|v| format!("{v:.3}")).collect();
    println!("rel_error {:.3e}, leading weights [{}]", out.trace.final_rel_error().unwrap_or(f64::NAN), weights.join(", "));
    let mass: f64 = out.x.iter().skip(4).map(|v| v.abs()).sum();
    println!("ℓ1 mass on the irrelevant columns: {mass:.3e}");
    Ok(())
}
