//! Every solver on one problem, compared by epochs and wall-clock time to a
//! relative error of 1e-6 and 1e-10.
//!
//! cargo run --release --example solver_comparison

use sketchls::bench::config::{BaselineParams, SagaParams, SketchedParams};
use sketchls::bench::{run_solver, RunSummary, SolverSpec};
use sketchls::data::synthetic::{gen_synthetic, SynthSpec, TransformKind};
use sketchls::solvers::Budgets;
use sketchls::SketchKind;

fn sketched(k0: usize) -> SketchedParams {
    SketchedParams {
        label: None,
        m: None,
        sketch: SketchKind::Count,
        k0,
        outer: 30,
        inner: 25,
        restart: true,
        line_search: true,
        eta: None,
        gamma_u: 2.0,
        gamma_d: 2.0,
    }
}

fn baseline(max_iters: usize) -> BaselineParams {
    BaselineParams {
        label: None,
        max_iters,
        restart: true,
        line_search: true,
        eta: None,
        gamma_u: 2.0,
        gamma_d: 2.0,
    }
}

fn saga(batch: usize) -> SolverSpec {
    SolverSpec::Saga(SagaParams {
        label: None,
        batch,
        max_iters: None,
    })
}

fn main() -> sketchls::Result<()> {
    let spec = SynthSpec {
        n: 4000,
        d: 50,
        sparsity: 5,
        kappa: 100.0,
        transform: TransformKind::Identity,
        snr: 10.0,
        seed: 3,
    };
    let syn = gen_synthetic(&spec)?;
    let budgets = Budgets {
        max_epochs: 150.0,
        ..Budgets::default()
    };
    let solvers = [
        SolverSpec::AccPgd(baseline(2000)),
        SolverSpec::Pgd(baseline(2000)),
        SolverSpec::Gpis(sketched(30)),
        SolverSpec::AccGpis(sketched(30)),
        saga(10),
        saga(50),
        saga(100),
    ];
    println!("{:<10} {:>12} {:>10} {:>10} {:>10}", "solver", "final", "ep@1e-6", "ep@1e-10", "wall@1e-6");
    for s in &solvers {
        let out = run_solver(&syn.problem, Some(syn.oracle.f_star), s, 0, budgets)?;
        let r = RunSummary::from_output(&s.name(), 0, &out);
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.1}"));
        println!(
            "{:<10} {:>12.3e} {:>10} {:>10} {:>10}",
            r.solver,
            r.final_rel_error.unwrap_or(f64::NAN),
            cell(r.epochs_to_1e_6),
            cell(r.epochs_to_1e_10),
            r.wall_to_1e_6.map_or("-".to_string(), |w| format!("{w:.4}s")),
        );
    }
    Ok(())
}
