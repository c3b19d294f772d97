use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clap::builder::PossibleValuesParser;

use sketchls::bench::config::{BaselineParams, BudgetSpec, SagaParams, SketchedParams};
use sketchls::bench::stepsizes::write_trials_csv;
use sketchls::bench::{
    bench, bounds_sweep, mann_whitney_greater, parse_m_list, render_table, run_solver, stepsize_sweep,
    write_bounds_csv, write_run, write_stepsizes_csv, BoundsOptions, Preset, ProblemSource, RunConfig, RunSummary,
    SolverSpec, StepsizeOptions, SOLVER_NAMES,
};
use sketchls::data::synthetic::{LowRankSpec, SynthSpec, TransformKind};
use sketchls::data::Bundle;
use sketchls::{Error, Result, SketchKind};

#[derive(Parser)]
#[command(name = "sketchls", version, about = "Sketched projected-gradient solvers for constrained least squares")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem bundle with a certified oracle
    Gen(GenArgs),
    /// Run one solver on a bundle
    Solve(SolveArgs),
    /// Run a JSON benchmark configuration
    Bench(BenchArgs),
    /// Sweep the theoretical bounds over sketch sizes
    Bounds(BoundsArgs),
    /// Mean accepted step size versus solution sparsity
    Stepsizes(StepsizesArgs),
}

#[derive(Args)]
struct GenArgs {
    /// syn1-small, syn2-small or syn3-small
    #[arg(long, conflicts_with_all = ["n", "csv"])]
    preset: Option<Preset>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Sparsity of the ground truth
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value_t = 100.0)]
    kappa: f64,
    #[arg(long, default_value_t = 10.0)]
    snr: f64,
    /// Use a random orthogonal dictionary
    #[arg(long)]
    orthogonal: bool,
    /// Responses of a low-rank matrix problem (needs --rank)
    #[arg(long, requires = "rank")]
    q: Option<usize>,
    #[arg(long, requires = "q")]
    rank: Option<usize>,
    /// Regression CSV (features, target last unless --target is given)
    #[arg(long, conflicts_with = "n")]
    csv: Option<PathBuf>,
    #[arg(long)]
    relevant: Option<usize>,
    #[arg(long, default_value_t = 0)]
    irrelevant: usize,
    /// Zero-based target column
    #[arg(long)]
    target: Option<usize>,
    #[arg(long, env = "SKETCHLS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
    /// Store matrices in binary sidecar files
    #[arg(long)]
    sidecar: bool,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long)]
    max_epochs: Option<f64>,
    #[arg(long)]
    max_seconds: Option<f64>,
    /// Stop once the relative error falls below this value
    #[arg(long)]
    target_error: Option<f64>,
    #[arg(long)]
    record_every: Option<usize>,
}

impl BudgetArgs {
    fn spec(&self) -> BudgetSpec {
        BudgetSpec {
            max_epochs: self.max_epochs,
            max_seconds: self.max_seconds,
            target_rel_error: self.target_error,
            record_every: self.record_every,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    bundle: PathBuf,
    #[arg(long, value_parser = PossibleValuesParser::new(SOLVER_NAMES))]
    solver: String,
    /// Sketch size (default 8d)
    #[arg(long)]
    m: Option<usize>,
    /// Inner iterations per outer loop
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Outer loops
    #[arg(long = "N", default_value_t = 20)]
    outer: usize,
    /// Warm-start iterations (0 disables the warm start)
    #[arg(long, default_value_t = 0)]
    k0: usize,
    #[arg(long, default_value = "count")]
    sketch: SketchKind,
    #[arg(long)]
    line_search: bool,
    /// Fixed step, or the first trial step with --line-search
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    no_restart: bool,
    /// SAGA minibatch size
    #[arg(long)]
    batch: Option<usize>,
    /// Iterations for pgd, acc-pgd and saga
    #[arg(long)]
    max_iters: Option<usize>,
    #[command(flatten)]
    budgets: BudgetArgs,
    #[arg(long, env = "SKETCHLS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "trace.csv")]
    trace: PathBuf,
    #[arg(long, default_value = "summary.json")]
    summary: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    bundle: PathBuf,
    /// Comma-separated sketch sizes; `8d` means 8 times the dimension
    #[arg(long, default_value = "2d,4d,8d,16d")]
    m: String,
    #[arg(long, default_value_t = 2.0)]
    theta: f64,
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Account for line search (beta = 2)
    #[arg(long)]
    line_search: bool,
    #[arg(long, default_value = "gaussian")]
    sketch: SketchKind,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StepsizesArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    d: usize,
    #[arg(long, default_value_t = 10.0)]
    kappa: f64,
    #[arg(long, default_value_t = 10.0)]
    snr: f64,
    /// Comma-separated sparsities; `d` means the dimension
    #[arg(long, default_value = "1,2,5,10,20,50,d")]
    sparsity: String,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long = "N", default_value_t = 5)]
    outer: usize,
    #[arg(long, default_value = "count")]
    sketch: SketchKind,
    #[arg(long, env = "SKETCHLS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write one row per trial
    #[arg(long)]
    trials_output: Option<PathBuf>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let source = if let Some(name) = args.preset {
        ProblemSource::Preset { name, seed: args.seed }
    } else if let Some(path) = args.csv {
        ProblemSource::Csv {
            path,
            relevant: args.relevant,
            irrelevant: args.irrelevant,
            target_column: args.target,
            seed: args.seed,
        }
    } else {
        let (n, d) = match (args.n, args.d) {
            (Some(n), Some(d)) => (n, d),
            _ => return Err(Error::InvalidConfig("give --preset, --csv, or both --n and --d".into())),
        };
        match (args.q, args.rank) {
            (Some(q), Some(rank)) => ProblemSource::LowRank(LowRankSpec {
                n,
                d,
                q,
                rank,
                kappa: args.kappa,
                snr: args.snr,
                seed: args.seed,
            }),
            _ => ProblemSource::Synthetic(SynthSpec {
                n,
                d,
                sparsity: args
                    .s
                    .ok_or_else(|| Error::InvalidConfig("--s is required for sparse problems".into()))?,
                kappa: args.kappa,
                transform: if args.orthogonal {
                    TransformKind::RandomOrthogonal
                } else {
                    TransformKind::Identity
                },
                snr: args.snr,
                seed: args.seed,
            }),
        }
    };
    let bundle = source.materialize(Path::new("."))?;
    bundle.save(&args.output, args.sidecar)?;
    let sv = bundle.problem.a().clone().singular_values();
    let cond = sv.max() / sv.min();
    println!("cond(A) = {cond:.6e}");
    match bundle.problem.constraint().radius() {
        Some(r) => println!("r = {r:.6e}"),
        None => println!("r = none"),
    }
    if let Some(o) = &bundle.oracle {
        println!("f_star = {:.17e}", o.f_star);
        println!("certificate = {:.3e}", o.certificate);
    }
    println!("wrote {}", args.output.display());
    Ok(())
}

fn solver_spec(args: &SolveArgs) -> Result<SolverSpec> {
    let sketched = || SketchedParams {
        label: None,
        m: args.m,
        sketch: args.sketch,
        k0: args.k0,
        outer: args.outer,
        inner: args.k,
        restart: !args.no_restart,
        line_search: args.line_search,
        eta: args.eta,
        gamma_u: 2.0,
        gamma_d: 2.0,
    };
    let baseline = || BaselineParams {
        label: None,
        max_iters: args.max_iters.unwrap_or(1000),
        restart: !args.no_restart,
        line_search: args.line_search,
        eta: args.eta,
        gamma_u: 2.0,
        gamma_d: 2.0,
    };
    Ok(match args.solver.as_str() {
        "gpis" => SolverSpec::Gpis(sketched()),
        "acc-gpis" => SolverSpec::AccGpis(sketched()),
        "pgd" => SolverSpec::Pgd(baseline()),
        "acc-pgd" => SolverSpec::AccPgd(baseline()),
        "saga" => SolverSpec::Saga(SagaParams {
            label: None,
            batch: args
                .batch
                .ok_or_else(|| Error::InvalidConfig("saga needs --batch".into()))?,
            max_iters: args.max_iters,
        }),
        other => return Err(Error::InvalidConfig(format!("unknown solver `{other}`"))),
    })
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let spec = solver_spec(&args)?;
    let budgets = args.budgets.spec().budgets();
    budgets.validate()?;
    let bundle = Bundle::load(&args.bundle)?;
    let f_star = bundle.oracle.as_ref().map(|o| o.f_star);
    let out = run_solver(&bundle.problem, f_star, &spec, args.seed, budgets)?;
    let summary = RunSummary::from_output(&spec.name(), args.seed, &out);
    write_run(&out, &summary, &args.trace, &args.summary)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let cfg = RunConfig::load(&args.config)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let output = args
        .out
        .or_else(|| cfg.output.as_ref().map(|o| base.join(o)))
        .unwrap_or_else(|| PathBuf::from("bench-out"));
    let bundle = cfg.problem.materialize(base)?;
    let report = bench(&cfg, &bundle, &output, args.jobs)?;
    print!("{}", render_table(&report.summaries));
    for r in report.runs.iter().filter(|r| r.failure.is_some()) {
        eprintln!("stalled: {} seed {}: {}", r.solver, r.seed, r.failure.as_deref().unwrap_or(""));
    }
    println!("wrote {}", output.display());
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let bundle = Bundle::load(&args.bundle)?;
    let opts = BoundsOptions {
        ms: parse_m_list(&args.m, bundle.problem.dim())?,
        theta: args.theta,
        k: args.k,
        beta: if args.line_search { 2.0 } else { 1.0 },
        sketch: args.sketch,
    };
    let rows = bounds_sweep(&bundle, &opts)?;
    write_bounds_csv(sink(args.output.as_deref())?, &rows)
}

fn cmd_stepsizes(args: StepsizesArgs) -> Result<()> {
    let opts = StepsizeOptions {
        n: args.n,
        d: args.d,
        kappa: args.kappa,
        snr: args.snr,
        sparsities: parse_m_list(&args.sparsity, args.d)?,
        trials: args.trials,
        m: args.m,
        sketch: args.sketch,
        inner: args.k,
        outer: args.outer,
        seed: args.seed,
    };
    let (rows, trials) = stepsize_sweep(&opts)?;
    write_stepsizes_csv(sink(args.output.as_deref())?, &rows)?;
    if let Some(path) = &args.trials_output {
        write_trials_csv(BufWriter::new(File::create(path)?), &trials)?;
    }
    let (lo, hi) = (opts.sparsities.iter().min(), opts.sparsities.iter().max());
    if let (Some(&lo), Some(&hi)) = (lo, hi) {
        let pick = |s: usize| trials.iter().filter(|t| t.sparsity == s).map(|t| t.mean_eta).collect::<Vec<_>>();
        if lo != hi {
            if let Some(t) = mann_whitney_greater(&pick(lo), &pick(hi)) {
                eprintln!("rank test eta(s={lo}) > eta(s={hi}): U = {}, p = {:.3e}", t.u, t.p_value);
            }
        }
    }
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::BundleVersion { .. } | Error::Parse { .. } | Error::Domain(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Stepsizes(a) => cmd_stepsizes(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
