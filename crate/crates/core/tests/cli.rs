//! End-to-end runs of the `sketchls` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sketchls::bench::bounds::BOUNDS_HEADER;
use sketchls::solvers::TRACE_HEADER;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sketchls"))
        .args(args)
        .env_remove("SKETCHLS_SEED")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn header(path: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(String::from).collect()
}

fn small_bundle(dir: &Path) -> String {
    let bundle = p(dir, "small.json");
    let stdout = ok(&["gen", "--n", "400", "--d", "16", "--s", "3", "--kappa", "10", "--seed", "2", "-o", &bundle]);
    assert!(stdout.contains("cond(A) = "));
    assert!(stdout.contains("f_star = "));
    bundle
}

#[test]
fn every_solver_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = small_bundle(dir.path());
    for (solver, extra) in [
        ("gpis", vec!["--k0", "10"]),
        ("acc-gpis", vec!["--line-search"]),
        ("pgd", vec!["--max-iters", "50"]),
        ("acc-pgd", vec!["--max-iters", "50", "--line-search"]),
        ("saga", vec!["--batch", "40", "--max-epochs", "5"]),
    ] {
        let trace = p(dir.path(), &format!("{solver}.csv"));
        let summary = p(dir.path(), &format!("{solver}.json"));
        let mut args = vec!["solve", &bundle, "--solver", solver, "--trace", &trace, "--summary", &summary];
        args.extend(extra);
        ok(&args);
        assert_eq!(header(&trace), TRACE_HEADER);
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
        assert_eq!(json["solver"], solver_label(solver));
        let mut r = csv::Reader::from_path(&trace).unwrap();
        let first = r.records().next().unwrap().unwrap()[5].parse::<f64>().unwrap();
        assert!(json["final_rel_error"].as_f64().unwrap() < first, "{solver}: {json}");
    }
}

fn solver_label(solver: &str) -> String {
    if solver == "saga" {
        "saga-40".into()
    } else {
        solver.into()
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["gen", "--n", "10", "--d", "2", "--s", "1"])), 2);
    assert_eq!(code(&run(&["solve", "x.json", "--solver", "newton"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    let out = run(&["gen", "--n", "50", "--d", "4", "-o", &p(dir.path(), "a.json")]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--s"));
}

#[test]
fn missing_bundle_is_a_runtime_error() {
    let out = run(&["solve", "/nonexistent/bundle.json", "--solver", "gpis"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bundle_version_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = small_bundle(dir.path());
    let mut json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&bundle).unwrap()).unwrap();
    json["version"] = serde_json::json!(7);
    let future = p(dir.path(), "future.json");
    fs::write(&future, json.to_string()).unwrap();
    let out = run(&["solve", &future, "--solver", "gpis", "--trace", &p(dir.path(), "t.csv")]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains('7'));
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = small_bundle(dir.path());
    let (a, b) = (p(dir.path(), "a.csv"), p(dir.path(), "b.csv"));
    let sa = p(dir.path(), "a.json");
    ok(&["solve", &bundle, "--solver", "gpis", "--seed", "31", "--trace", &a, "--summary", &sa]);
    let out = Command::new(env!("CARGO_BIN_EXE_sketchls"))
        .args(["solve", &bundle, "--solver", "gpis", "--trace", &b, "--summary", &sa])
        .env("SKETCHLS_SEED", "31")
        .output()
        .unwrap();
    assert!(out.status.success());
    let strip = |path: &str| -> Vec<String> {
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(|l| {
                let mut cells: Vec<&str> = l.split(',').collect();
                cells.remove(3);
                cells.join(",")
            })
            .collect()
    };
    assert_eq!(TRACE_HEADER[3], "wall_seconds");
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn low_rank_and_csv_generation() {
    let dir = tempfile::tempdir().unwrap();
    let lr = p(dir.path(), "lr.json");
    ok(&["gen", "--n", "200", "--d", "8", "--q", "6", "--rank", "2", "--kappa", "5", "-o", &lr, "--sidecar"]);
    assert!(dir.path().join("lr.a.bin").exists());
    ok(&["solve", &lr, "--solver", "acc-gpis", "--trace", &p(dir.path(), "lr.csv"), "--summary", &p(dir.path(), "lr.s.json")]);

    let data = p(dir.path(), "data.csv");
    let mut text = String::from("u,v,w,target\n");
    for i in 0..60 {
        let (u, v, w) = (i as f64 * 0.1, ((i * 7) % 11) as f64, ((i * 3) % 5) as f64 - 2.0);
        text.push_str(&format!("{u},{v},{w},{}\n", 2.0 * u - v + 0.5 * w));
    }
    fs::write(&data, text).unwrap();
    let reg = p(dir.path(), "reg.json");
    let stdout = ok(&["gen", "--csv", &data, "--irrelevant", "5", "-o", &reg]);
    assert!(stdout.contains("r = "));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&reg).unwrap()).unwrap();
    assert_eq!(json["a"]["cols"], 8);
}

#[test]
fn bench_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        r#"{
            "version": 1,
            "problem": {"source": "synthetic", "n": 500, "d": 12, "sparsity": 3, "kappa": 10, "transform": "identity", "seed": 5},
            "solvers": [
                {"solver": "acc-gpis", "inner": 15, "outer": 8},
                {"solver": "pgd", "max_iters": 100},
                {"solver": "saga", "batch": 50, "max_iters": 200}
            ],
            "budgets": {"max_epochs": 30},
            "repetitions": 2,
            "seed": 4,
            "output": "out"
        }"#,
    )
    .unwrap();
    let stdout = ok(&["bench", config.to_str().unwrap(), "--jobs", "2"]);
    assert!(stdout.contains("acc-gpis"));
    let out: PathBuf = dir.path().join("out");
    for f in ["long.csv", "summary.csv", "summary.json", "traces/acc-gpis_seed4.csv", "traces/saga-50_seed5.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    assert_eq!(header(out.join("long.csv").to_str().unwrap()), ["solver", "seed", "epochs", "wall_seconds", "rel_error"]);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"version": 1, "problem": {"source": "preset", "name": "syn1-small"}, "solvers": []}"#).unwrap();
    assert_eq!(code(&run(&["bench", bad.to_str().unwrap()])), 2);
}

#[test]
fn bounds_and_stepsizes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = small_bundle(dir.path());
    let csv_path = p(dir.path(), "bounds.csv");
    ok(&["bounds", &bundle, "--m", "2d,8d,400", "-o", &csv_path]);
    assert_eq!(header(&csv_path), BOUNDS_HEADER);
    let text = fs::read_to_string(&csv_path).unwrap();
    let ms: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ms, ["32", "128", "400"]);
    let stdout = ok(&["bounds", &bundle, "--m", "4d"]);
    assert!(stdout.starts_with("m,b_m,"));

    let steps = p(dir.path(), "steps.csv");
    let trials = p(dir.path(), "trials.csv");
    let out = run(&[
        "stepsizes", "--n", "300", "--d", "20", "--sparsity", "1,d", "--trials", "3", "--k", "5", "--N", "2", "-o", &steps,
        "--trials-output", &trials,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank test"));
    assert_eq!(fs::read_to_string(&steps).unwrap().lines().count(), 3);
    assert_eq!(fs::read_to_string(&trials).unwrap().lines().count(), 7);
    assert_eq!(code(&run(&["stepsizes", "--sparsity", "0"])), 2);
}
