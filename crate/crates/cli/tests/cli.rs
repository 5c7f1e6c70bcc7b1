use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use rpdhg_cli::experiment::{csv_string, ExperimentRow, CSV_HEADER};
use rpdhg_cli::instance::Family;
use rpdhg_cli::{run_experiment, ExperimentSpec};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn rpdhg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpdhg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn solve_lp_gamma_to_distance_target() {
    let out = rpdhg(&["solve", "--family", "lp_gamma", "--gamma", "0.01", "--target", "ed:1e-10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_stdout(&out);
    assert_eq!(v["stats"]["status"], "optimal_tol");
    assert!(v["stats"]["ed_final"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn solve_minimal_fixture() {
    let path = fixture("single.mps");
    let out = rpdhg(&["solve", path.to_str().unwrap(), "--target", "er:1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let obj = v["solution"]["objective_original"].as_f64().unwrap();
    assert!((obj - 1.0).abs() < 1e-6, "{obj}");
    let x = v["solution"]["x_original"][0].as_f64().unwrap();
    assert!((x - 1.0).abs() < 1e-6);
}

#[test]
fn learned_steps_with_complete_preconditioner_record_budget() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture("transport.mps");
    let out = rpdhg(&[
        "solve",
        path.to_str().unwrap(),
        "--precondition",
        "complete",
        "--stepsize",
        "learn",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stats: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("transport.stats.json")).unwrap()).unwrap();
    assert_eq!(stats["stepsize"]["probe_budget"], 25000);
    assert_eq!(stats["stepsize"]["probe_steps"], 25000);
    assert_eq!(stats["stepsize"]["mode"], "learn");
    assert_eq!(stats["precondition"]["mode"], "complete");
    assert!((stats["precondition"]["kappa_after"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    let sol: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("transport.solution.json")).unwrap()).unwrap();
    let obj = sol["objective_original"].as_f64().unwrap();
    assert!((obj - 55.0).abs() / 55.0 < 1e-3, "{obj}");
}

#[test]
fn budget_exhaustion_exits_with_two() {
    let out = rpdhg(&["solve", "--family", "family2", "--gamma", "0.01", "--max-steps", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_stdout(&out)["stats"]["status"], "step_limit");
}

#[test]
fn input_errors_exit_with_one() {
    for args in [
        vec!["solve", "/nonexistent/file.mps"],
        vec!["solve", "--family", "family9", "--gamma", "0.1"],
        vec!["solve", "--family", "family1", "--gamma", "2.0"],
        vec!["solve", "--family", "family1", "--gamma", "0.1", "--target", "zz:1"],
    ] {
        let out = rpdhg(&args);
        assert_ne!(out.status.code(), Some(0), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = rpdhg(&["solve", "/nonexistent/file.mps"]);
    assert_eq!(out.status.code(), Some(1));
    let path = fixture("single.mps");
    let out = rpdhg(&["solve", path.to_str().unwrap(), "--target", "ed:1e-8"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_family_three() {
    let out = rpdhg(&["analyze", "--family", "family3", "--gamma", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json_stdout(&out);
    let mu = v["mu_p"].as_f64().unwrap();
    assert!((mu - 0.1f64.sin()).abs() < 1e-6, "{mu}");
    for key in ["N_bound", "N_hat_bound", "D_bound", "T_bound", "provenance"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn analyze_lp_gamma_grid() {
    let mut ns = Vec::new();
    for g in ["1", "0.05", "0.01", "0.001"] {
        let out = rpdhg(&["analyze", "--family", "lp_gamma", "--gamma", g]);
        assert_eq!(out.status.code(), Some(0));
        let v = json_stdout(&out);
        assert!((v["mu_p"].as_f64().unwrap() - 1.0).abs() < 1e-6);
        ns.push(v["N_bound"].as_f64().unwrap());
    }
    assert!(ns[0].is_finite());
    let small = &ns[1..];
    let lo = small.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = small.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo < 1.05, "{ns:?}");
}

#[test]
fn analyze_zero_rhs_is_degenerate() {
    let path = fixture("zero_rhs.mps");
    let out = rpdhg(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn analyze_csv_has_one_row() {
    let out = rpdhg(&["analyze", "--family", "family1", "--gamma", "0.3", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("instance,mu_p"));
}

#[test]
fn precondition_writes_row_orthonormal_instance() {
    let dir = tempfile::tempdir().unwrap();
    let dest = dir.path().join("p.json");
    let path = fixture("diet.mps");
    let out = rpdhg(&["precondition", path.to_str().unwrap(), "--out", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dest).unwrap()).unwrap();
    assert!((v["kappa_after"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(v["kappa_before"].as_f64().unwrap() > 1.0);
    assert_eq!(v["lp"]["m"], 2);
}

fn spec(family: Family, grid: &[f64], target: &str) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(family, grid.to_vec());
    s.target = target.parse().unwrap();
    s
}

#[test]
fn family_one_steps_are_flat() {
    let out = run_experiment(&spec(Family::Family1, &[1.0, 0.3, 0.1, 0.03, 0.01], "ed:1e-10")).unwrap();
    assert!(out.rows.iter().all(ExperimentRow::is_success));
    let slope = out.summary.slope_actual_steps.unwrap();
    assert!((-0.1..=0.1).contains(&slope), "{slope}");
    assert!(out.summary.bound_violations.is_empty());
}

#[test]
fn family_four_slope_doubles_family_two() {
    let grid = [0.02, 0.01, 0.005, 0.0025];
    let two = run_experiment(&spec(Family::Family2, &grid, "ed:1e-10")).unwrap();
    let four = run_experiment(&spec(Family::Family4, &grid, "ed:1e-10")).unwrap();
    let (s2, s4) = (two.summary.slope_actual_steps.unwrap(), four.summary.slope_actual_steps.unwrap());
    let ratio = s4 / s2;
    assert!((1.6..=2.4).contains(&ratio), "{s2} {s4}");
}

#[test]
fn experiment_is_deterministic_and_ordered() {
    let s = spec(Family::Family3, &[0.2, 0.1, 0.05], "er:1e-6");
    let strip = |rows: &[ExperimentRow]| -> Vec<ExperimentRow> {
        rows.iter().cloned().map(|r| ExperimentRow { wall_time: 0.0, ..r }).collect()
    };
    let a = run_experiment(&s).unwrap();
    let b = run_experiment(&s).unwrap();
    assert_eq!(csv_string(&strip(&a.rows)).unwrap(), csv_string(&strip(&b.rows)).unwrap());
    let ids: Vec<&str> = a.rows.iter().map(|r| r.instance_id.as_str()).collect();
    assert_eq!(ids, ["family3_0.2", "family3_0.1", "family3_0.05"]);
}

#[test]
fn experiment_cli_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = rpdhg(&[
        "experiment",
        "--family",
        "lp_gamma",
        "--gamma-grid",
        "0.5,0.1",
        "--target",
        "ed:1e-8",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), csv);
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rows"], 2);
}

#[test]
fn single_thread_pool_matches() {
    let spec_dir = tempfile::tempdir().unwrap();
    let spec_path = spec_dir.path().join("spec.json");
    std::fs::write(
        &spec_path,
        r#"{"family": "family2", "gamma_grid": [0.3, 0.2], "target": "er:1e-6"}"#,
    )
    .unwrap();
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_rpdhg"))
            .args(["experiment", "--spec", spec_path.to_str().unwrap()])
            .env("RLP_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        let text = String::from_utf8(out.stdout).unwrap();
        // drop the wall_time column
        text.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn corpus_experiment_reads_every_file() {
    let mut s = ExperimentSpec::new(Family::MpsCorpus, vec![]);
    s.corpus_dir = Some(fixture(""));
    let out = run_experiment(&s).unwrap();
    assert_eq!(out.rows.len(), 11);
    assert!(out.rows.iter().all(|r| r.gamma.is_none()));
    let zero = out.rows.iter().find(|r| r.instance_id == "zero_rhs.mps").unwrap();
    assert!(zero.status.contains("degenerate"), "{}", zero.status);
}
