//! End-to-end tests of the `alig` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn alig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alig"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

const BASE_CONFIG: &str = "problem.kind = interp_least_squares\n\
                           problem.n = 6\n\
                           problem.p = 8\n\
                           rule.variant = alig\n\
                           rule.eta = 1.0\n\
                           momentum.mu = 0\n\
                           region.variant = unconstrained\n\
                           epochs = 5\n";

#[test]
fn version_prints_and_succeeds() {
    let out = alig(&["version"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains(env!("CARGO_PKG_VERSION")), "{stdout}");
}

#[test]
fn run_writes_outputs_and_reports_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    write(&config, BASE_CONFIG);
    let out_dir = dir.path().join("results");
    let out = alig(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("trace.csv").exists());
    assert!(out_dir.join("summary.json").exists());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("final_full_loss"), "{stdout}");
    let summary = fs::read_to_string(out_dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 3"), "{summary}");
}

#[test]
fn config_errors_exit_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    write(&config, &format!("{BASE_CONFIG}learning_rate_scheduel = cosine\n"));
    let out = alig(&["run", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("unknown key"), "{stderr}");
    assert!(stderr.contains("did you mean"), "{stderr}");

    write(&config, &format!("{BASE_CONFIG}momentum.flavor = nesterov\nmomentum.mu = 1.2\n"));
    let out = alig(&["run", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("momentum.mu"));
}

#[test]
fn sweep_renders_tables_and_isolates_bad_cells() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    write(&config, BASE_CONFIG);
    let grid = dir.path().join("grid.cfg");
    write(&grid, "momentum.mu = 0, 0.9\nrule.eta = 0.5, -1\n");
    let out_dir = dir.path().join("sweep");
    let out = alig(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--grid",
        grid.to_str().unwrap(),
        "--parallelism",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(out_dir.join("table.csv")).unwrap();
    assert_eq!(table.lines().count(), 5); // header + 4 cells
    assert!(table.contains("failed"));
    assert!(table.contains("ok"));
    assert!(out_dir.join("table.txt").exists());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("2 failed"), "{stdout}");
}

#[test]
fn compare_runs_rules_side_by_side() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    write(&config, BASE_CONFIG);
    let rules = dir.path().join("rules.cfg");
    write(
        &rules,
        "variant = alig\neta = 1.0\n\nvariant = constant_lr\nlr = 0.05\n",
    );
    let out_dir = dir.path().join("cmp");
    let out = alig(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--rules",
        rules.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("0_alig/trace.csv").exists());
    assert!(out_dir.join("1_constant_lr/trace.csv").exists());
    assert!(out_dir.join("step_sizes.csv").exists());
    assert!(out_dir.join("comparison.csv").exists());

    // a single rule is rejected
    write(&rules, "variant = alig\n");
    let out = alig(&[
        "compare",
        "--config",
        config.to_str().unwrap(),
        "--rules",
        rules.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("at least 2"));
}

#[test]
fn gradcheck_passes_and_fails_loudly() {
    let out = alig(&["gradcheck", "--problem", "interp_least_squares,n=6,p=8,seed=1", "--trials", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("PASS"));

    let out = alig(&["gradcheck", "--problem", "mystery,n=6"]);
    assert!(!out.status.success());
}

#[test]
fn aborted_runs_exit_nonzero_but_flush_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    write(
        &config,
        "problem.kind = two_moons_mlp\nproblem.n = 60\nproblem.width = 8\n\
         rule.variant = alig\nrule.eta = 1000\nmomentum.mu = 0.9\n\
         region.variant = unconstrained\nepochs = 20\nseed = 9\n",
    );
    let out_dir = dir.path().join("diverged");
    let out = alig(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("diverged"), "{stderr}");
    // partial trace flushed, no summary for an aborted run
    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 1, "partial trace missing");
    assert!(!out_dir.join("summary.json").exists());
}
