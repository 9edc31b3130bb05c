use std::path::Path;
use std::process::{Command, Output};

use nonholonomic::cli::CSV_HEADER;

fn suslov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_suslov")).args(args).output().expect("binary runs")
}

fn simulate_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    suslov(&args)
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["lps-exp", "lps-cay", "lp-exp"] {
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        let flags = ["--method", method, "--duration", "5"];
        assert!(simulate_to(&a, &flags).status.success());
        assert!(simulate_to(&b, &flags).status.success());
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{method}");
    }
}

#[test]
fn fig2_preset_writes_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    assert!(simulate_to(&out, &["--preset", "fig2"]).status.success());
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 1801);
}

#[test]
fn zero_duration_writes_initial_row_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zero.csv");
    assert!(simulate_to(&out, &["--duration", "0"]).status.success());
    let text = std::fs::read_to_string(out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let energy_err: f64 = rows[0].split(',').nth(18).unwrap().parse().unwrap();
    assert_eq!(energy_err, 0.0);
}

#[test]
fn stdout_when_no_output_path() {
    let out = suslov(&["simulate", "--duration", "0.05"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 7);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# short Cayley run\nmethod = lps-cay\ninertia = 2, 3, 4\npi0 = 0.5, -1\nduration = 1\n").unwrap();
    let out = dir.path().join("run.csv");
    let status = simulate_to(&out, &["--config", cfg.to_str().unwrap(), "--duration", "0.1"]).status;
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 12);
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(&first[11..14], &[0.5, -1.0, 0.0]);
    // ½(0.25/2 + 1/3)
    assert!((first[17] - 0.5 * (0.125 + 1.0 / 3.0)).abs() < 1e-15);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let cases: Vec<Vec<&str>> = vec![
        vec!["simulate", "--dt", "0"],
        vec!["simulate", "--duration", "-1"],
        vec!["simulate", "--inertia", "1,-2,3"],
        vec!["simulate", "--method", "rk4"],
        vec!["simulate", "--preset", "fig9"],
        vec!["simulate", "--pi0", "1,1,0.5"],
        vec!["simulate", "--config", "/nonexistent/run.cfg"],
        vec!["simulate", "--out", "/nonexistent/dir/out.csv"],
        vec!["simulate", "--bogus"],
        vec!["frobnicate"],
        vec!["convergence", "--dts", "0.01"],
        vec!["convergence", "--dts", "0.01,0.02,0.005"],
    ];
    for args in cases {
        let o = suslov(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    assert!(!out.exists());
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(suslov(&["--help"]).status.code(), Some(0));
    assert_eq!(suslov(&["--version"]).status.code(), Some(0));
}

#[test]
fn newton_failure_exits_with_two_and_names_the_step() {
    let o = suslov(&["simulate", "--duration", "1", "--newton-tol", "1e-300", "--newton-max-iter", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step 1 failed"));
}

#[test]
fn convergence_reports_first_order() {
    let o = suslov(&["convergence", "--method", "lps-exp", "--dts", "0.02,0.01,0.005"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dt,error,order"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0][2] >= 0.9);
    assert!(rows[0][1] > rows[2][1]);
}

#[test]
fn check_passes_and_is_deterministic() {
    let a = suslov(&["check", "--samples", "200"]);
    let b = suslov(&["check", "--samples", "200"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 12);
}
