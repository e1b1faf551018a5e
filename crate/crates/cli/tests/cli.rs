use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nehari(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nehari"))
        .args(args)
        .args(["--threads", "2"])
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("missing {key} in\n{text}"))
        .trim()
        .to_string()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.conf");
    fs::write(
        &path,
        "gamma = 0.5\np = 3\ndomain.mode = interval\ndomain.L = 10\ndomain.n = 201\n\
         V.expr = 1 + x^2\na.expr = exp(-x^2)\nb.expr = 1\n",
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn fiber_two_critical_points() {
    let out = nehari(&[
        "fiber", "--e", "2", "--f", "1", "--g", "1", "--lambda", "0.1", "--gamma", "0.5", "--p",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "classification"), "TwoCritical");
    let tp: f64 = field(&text, "t_plus").parse().unwrap();
    let tm: f64 = field(&text, "t_minus").parse().unwrap();
    assert!(0.0 < tp && tp < tm);
}

#[test]
fn fiber_without_critical_points() {
    let out = nehari(&[
        "fiber", "--e", "1", "--f", "1", "--g", "1", "--lambda", "1", "--gamma", "0.5", "--p", "3",
    ]);
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "classification"), "NoCritical");
}

#[test]
fn invalid_arguments_exit_with_usage_code() {
    let out = nehari(&[
        "fiber", "--e", "1", "--f", "1", "--g", "1", "--lambda", "0", "--gamma", "0.5", "--p", "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = nehari(&[
        "fiber", "--e", "1", "--f", "1", "--g", "1", "--lambda", "1", "--gamma", "0.5", "--p",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.conf");
    let out = nehari(&["bounds", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    fs::write(&path, "gamma = 1.5\np = 3\n").unwrap();
    let out = nehari(&["bounds", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_and_solve_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_dir = dir.path().join("out");
    let out_s = out_dir.to_str().unwrap();

    let out = nehari(&["bounds", "--config", &cfg, "--out", out_s]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in [
        "bounds.csv",
        "lambda_star_minimizer.csv",
        "eigenfunction.csv",
    ] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }

    let out = nehari(&[
        "solve", "--config", &cfg, "--lambda", "0.5", "--branch", "both", "--out", out_s,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["solution_plus.csv", "solution_minus.csv", "report.txt"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
}

#[test]
fn sweep_and_plot_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let csv = dir.path().join("sweep.csv");
    let svg_a = dir.path().join("a.svg");
    let svg_b = dir.path().join("b.svg");

    let out = nehari(&[
        "sweep",
        "--config",
        &cfg,
        "--lambda-min",
        "0.05",
        "--lambda-max",
        "1.0",
        "--steps",
        "8",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg_a.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(&csv).unwrap();
    let rows = table.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 8);

    let out = nehari(&[
        "plot",
        "--in",
        csv.to_str().unwrap(),
        "--out",
        svg_b.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(fs::read(&svg_a).unwrap(), fs::read(&svg_b).unwrap());
    assert!(fs::read_to_string(&svg_b).unwrap().starts_with("<svg"));
}
