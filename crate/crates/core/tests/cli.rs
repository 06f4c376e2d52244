use std::path::Path;
use std::process::{Command, Output};

fn tiltflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiltflow")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("gauss1.json"), r#"{"type": "gaussian", "sigma": 1}"#).unwrap();
    std::fs::write(dir.path().join("twoatom.json"), r#"{"type": "atoms", "points": [-1, 1], "weights": [0.5, 0.5]}"#)
        .unwrap();
    std::fs::write(dir.path().join("uniform.json"), r#"{"type": "uniform", "lo": -1, "hi": 1}"#).unwrap();
    dir
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = workdir();
    let run = |out: &str| {
        let o = tiltflow(
            &["simulate", "--measure", "twoatom.json", "--paths", "10", "--seed", "7", "--checkpoints", "0.1,0.5", "--out", out],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with("simulated 10 paths"));
    };
    run("r1.csv");
    run("r2.csv");
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(read("r1.csv"), read("r2.csv"));
    assert_eq!(read("r1.csv.checkpoints.csv"), read("r2.csv.checkpoints.csv"));

    let text = String::from_utf8(read("r1.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# tiltflow "));
    assert!(lines.next().unwrap().starts_with("path_id,T_hat,W_T,n_steps,stop_reason"));
    assert_eq!(lines.count(), 10);
    let cps = String::from_utf8(read("r1.csv.checkpoints.csv")).unwrap();
    assert_eq!(cps.lines().count(), 2 + 20);
}

#[test]
fn seed_changes_the_output() {
    let dir = workdir();
    for (seed, out) in [("1", "a.csv"), ("2", "b.csv")] {
        let o = tiltflow(&["simulate", "--measure", "twoatom.json", "--paths", "5", "--seed", seed, "--out", out], dir.path());
        assert!(o.status.success());
    }
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_ne!(a.lines().nth(2), b.lines().nth(2));
}

#[test]
fn solve_c_and_moments() {
    let dir = workdir();
    let o = tiltflow(&["solve-c", "--measure", "twoatom.json", "--a", "0", "--b", "3.2"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.0);

    let o = tiltflow(&["solve-c", "--measure", "gauss1.json", "--a", "1", "--b", "1"], dir.path());
    assert!((stdout(&o).trim().parse::<f64>().unwrap() - 2.0).abs() < 1e-9);

    let o = tiltflow(&["moments", "--measure", "gauss1.json", "--b", "1", "--c", "2"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["a"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["A"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let expected_v = std::f64::consts::E / std::f64::consts::SQRT_2;
    assert!((v["V"].as_f64().unwrap() - expected_v).abs() < 1e-9);

    let o = tiltflow(&["moments", "--measure", "twoatom.json", "--b", "0.5", "--c", "-0.3"], dir.path());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["a"].as_f64().unwrap() + 0.3f64.tanh()).abs() < 1e-12);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = workdir();
    let cases: [&[&str]; 5] = [
        &["moments", "--measure", "missing.json", "--b", "0", "--c", "0"],
        &["simulate", "--measure", "gauss1.json", "--dt-max", "-1", "--out", "x.csv"],
        &["simulate", "--measure", "gauss1.json", "--paths", "0", "--out", "x.csv"],
        &["verify", "--suite", "unilc", "--measure", "uniform.json", "--paths", "1000"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = tiltflow(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn verify_emits_reports() {
    let dir = workdir();
    let o = tiltflow(&["verify", "--suite", "derivatives", "--measure", "twoatom.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<serde_json::Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(reports.len(), 4);
    assert!(reports.iter().all(|r| r["passed"] == true));

    let o = tiltflow(
        &["verify", "--suite", "compact", "--measure", "uniform.json", "--paths", "1000", "--out", "v.json", "--quiet"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(file["header"]["seed"], 0);
    assert_eq!(file["header"]["config_hash"].as_str().unwrap().len(), 64);
    assert!(file["reports"].as_array().unwrap().iter().all(|r| r["passed"] == true));
}

#[test]
fn tail_reports_a_degenerate_fit() {
    let dir = workdir();
    let o = tiltflow(&["simulate", "--measure", "gauss1.json", "--paths", "10000", "--out", "g.csv", "--quiet"], dir.path());
    assert!(o.status.success());
    let o = tiltflow(&["tail", "--input", "g.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["degenerate"], true);
}
