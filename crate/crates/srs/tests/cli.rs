//! End-to-end tests of the binary: exit codes, output files, and replay.

use std::process::{Command, Output};

fn srs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn success_paths_exit_zero() {
    for args in [
        vec!["coverage", "--n", "4", "--m", "2", "--K", "2"],
        vec!["coverage", "--n", "4", "--m", "2", "--K", "2", "--mode", "enumerate"],
        vec!["coverage", "--table", "--n", "100"],
        vec!["occupancy", "--classical", "--n", "4"],
        vec!["occupancy", "--n", "6", "--m", "2"],
        vec!["schedule", "--n", "10", "--m", "3", "--K", "5"],
        vec!["genbound", "--n", "30", "--m", "5", "--K", "8"],
        vec!["genbound", "--sweep", "--n-max", "6", "--k-max", "3"],
    ] {
        let out = srs(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?} failed: {}", stderr(&out));
    }
}

#[test]
fn known_values_on_stdout() {
    let out = srs(&["coverage", "--n", "4", "--m", "2", "--K", "2"]);
    let text = stdout(&out);
    assert!(text.contains("1/6"), "{text}");
    assert!(text.contains("2/3"), "{text}");

    let out = srs(&["occupancy", "--classical", "--n", "4"]);
    assert!(stdout(&out).contains("25/3"));

    let out = srs(&["coverage", "--table", "--n", "1000", "--ratios", "5,10,20", "--epochs", "10,20,30"]);
    let text = stdout(&out);
    for cell in ["40.1", "64.2", "78.5", "65.1", "87.8", "95.8", "89.3", "98.8", "99.9"] {
        assert!(text.contains(cell), "missing {cell} in:\n{text}");
    }
}

#[test]
fn invalid_configuration_exits_two() {
    for args in [
        vec!["coverage", "--n", "4", "--m", "9", "--K", "2"],
        vec!["coverage", "--n", "4"],
        vec!["occupancy", "--n", "4"],
        vec!["genbound", "--n", "10", "--m", "2", "--K", "3", "--delta", "1.5"],
        vec!["train", "--benchmark", "pl-quadratic", "--alpha", "fast"],
        vec!["train", "--K", "5"],
    ] {
        let out = srs(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
    // Unknown flags and subcommands are also usage errors.
    assert_eq!(srs(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(srs(&["coverage", "--bogus"]).status.code(), Some(2));
}

#[test]
fn numeric_scope_rejections_exit_three() {
    let out = srs(&["coverage", "--n", "500", "--m", "5", "--K", "2"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("exact mode"));

    let out = srs(&["coverage", "--n", "30", "--m", "10", "--K", "4", "--mode", "enumerate"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("enumeration guard"));

    // Raising the limit opens up larger exact instances.
    let out = srs(&["coverage", "--n", "500", "--m", "5", "--K", "2", "--limit", "600"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn divergence_exits_four() {
    let out = srs(&[
        "train", "--benchmark", "pl-quadratic", "--d", "3", "--n", "20", "--K", "10", "--alpha",
        "2.5",
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("diverged"));
}

#[test]
fn step_size_scope_check_exits_two() {
    // Too large for the bound (alpha >= 1/L) but still numerically stable:
    // training succeeds, bound verification refuses.
    let out = srs(&[
        "train", "--benchmark", "pl-quadratic", "--d", "3", "--n", "20", "--K", "10", "--alpha",
        "0.25", "--verify-bound",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("step size"));
}

#[test]
fn out_dir_files_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("run");
    let out = srs(&[
        "--seed",
        "5",
        "--out",
        out_path.to_str().unwrap(),
        "schedule",
        "--n",
        "10",
        "--m",
        "3",
        "--interval",
        "2",
        "--K",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for file in ["schedule.json", "coverage_curve.csv", "manifest.json"] {
        assert!(out_path.join(file).exists(), "missing {file}");
    }

    // Schedule JSON carries the policy and per-epoch sorted subsets.
    let schedule: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_path.join("schedule.json")).unwrap()).unwrap();
    assert_eq!(schedule["n"], 10);
    assert_eq!(schedule["m"], 3);
    assert_eq!(schedule["R"], 2);
    assert_eq!(schedule["K"], 6);
    assert!(schedule["seed"].is_u64());
    let epochs = schedule["epochs"].as_array().unwrap();
    assert_eq!(epochs.len(), 6);
    let first: Vec<u64> = epochs[0]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert!(first.windows(2).all(|w| w[0] < w[1]), "subsets are sorted");

    // CSV header of the curve is pinned.
    let curve = std::fs::read_to_string(out_path.join("coverage_curve.csv")).unwrap();
    assert!(curve.starts_with("epoch,distinct_count\n"));

    let manifest_path = out_path.join("manifest.json");
    let replay = srs(&["replay", "--manifest", manifest_path.to_str().unwrap()]);
    assert_eq!(replay.status.code(), Some(0), "{}", stderr(&replay));
    assert!(stdout(&replay).contains("byte-identically"));

    // Tampering with a recorded digest must be caught.
    let mut manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&manifest_path).unwrap()).unwrap();
    manifest["outputs"]["schedule.json"] = serde_json::Value::String("0".repeat(64));
    std::fs::write(&manifest_path, serde_json::to_vec_pretty(&manifest).unwrap()).unwrap();
    let replay = srs(&["replay", "--manifest", manifest_path.to_str().unwrap()]);
    assert_eq!(replay.status.code(), Some(1), "{}", stderr(&replay));
    assert!(stderr(&replay).contains("replay mismatch"));
}

#[test]
fn coverage_csv_columns_are_pinned() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("cov");
    let out = srs(&[
        "--out",
        out_path.to_str().unwrap(),
        "coverage",
        "--n",
        "4",
        "--m",
        "2",
        "--K",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_path.join("coverage_pmf.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,m,K,l,probability_numerator,probability_denominator,probability_float"
    );
    assert!(csv.lines().any(|l| l.starts_with("4,2,2,3,2,3,")));

    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_path.join("coverage_pmf.json")).unwrap())
            .unwrap();
    assert_eq!(json["config"]["n"], 4);
    assert_eq!(json["config"]["K"], 2);
    assert_eq!(json["source"], "exact");
}

#[test]
fn train_seed_changes_outputs_but_replay_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    let base = [
        "train",
        "--benchmark",
        "pl-quadratic",
        "--d",
        "3",
        "--n",
        "16",
        "--m",
        "4",
        "--K",
        "15",
        "--noise",
        "0.5",
    ];
    for (seed, path) in [("1", &a), ("1", &b), ("2", &c)] {
        let mut args = vec!["--seed", seed, "--out", path.to_str().unwrap()];
        args.extend_from_slice(&base);
        assert_eq!(srs(&args).status.code(), Some(0));
    }
    let read = |p: &std::path::Path| std::fs::read(p.join("trace_run000.csv")).unwrap();
    assert_eq!(read(&a), read(&b), "identical seeds must give identical traces");
    assert_ne!(read(&a), read(&c), "different seeds must give different traces");
}

#[test]
fn simulate_mode_reports_trials_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sim");
    let out = srs(&[
        "--seed",
        "9",
        "--out",
        out_path.to_str().unwrap(),
        "coverage",
        "--n",
        "10",
        "--m",
        "3",
        "--K",
        "3",
        "--mode",
        "simulate",
        "--trials",
        "5000",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_path.join("coverage_sim.json")).unwrap())
            .unwrap();
    assert_eq!(json["trials"], 5000);
    assert!(json["seed"].is_u64());
    assert!(json["pmf"].is_object());
    assert!(json["mean"].is_number());
    assert!(json["variance"].is_number());
}
