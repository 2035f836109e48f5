//! End-to-end checks of the binary: artifacts on disk, determinism, the
//! exit-code contract, and scenario handling.

use fracguide_cli::report::parse_trajectory_csv;
use fracguide_cli::scenario::{
    parse_scenario, serialize_scenario, DynamicsSpec, PartitionSpec, ScenarioDoc,
};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracguide"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary must spawn")
}

#[test]
fn simulate_builtin_writes_csv_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate",
            "--builtin",
            "paper",
            "--seed",
            "7",
            "--step",
            "0.02",
            "--csv",
            "run.csv",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    // 5 / 0.02 = 250 cells -> 251 data rows + header.
    assert_eq!(csv.lines().count(), 252);
    let stored = parse_trajectory_csv(&csv).unwrap();
    assert_eq!(stored.x_traj.node_count(), 251);

    // The dev column matches a recomputation from the row's own columns.
    for m in 0..stored.x_traj.node_count() {
        let recomputed: f64 = stored
            .x_traj
            .value(m)
            .iter()
            .zip(stored.y_traj.value(m))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!((recomputed - stored.dev[m]).abs() <= 1e-9);
    }

    let meta = fs::read_to_string(dir.path().join("run.meta")).unwrap();
    assert!(meta.starts_with("fracguide-meta v1"));
    for key in [
        "seed = 7",
        "deviation_sup = ",
        "k_constant = ",
        "lyapunov_max_violation = ",
    ] {
        assert!(meta.contains(key), "meta missing '{key}':\n{meta}");
    }
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = run_in(
            dir.path(),
            &[
                "simulate",
                "--builtin",
                "paper",
                "--seed",
                "42",
                "--step",
                "0.01",
                "--csv",
                name,
            ],
        );
        assert!(out.status.success());
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "same seed must reproduce byte-identical output");
    let a_meta = fs::read_to_string(dir.path().join("a.meta")).unwrap();
    let b_meta = fs::read_to_string(dir.path().join("b.meta")).unwrap();
    assert_eq!(
        a_meta.replace("a.csv", "X"),
        b_meta.replace("b.csv", "X"),
        "metadata must agree up to the file name"
    );
}

#[test]
fn scenario_file_drives_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let doc = ScenarioDoc {
        dynamics: Some(DynamicsSpec::Builtin("paper".into())),
        partition: Some(PartitionSpec::Step(0.05)),
        seed: Some(5),
        csv_path: Some("custom.csv".into()),
        ..ScenarioDoc::default()
    };
    let text = serialize_scenario(&doc);
    assert_eq!(parse_scenario(&text).unwrap(), doc);
    fs::write(dir.path().join("scenario.fg"), &text).unwrap();

    let out = run_in(dir.path(), &["simulate", "scenario.fg"]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.path().join("custom.csv").exists());
    assert!(dir.path().join("custom.meta").exists());
}

#[test]
fn round_tripped_scenario_reproduces_the_run() {
    // doc -> config and doc -> text -> doc -> config must drive identical
    // simulations.
    let doc = ScenarioDoc {
        dynamics: Some(DynamicsSpec::Separable {
            drift: vec!["x2".into(), "-sin(x1) + cos(t)".into()],
            b: vec![vec![0.3, 0.0], vec![0.0, 0.5]],
            c: vec![vec![0.4, 0.0], vec![0.0, 0.2]],
            lambda_g: 1.0,
            c_g: 2.9,
        }),
        alpha: Some(0.5),
        horizon: Some(2.0),
        p: Some(fracguide_cli::scenario::SetSpec::Ball {
            radius: 1.0,
            dim: 2,
        }),
        q: Some(fracguide_cli::scenario::SetSpec::Ball {
            radius: 1.0,
            dim: 2,
        }),
        x0: Some(vec![-1.0, 0.0]),
        y0: Some(vec![0.5, 0.25]),
        partition: Some(PartitionSpec::Step(0.01)),
        seed: Some(9),
        ..ScenarioDoc::default()
    };
    let direct = fracguide::run_aiming(&doc.to_config().unwrap()).unwrap();
    let reparsed = parse_scenario(&serialize_scenario(&doc)).unwrap();
    let round_tripped = fracguide::run_aiming(&reparsed.to_config().unwrap()).unwrap();
    assert_eq!(direct.x_traj.data(), round_tripped.x_traj.data());
    assert_eq!(direct.y_traj.data(), round_tripped.y_traj.data());
    assert_eq!(direct.deviation_sup, round_tripped.deviation_sup);
}

#[test]
fn node_list_partitions_flow_through_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = "fracguide-scenario v1\n\
        [dynamics]\n\
        builtin = paper\n\
        [horizon]\n\
        t = 1.0\n\
        [partition]\n\
        nodes = 0 0.1 0.25 0.5 0.7 0.85 1.0\n";
    fs::write(dir.path().join("irregular.fg"), scenario).unwrap();
    let out = run_in(
        dir.path(),
        &["simulate", "irregular.fg", "--csv", "run.csv"],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    let meta = fs::read_to_string(dir.path().join("run.meta")).unwrap();
    assert!(
        meta.contains("lyapunov_max_violation = skipped (non-uniform)"),
        "meta: {meta}"
    );
}

#[test]
fn malformed_scenario_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.fg"), "this is not a scenario\n").unwrap();
    let out = run_in(dir.path(), &["simulate", "bad.fg"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 1"), "stderr: {stderr}");

    // Semantic failure: alpha outside (0, 1).
    fs::write(
        dir.path().join("bad2.fg"),
        "fracguide-scenario v1\n[dynamics]\nbuiltin = paper\n[order]\nalpha = 1.5\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["simulate", "bad2.fg"]);
    assert_eq!(out.status.code(), Some(2));

    // Unknown builtin and missing scenario.
    let out = run_in(dir.path(), &["simulate", "--builtin", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(dir.path(), &["simulate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nonfinite_dynamics_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // Cubic blow-up from a huge initial state goes non-finite within a few
    // steps.
    let scenario = "fracguide-scenario v1\n\
        [dynamics]\n\
        drift = x1 * x1 * x1\n\
        b = 1\n\
        c = 1\n\
        lambda_g = 1\n\
        c_g = 1\n\
        [order]\n\
        alpha = 0.5\n\
        [horizon]\n\
        t = 1\n\
        [sets]\n\
        p = ball 1 1\n\
        q = ball 1 1\n\
        [initial]\n\
        x0 = 1e100\n\
        y0 = 1e100\n\
        [partition]\n\
        step = 0.05\n";
    fs::write(dir.path().join("blowup.fg"), scenario).unwrap();
    let out = run_in(dir.path(), &["simulate", "blowup.fg"]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("non-finite"), "stderr: {stderr}");
}

#[test]
fn violation_beyond_tolerance_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate",
            "--builtin",
            "paper",
            "--seed",
            "1",
            "--step",
            "0.05",
            "--csv",
            "run.csv",
        ],
    );
    assert!(out.status.success());
    // A negative coefficient drives the tolerance below the (nonnegative)
    // measured violation, forcing the violation exit path.
    let out = run_in(dir.path(), &["check-lyapunov", "run.csv", "--coeff=-1"]);
    assert_eq!(out.status.code(), Some(4));
    // The frozen default accepts the stored run.
    let out = run_in(dir.path(), &["check-lyapunov", "run.csv"]);
    assert!(out.status.success());
}

#[test]
fn check_lyapunov_handles_fine_stored_runs() {
    // Re-verification must survive the 12-digit text round trip of the
    // time column on a long partition.
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "simulate",
            "--builtin",
            "paper",
            "--seed",
            "2",
            "--step",
            "0.001",
            "--csv",
            "fine.csv",
        ],
    );
    assert!(out.status.success());
    let out = run_in(dir.path(), &["check-lyapunov", "fine.csv"]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "sweep",
            "--builtin",
            "paper",
            "--seed",
            "3",
            "--diameters",
            "0.05,0.025",
            "--out",
            "table.csv",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "diameter,deviation_sup");
    assert_eq!(lines.len(), 3);

    // Ascending diameters are a usage error.
    let out = run_in(
        dir.path(),
        &["sweep", "--builtin", "paper", "--diameters", "0.01,0.05"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constants_match_the_library() {
    let out = bin()
        .args(["constants", "--builtin", "paper", "--eps", "0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let printed_k: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("k = "))
        .expect("constants output must carry k")
        .trim()
        .parse()
        .unwrap();
    let config = fracguide::paper_example();
    let expected =
        fracguide::theorem_constants(&config.dynamics, config.alpha, 5.0, 1.0, 0.1, None).unwrap();
    assert!(
        ((printed_k - expected.k) / expected.k).abs() <= 1e-9,
        "printed {printed_k} vs library {}",
        expected.k
    );
    assert!(stdout.contains("delta1 = not computable"));
}

#[test]
fn selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("checks passed"), "stdout: {stdout}");
}
