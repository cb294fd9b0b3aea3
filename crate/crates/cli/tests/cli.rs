//! End-to-end tests of the binary: exit codes, file outputs, and
//! determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_spectral-glue")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

const OMEGA_SWAP: &str = r#"{"intervals": [[0.0, 1.0], [2.0, 3.0]]}"#;
const B_SWAP: &str = r#"{"rows": 2, "cols": 2, "entries": [[{"re":0.0,"im":0.0},{"re":1.0,"im":0.0}],[{"re":1.0,"im":0.0},{"re":0.0,"im":0.0}]], "row_index": [0,1], "col_index": [0,1]}"#;
const B_ID2: &str = r#"{"rows": 2, "cols": 2, "entries": [[{"re":1.0,"im":0.0},{"re":0.0,"im":0.0}],[{"re":0.0,"im":0.0},{"re":1.0,"im":0.0}]], "row_index": [0,1], "col_index": [0,1]}"#;

#[test]
fn spectrum_swap_fixture_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let omega = write(tmp.path(), "omega.json", OMEGA_SWAP);
    let b = write(tmp.path(), "b.json", B_SWAP);
    let out1 = tmp.path().join("run1");
    let out2 = tmp.path().join("run2");
    for out in [&out1, &out2] {
        let r = run(&[
            "spectrum",
            "--omega",
            omega.to_str().unwrap(),
            "--boundary",
            b.to_str().unwrap(),
            "--window",
            "-2.5",
            "2.5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let csv = std::fs::read_to_string(out1.join("spectrum.csv")).unwrap();
    // Rows at half-integers, multiplicity 1.
    let lambdas: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(lambdas.len(), 11);
    for (k, lam) in lambdas.iter().enumerate() {
        let exact = -2.5 + 0.5 * k as f64;
        assert!((lam - exact).abs() < 1e-9, "{lam} vs {exact}");
    }
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some("1")));

    for name in ["spectrum.csv", "spectrum.json", "spectrum.svg", "eigenphases.svg"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} not byte-identical");
        assert!(!a.is_empty());
    }
    // No stray temp files.
    assert!(std::fs::read_dir(&out1).unwrap().count() == 4);
}

#[test]
fn spectrum_gate_failure_exits_2_without_files() {
    let tmp = tempfile::tempdir().unwrap();
    let omega = write(
        tmp.path(),
        "omega.json",
        r#"{"intervals": [["-inf", 0.0], [1.0, 2.0]]}"#,
    );
    let b = write(tmp.path(), "b.json", B_ID2);
    let out = tmp.path().join("out");
    let r = run(&[
        "spectrum",
        "--omega",
        omega.to_str().unwrap(),
        "--boundary",
        b.to_str().unwrap(),
        "--window",
        "-1",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&r.stderr);
    assert!(stderr.contains("deficiency indices differ"), "{stderr}");
    assert!(!out.exists(), "no files may be written on gate failure");
}

#[test]
fn malformed_input_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let omega = write(tmp.path(), "omega.json", r#"{"intervals": [[1.0, 0.0]]}"#);
    let b = write(tmp.path(), "b.json", B_ID2);
    let r = run(&[
        "spectrum",
        "--omega",
        omega.to_str().unwrap(),
        "--boundary",
        b.to_str().unwrap(),
        "--window",
        "-1",
        "1",
    ]);
    assert_eq!(r.status.code(), Some(1));

    let r = run(&["spectrum", "--omega", "/nonexistent.json", "--boundary", b.to_str().unwrap(), "--window", "-1", "1"]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn evolve_circle_shift() {
    let tmp = tempfile::tempdir().unwrap();
    let omega = write(tmp.path(), "omega.json", r#"{"intervals": [[0.0, 1.0]]}"#);
    let b = write(
        tmp.path(),
        "b.json",
        r#"{"rows":1,"cols":1,"entries":[[{"re":1.0,"im":0.0}]],"row_index":[0],"col_index":[0]}"#,
    );
    let f = write(
        tmp.path(),
        "f.json",
        r#"{"pieces": [{"support": [0.0, 0.25], "amp": {"re": 1.0, "im": 0.0}, "freq": 0.0}]}"#,
    );
    let out = tmp.path().join("out");
    let r = run(&[
        "evolve",
        "--omega",
        omega.to_str().unwrap(),
        "--boundary",
        b.to_str().unwrap(),
        "--function",
        f.to_str().unwrap(),
        "--times",
        "0.5,0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let s0: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("snapshot_000.json")).unwrap())
            .unwrap();
    assert_eq!(s0["pieces"][0]["support"][0], 0.5);
    assert_eq!(s0["pieces"][0]["support"][1], 0.75);
    assert_eq!(s0["pieces"][0]["amp"]["re"], 1.0);

    // t = 0 returns the canonicalized input bitwise.
    let s1 = std::fs::read_to_string(out.join("snapshot_001.json")).unwrap();
    let orig: spectral_glue::PiecewiseExp =
        serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(s1, serde_json::to_string_pretty(&orig).unwrap());
    assert!(out.join("snapshots.svg").exists());
    assert!(out.join("times.json").exists());
}

#[test]
fn verify_localtranslation_default_passes_identity_fails() {
    let r = run(&["verify", "--suite", "localtranslation", "--seed", "5"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let tmp = tempfile::tempdir().unwrap();
    let omega = write(tmp.path(), "omega.json", OMEGA_SWAP);
    let b = write(tmp.path(), "b.json", B_ID2);
    let r = run(&[
        "verify",
        "--suite",
        "localtranslation",
        "--seed",
        "5",
        "--omega",
        omega.to_str().unwrap(),
        "--boundary",
        b.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(4));
    let report: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(report["passed"], false);
    // The counterexample carries a concrete (V, t) witness.
    let witness = &report["counterexample"]["witness"];
    assert!(witness.get("v").is_some() && witness.get("t").is_some(), "{report}");
}

#[test]
fn verify_tiling_suite_passes() {
    let r = run(&["verify", "--suite", "tiling", "--seed", "1"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn tiling_command_reports_exact_rationals() {
    let tmp = tempfile::tempdir().unwrap();
    let lat = write(tmp.path(), "lat.json", r#"{"A": [[2]], "d1": 1}"#);

    let good = write(tmp.path(), "good.json", r#"{"intervals": [[0.0, 1.0], [3.0, 4.0]]}"#);
    let r = run(&["tiling", "--omega", good.to_str().unwrap(), "--lattice", lat.to_str().unwrap()]);
    assert!(r.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(rep["tiles"], true);
    assert_eq!(rep["overlap"], "0");
    assert_eq!(rep["uncovered"], "0");

    let bad = write(tmp.path(), "bad.json", OMEGA_SWAP);
    let r = run(&["tiling", "--omega", bad.to_str().unwrap(), "--lattice", lat.to_str().unwrap()]);
    assert!(r.status.success());
    let rep: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(rep["tiles"], false);
    assert_eq!(rep["overlap"], "1");
}

#[test]
fn pairmeasure_command() {
    let tmp = tempfile::tempdir().unwrap();
    let omega = write(tmp.path(), "omega.json", r#"{"intervals": [[0.0, 1.0], [3.0, 4.0]]}"#);
    let lat = write(tmp.path(), "lat.json", r#"{"A": [[2]], "d1": 1}"#);
    let r = run(&[
        "pairmeasure",
        "--omega",
        omega.to_str().unwrap(),
        "--lattice",
        lat.to_str().unwrap(),
        "--window-n",
        "20",
        "--trials",
        "3",
        "--seed",
        "2",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let rep: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    let defect = rep["max_defect"].as_f64().unwrap();
    assert!(defect <= 0.06, "defect {defect}");
}

#[test]
fn threads_env_changes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let omega = write(tmp.path(), "omega.json", OMEGA_SWAP);
    let b_path = write(tmp.path(), "b.json", B_SWAP);
    let out1 = tmp.path().join("t1");
    let out4 = tmp.path().join("t4");
    for (out, threads) in [(&out1, "1"), (&out4, "4")] {
        let r = Command::new(bin())
            .env("SPECTRAL_GLUE_THREADS", threads)
            .args([
                "spectrum",
                "--omega",
                omega.to_str().unwrap(),
                "--boundary",
                b_path.to_str().unwrap(),
                "--window",
                "-5.5",
                "5.5",
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    // Same spectrum regardless of worker count (roots may differ in the
    // last bisection ulps, so compare numerically)...
    let parse = |p: &Path| -> Vec<(f64, u32)> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let mut it = l.split(',');
                (
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                )
            })
            .collect()
    };
    let a = parse(&out1.join("spectrum.csv"));
    let b = parse(&out4.join("spectrum.csv"));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x.0 - y.0).abs() < 1e-9 && x.1 == y.1, "{x:?} vs {y:?}");
    }

    // ...and byte-identical reruns at a fixed worker count.
    let out4b = tmp.path().join("t4b");
    let r = Command::new(bin())
        .env("SPECTRAL_GLUE_THREADS", "4")
        .args([
            "spectrum",
            "--omega",
            omega.to_str().unwrap(),
            "--boundary",
            b_path.to_str().unwrap(),
            "--window",
            "-5.5",
            "5.5",
            "--out",
            out4b.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(r.status.success());
    assert_eq!(
        std::fs::read(out4.join("spectrum.csv")).unwrap(),
        std::fs::read(out4b.join("spectrum.csv")).unwrap()
    );
}
