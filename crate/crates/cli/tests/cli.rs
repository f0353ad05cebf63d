use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bitensor"))
        .args(args)
        .env("BITENSOR_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn classify_examples() {
    let cases = [
        (&["classify", "--flat", "-a", "0", "-b", "0", "-c", "0.7853981633974483", "-m", "1", "-n", "0"][..], "ProperBiharmonic (case C)"),
        (&["classify", "--nonflat", "-k", "2", "-a", "1", "-b", "0", "-c", "0", "-m", "0", "-n", "0"][..], "NotBiharmonic"),
        (&["classify", "--flat", "-a", "0", "-b", "0", "-c", "1.5707963267948966", "-m", "2", "-n", "3"][..], "Harmonic (case A)"),
        (&["classify", "-c", "3pi/4", "-m", "-1", "-n", "2"][..], "ProperBiharmonic (case C)"),
    ];
    for (args, expected) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(stdout(&out).lines().next().unwrap(), expected, "{args:?}");
    }
}

#[test]
fn classify_json_has_snake_case_keys() {
    let out = run(&["classify", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"], "ProperBiharmonic (case C)");
    assert_eq!(v["case_tag"], "C");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["classify", "-a", "x"][..],
        &["classify", "--flat", "--nonflat"][..],
        &["verify", "no-such-suite"][..],
        &["sweep", "--range", "2:1"][..],
        &["sweep", "--range", "1:1"][..],
        &["sweep", "--range", "nonsense"][..],
        &["residual", "--grid", "12"][..],
        &["residual", "--nonflat", "-k", "0.5"][..],
        &["atlas", "9"][..],
        &["atlas", "2", "--set", "bogus=1"][..],
        &[][..],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_bitensor"))
        .args(["atlas"])
        .env("BITENSOR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_reports_json() {
    let out = run(&["verify", "expansion", "--samples", "256", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["suite"], "expansion");
    assert_eq!(v["cases"], 256);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn verify_theorem_suites() {
    let out = run(&["verify", "theorem-flat", "--grid", "16x16"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let out = run(&["verify", "theorem-nonflat", "--k", "2", "--grid", "16x16"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn failing_verification_exits_one() {
    // A biharmonic tolerance below roundoff turns every case-C map into a
    // disagreement.
    let out = run(&["verify", "theorem-flat", "--grid", "8x8", "--tol-b", "1e-300"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(!v["failures"].as_array().unwrap().is_empty());
}

fn zeros(csv: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "param,max_residual_biharmonic,max_residual_harmonic,energy,bienergy"
    );
    lines
        .map(|l| l.split(',').map(|f| f.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .filter(|f| f[1] < 1e-8)
        .map(|f| f[0])
        .collect()
}

#[test]
fn sweep_of_linear_latitude() {
    let out = run(&[
        "sweep", "--flat", "-a", "0", "-b", "0", "-m", "1", "-n", "0", "--param", "c", "--range", "(0,pi)",
        "--steps", "15", "--grid", "16x16",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let z = zeros(&stdout(&out));
    let pi = std::f64::consts::PI;
    assert_eq!(z.len(), 3, "{z:?}");
    for (got, want) in z.iter().zip([pi / 4.0, pi / 2.0, 3.0 * pi / 4.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn sweep_of_eigenmap_family_writes_stable_files() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        let out = run(&["sweep", "--grid", "16x16", "--output", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let csv = String::from_utf8(a).unwrap();
    assert_eq!(csv.lines().count(), 156);
    assert!(!csv.contains('\r'));
    // The samples miss π/8, π/4 and 3π/8 by a fraction of a step.
    assert!(zeros(&csv).is_empty());
}

#[test]
fn energy_degree_and_atlas() {
    let out = run(&["energy", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((v["bienergy"].as_f64().unwrap() - pi2 / 2.0).abs() < 1e-10);
    assert!((v["energy"].as_f64().unwrap() - pi2).abs() < 1e-10);

    let out = run(&["degree", "--example", "torus-gauss-map", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["degree"].as_f64().unwrap().abs() < 1e-9);

    let out = run(&["atlas", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 6);
    let out = run(&["atlas", "clifford-hopf", "--sample", "4", "--format", "csv"]);
    assert_eq!(stdout(&out).lines().count(), 17);

    let out = run(&["residual", "--example", "2", "--set", "s=pi/8", "--format", "json", "--grid", "16x16"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "ProperBiharmonic");
}

#[test]
fn every_command_runs_without_flags() {
    for cmd in ["classify", "residual", "energy", "degree", "atlas"] {
        assert_eq!(run(&[cmd]).status.code(), Some(0), "{cmd}");
    }
}
