//! End-to-end CLI checks: exit codes, document shape, and criterion 14
//! (repeated validate runs with a fixed seed produce byte-identical reports
//! apart from the timing field).

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lpjohn"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("lpjohn-test-{}-{name}", std::process::id()));
    p
}

fn write_spec(name: &str, body: &str) -> PathBuf {
    let path = tmp(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn gaussian_spec(name: &str, q: &str) -> PathBuf {
    write_spec(name, &format!(r#"{{ "type": "gaussian", "Q": {q} }}"#))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_gaussian_reports_closed_form_mass() {
    let spec = gaussian_spec("senior.json", "[[4.0, 0.0], [0.0, 1.0]]");
    let out_doc = tmp("solve-out.json");
    let out = run(&[
        "solve",
        "--input",
        spec.to_str().unwrap(),
        "--p",
        "2",
        "--out",
        out_doc.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("mass=3.14159265"), "{text}");
    assert!(text.contains("delta_bar=2.0000000"), "{text}");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_doc).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], "1");
    assert!(doc["outputs"]["solver_result"]["ellipsoid"]["Q"].is_array());
    assert!(doc["provenance"]["seed"].is_u64());
    assert_eq!(doc["input_spec"]["type"], "gaussian");
}

#[test]
fn solve_p_inf_matches_finite_p_on_gaussians() {
    let spec = gaussian_spec("inf.json", "[[4.0, 0.0], [0.0, 1.0]]");
    let out = run(&["solve", "--input", spec.to_str().unwrap(), "--p", "inf"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("mass=3.14159265"), "{}", stdout(&out));
}

#[test]
fn malformed_spec_exits_2_naming_the_invariant() {
    let spec = gaussian_spec("bad.json", "[[1.0, 0.0], [0.0, -2.0]]");
    let out = run(&["solve", "--input", spec.to_str().unwrap(), "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("positive definite"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn invalid_p_and_empty_p_list_exit_2() {
    let spec = gaussian_spec("p.json", "[[1.0, 0.0], [0.0, 1.0]]");
    let out = run(&["solve", "--input", spec.to_str().unwrap(), "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["sweep", "--input", spec.to_str().unwrap(), "--p-list", " "]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_tolerance_exits_3() {
    let spec = write_spec(
        "square.json",
        r#"{ "type": "gauge_power", "q": 2.0,
             "body": { "vertices": [[1,1],[-1,1],[-1,-1],[1,-1]] } }"#,
    );
    let out = run(&[
        "solve",
        "--input",
        spec.to_str().unwrap(),
        "--p",
        "2",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn sweep_emits_nonincreasing_mass_column() {
    let spec = write_spec(
        "square-sweep.json",
        r#"{ "type": "gauge_power", "q": 2.0,
             "body": { "vertices": [[1,1],[-1,1],[-1,-1],[1,-1]] } }"#,
    );
    let out = run(&[
        "sweep",
        "--input",
        spec.to_str().unwrap(),
        "--p-list",
        "1,2,8,inf",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p,mass,delta_bar,kkt_residual,iterations,converged"
    );
    let masses: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(masses.len(), 4);
    for w in masses.windows(2) {
        assert!(w[1] <= w[0] + 1e-4, "mass column not nonincreasing: {masses:?}");
    }
}

#[test]
fn gaussian_sweep_mass_column_is_constant() {
    let spec = gaussian_spec("flat.json", "[[1.0, 0.0], [0.0, 1.0]]");
    let out = run(&[
        "sweep",
        "--input",
        spec.to_str().unwrap(),
        "--p-list",
        "1,2,8,inf",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let expected = 2.0 * std::f64::consts::PI;
    for line in text.lines().skip(1) {
        let mass: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((mass - expected).abs() < 1e-8, "{line}");
    }
}

#[test]
fn variation_gaussian_pair() {
    let f = gaussian_spec("vf.json", "[[1.0, 0.0], [0.0, 1.0]]");
    let out = run(&[
        "variation",
        "--f",
        f.to_str().unwrap(),
        "--g",
        f.to_str().unwrap(),
        "--p",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    // delta J_1(gamma, gamma) = J(gamma-diamond) = 2 pi at n = 2.
    assert!(text.contains("delta_J=6.2831853"), "{text}");
    assert!(text.contains("normalized=1.0000000"), "{text}");
}

#[test]
fn variation_sup_ratio_at_infinity() {
    let f = gaussian_spec("vsf.json", "[[4.0, 0.0], [0.0, 1.0]]");
    let g = gaussian_spec("vsg.json", "[[1.0, 0.0], [0.0, 1.0]]");
    let out = run(&[
        "variation",
        "--f",
        f.to_str().unwrap(),
        "--g",
        g.to_str().unwrap(),
        "--p",
        "inf",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("sup_ratio=4"), "{}", stdout(&out));

    // The quotient oracle needs finite p.
    let out = run(&[
        "variation",
        "--f",
        f.to_str().unwrap(),
        "--g",
        g.to_str().unwrap(),
        "--p",
        "inf",
        "--oracle",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn variation_oracle_gap_small() {
    let f = gaussian_spec("vo f.json", "[[4.0, 0.0], [0.0, 1.0]]");
    let g = gaussian_spec("vo g.json", "[[1.0, 0.0], [0.0, 1.0]]");
    let out = run(&[
        "variation",
        "--f",
        f.to_str().unwrap(),
        "--g",
        g.to_str().unwrap(),
        "--p",
        "2",
        "--oracle",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let gap: f64 = text
        .split("relative_gap=")
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(gap < 0.02, "oracle gap {gap}");
}

#[test]
fn unknown_corpus_exits_2() {
    let out = run(&["validate", "--corpus", "no-such-corpus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown corpus"), "{}", stderr(&out));
}

fn strip_timing(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("wall_time_ms"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Criterion 14: repeated validate runs with a fixed seed produce
/// byte-identical reports apart from the timing field; the suite passes on
/// the builtin corpus (exit 0) and detects a corrupted solver (exit 1).
#[test]
fn criterion_14_validate_determinism_and_exit_codes() {
    let out_a = tmp("validate-a.json");
    let out_b = tmp("validate-b.json");
    let csv_a = tmp("validate-a.csv");

    let run_validate = |out: &PathBuf, extra: &[&str]| {
        let mut args = vec![
            "validate",
            "--corpus",
            "builtin",
            "--p-ladder",
            "1,2",
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        run(&args)
    };

    let a = run_validate(&out_a, &["--csv", csv_a.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0), "{}\n{}", stdout(&a), stderr(&a));
    let b = run_validate(&out_b, &[]);
    assert_eq!(b.status.code(), Some(0));

    let text_a = std::fs::read_to_string(&out_a).unwrap();
    let text_b = std::fs::read_to_string(&out_b).unwrap();
    assert_eq!(
        strip_timing(&text_a),
        strip_timing(&text_b),
        "reports differ beyond the timing field"
    );

    let csv = std::fs::read_to_string(&csv_a).unwrap();
    assert!(csv.starts_with("name,function,p,lhs,rhs,margin,pass\n"));
    assert!(csv.lines().count() > 50);

    let out_c = tmp("validate-c.json");
    let c = run_validate(&out_c, &["--corrupt-solver"]);
    assert_eq!(
        c.status.code(),
        Some(1),
        "corrupted solver must fail the suite: {}",
        stdout(&c)
    );
    println!("[PASS] criterion 14: byte-identical reports modulo timing; exit codes 0/1 correct");
}

#[test]
fn resolution_env_var_must_be_valid() {
    let spec = gaussian_spec("env.json", "[[1.0, 0.0], [0.0, 1.0]]");
    let out = bin()
        .args(["solve", "--input", spec.to_str().unwrap(), "--p", "2"])
        .env("LPJOHN_RESOLUTION", "64")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    let out = bin()
        .args(["solve", "--input", spec.to_str().unwrap(), "--p", "2"])
        .env("LPJOHN_RESOLUTION", "65")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}
