//! End-to-end checks of the command-line surface.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_secmc"))
}

fn samples() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("samples")
}

#[test]
fn usage_errors_exit_two() {
    let out = bin().arg("check").output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_copy_program_reports_the_leak() {
    let out = bin()
        .args([
            "check",
            "--prop",
            "CONF",
            "--policy",
            samples().join("a_reads_b.pol").to_str().unwrap(),
            samples().join("copy.prog").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "violations exit 1");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("a@0=0"), "{stdout}");
    assert!(stdout.contains("Violated"), "{stdout}");
}

#[test]
fn frame_dot_export_matches_the_figure_shape() {
    let out = bin()
        .args([
            "frame",
            "--dot",
            "--policy",
            samples().join("fig1.pol").to_str().unwrap(),
            samples().join("rd.prog").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let dot = String::from_utf8_lossy(&out.stdout);
    assert_eq!(dot.matches("label=").count(), 8);
    assert_eq!(dot.matches("subgraph cluster_k").count(), 5);
}

#[test]
fn frame_json_round_trips_through_import() {
    let json_out = bin()
        .args([
            "frame",
            "--policy",
            samples().join("fig1.pol").to_str().unwrap(),
            samples().join("rd.prog").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(json_out.status.code(), Some(0));
    let dir = std::env::temp_dir().join(format!("secmc-frame-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("frame.json");
    std::fs::write(&path, &json_out.stdout).unwrap();

    let reexport = bin()
        .args(["frame", "--import", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(reexport.status.code(), Some(0));
    assert_eq!(json_out.stdout, reexport.stdout, "byte-stable round trip");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn eval_answers_formula_queries() {
    let out = bin()
        .args([
            "eval",
            "--policy",
            samples().join("declass.pol").to_str().unwrap(),
            "--world",
            "3:0",
            "--formula",
            "box(KP[A]) eventually p@1=0",
            samples().join("xor.prog").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("true"), "{stdout}");
}

#[test]
fn diff_agrees_on_the_samples() {
    let out = bin()
        .args([
            "diff",
            "--policy",
            samples().join("a_reads_b.pol").to_str().unwrap(),
            samples().join("copy.prog").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Agree"), "{stdout}");
}

#[test]
fn figure1_json_matches_the_frozen_golden() {
    let out = bin().args(["figure1", "--format", "json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "matrix contains violations");
    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/figure1.json"),
    )
    .unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), golden.trim());
}

#[test]
fn budget_env_variable_is_honored() {
    let out = bin()
        .env("SECMC_BUDGET", "0")
        .args([
            "check",
            "--prop",
            "CONF",
            "--policy",
            samples().join("a_reads_b.pol").to_str().unwrap(),
            samples().join("copy.prog").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    // a zero-step budget cannot finish the copy program
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}
