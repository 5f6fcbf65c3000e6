use std::path::Path;
use std::process::{Command, Output};

use dbarlab::dbar::profile_exact;
use dbarlab::grid::{make_grid, ComplexField};
use dbarlab::io::write_field;
use dbarlab::Complex64;
use serde_json::Value;

fn dbarlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbarlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("DBARLAB_OUT")
        .output()
        .expect("binary runs")
}

fn summary(out: &Path) -> Value {
    let text = std::fs::read_to_string(out.join("summary.json")).unwrap();
    serde_json::from_str::<Value>(&text).unwrap()["summary"].clone()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn solve_default_and_zero_anchor() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("solve");
    let cfg = write_config(tmp.path(), "c.json", r#"{"resolution": 65}"#);
    let o = dbarlab(&["solve-dbar", "--config", &cfg], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert!(s["sup_f"].as_f64().unwrap() > 0.1);
    for f in ["solution.bin", "modulus.pgm", "residual.pgm", "run.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let run: Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["schema_version"], 1);
    assert_eq!(run["config_digest"].as_str().unwrap().len(), 64);
    for f in run["outputs"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).exists());
    }

    let zero = tmp.path().join("zero");
    let cfg = write_config(tmp.path(), "z.json", r#"{"resolution": 33, "b": [0.0, 0.0]}"#);
    assert!(dbarlab(&["solve-dbar", "--config", &cfg], &zero).status.success());
    assert_eq!(summary(&zero)["residual_sup"].as_f64(), Some(0.0));
}

#[test]
fn malformed_config_fails_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for body in [r#"{"radious": 1}"#, r#"{"resolution": 64}"#, "not json"] {
        let cfg = write_config(tmp.path(), "bad.json", body);
        let o = dbarlab(&["solve-dbar", "--config", &cfg], &out);
        assert!(!o.status.success(), "{body}");
        assert!(!out.exists());
    }
}

#[test]
fn certify_profile_and_zero_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let g = make_grid(1.0, 129).unwrap();
    let prof = tmp.path().join("profile.bin");
    write_field(&prof, &profile_exact(-1.0, g)).unwrap();
    let out = tmp.path().join("c1");
    let o = dbarlab(&["certify", prof.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let slack = summary(&out)["min_slack"].as_f64().unwrap();
    assert!(slack.abs() < 1e-2, "{slack}");

    let zero = tmp.path().join("zero.bin");
    write_field(&zero, &ComplexField::sample(g, |_| Complex64::new(0.0, 0.0))).unwrap();
    let out = tmp.path().join("c2");
    assert!(dbarlab(&["certify", zero.to_str().unwrap()], &out).status.success());
    assert_eq!(summary(&out)["lemma2_verdict"], "not_triggered");

    let out = tmp.path().join("c3");
    let o = dbarlab(&["certify", tmp.path().join("missing.bin").to_str().unwrap()], &out);
    assert!(!o.status.success());
}

#[test]
fn ode_endpoint() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ode");
    assert!(dbarlab(&["ode"], &out).status.success());
    let s = summary(&out);
    assert!((s["rk4_g1"].as_f64().unwrap() - 0.36).abs() <= 1e-6);
    let csv = std::fs::read_to_string(out.join("rk4.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let g1: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!((g1 - 0.36).abs() <= 1e-6);
}

#[test]
fn kr_scan_emits_report_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("kr");
    let cfg = write_config(
        tmp.path(),
        "kr.json",
        r#"{"b_list": [[0.05, 0.0]], "radii": [0.5, 1.0], "resolution": 33}"#,
    );
    let o = dbarlab(&["kr-scan", "--config", &cfg], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "usc_report.json",
        "usc_table.csv",
        "scan.json",
        "scan_records.csv",
        "origin_witness.json",
        "origin_witness_z1.bin",
        "heatmap_b0_r00.pgm",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let s = summary(&out);
    assert_eq!(s["origin_upper_bound"].as_f64(), Some(0.5));
    assert_eq!(s["empirical"], true);
    let csv = std::fs::read_to_string(out.join("usc_table.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn print_config_and_out_override() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dbarlab"))
        .args(["ode", "--print-config"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let cfg: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cfg["steps"], 1000);

    let env_out = tmp.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_dbarlab"))
        .args(["ode", "--out"])
        .arg(tmp.path().join("from_flag"))
        .env("DBARLAB_OUT", &env_out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_out.join("summary.json").exists());
    assert!(!tmp.path().join("from_flag").exists());
}

#[test]
fn identical_configs_give_identical_summaries() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"resolution": 33, "b": [0.0, 0.03]}"#);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(dbarlab(&["solve-dbar", "--config", &cfg, "--threads", "1"], &a).status.success());
    assert!(dbarlab(&["solve-dbar", "--config", &cfg, "--threads", "3"], &b).status.success());
    assert_eq!(
        std::fs::read(a.join("summary.json")).unwrap(),
        std::fs::read(b.join("summary.json")).unwrap()
    );
    assert_eq!(
        std::fs::read(a.join("solution.bin")).unwrap(),
        std::fs::read(b.join("solution.bin")).unwrap()
    );
}
