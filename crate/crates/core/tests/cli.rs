use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lrdu::asymptotics::var_z2;

fn lrdu(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrdu"))
        .current_dir(dir)
        .env("LRDU_THREADS", "1")
        .args(args)
        .output()
        .expect("spawn lrdu")
}

fn simulate(dir: &Path, out: &str) -> Output {
    lrdu(
        dir,
        &["simulate", "--model", "arfima", "--phi", "0.2", "--d", "0.35", "--n", "600", "--seed", "7", "-o", out],
    )
}

#[test]
fn simulate_writes_path_and_sidecar_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    assert!(simulate(dir.path(), "a.csv").status.success());
    assert!(simulate(dir.path(), "b.csv").status.success());
    let a = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(dir.path().join("b.csv")).unwrap());
    assert_eq!(a.lines().count(), 601);
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(side["model"]["kind"], "arfima");
    assert_eq!(side["seed"]["seed"], 7);
}

#[test]
fn contaminated_simulation_records_the_spec() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrdu(
        dir.path(),
        &["simulate", "--model", "fgn", "--hurst", "0.8", "--n", "100", "--omega", "10", "--p", "0.1", "--scheme", "rademacher", "-o", "x.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("x.json")).unwrap()).unwrap();
    assert_eq!(side["contamination"]["spec"]["scheme"], "rademacher");
}

#[test]
fn invalid_memory_parameter_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrdu(dir.path(), &["simulate", "--model", "arfima", "--d", "0.6", "--n", "10", "-o", "p.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain error"));
    assert!(!dir.path().join("p.csv").exists());
}

#[test]
fn estimate_fans_out_to_reports() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "path.csv");
    let out = lrdu(dir.path(), &["estimate", "--est", "hl,shamos,mean,sd", "-i", "path.csv", "-o", "est.json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("est.json")).unwrap()).unwrap();
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 4);
    let names: Vec<&str> = reports.iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["hl", "shamos", "mean", "sd"]);
    assert!(reports.iter().all(|r| r["n"] == 600));
}

#[test]
fn estimate_with_limits_uses_sidecar_model() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "path.csv");
    let out = lrdu(dir.path(), &["estimate", "--est", "hl,shamos", "-i", "path.csv", "--limits", "-o", "est.json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("est.json")).unwrap()).unwrap();
    assert_eq!(v["reports"][0]["limit"]["family"]["family"], "gaussian");
    assert_eq!(v["reports"][1]["limit"]["family"]["family"], "rosenblatt_mix");
}

#[test]
fn batch_estimate_emits_one_row_per_path() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("paths.csv"), "a,b\n1,0\n2,2\n3,4\n").unwrap();
    let out = lrdu(dir.path(), &["estimate", "--est", "mean,hl", "--batch", "paths.csv", "-o", "est.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("est.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "path,mean,hl");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("a,2.0"));
}

#[test]
fn missing_or_malformed_input_is_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrdu(dir.path(), &["estimate", "-i", "nope.csv", "-o", "e.json"]);
    assert_eq!(out.status.code(), Some(1));
    fs::write(dir.path().join("bad.csv"), "value\n1\nxyz\n").unwrap();
    let out = lrdu(dir.path(), &["estimate", "-i", "bad.csv", "-o", "e.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("e.json").exists());
}

#[test]
fn limits_prints_second_cumulant() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrdu(dir.path(), &["limits", "--D", "0.3", "--cumulant", "2", "--a", "1", "--b", "0"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let value: f64 = text.lines().next().unwrap().split('=').nth(1).unwrap().trim().parse().unwrap();
    let expected = var_z2(0.3).unwrap();
    assert!((value - expected).abs() < 1e-8 * expected, "{value} vs {expected}");
}

#[test]
fn rosenblatt_constants_outside_regime_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrdu(dir.path(), &["limits", "--D", "0.6", "--cumulant", "2", "-o", "t.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("D < 1/2"));
    assert!(!dir.path().join("t.json").exists());
}

#[test]
fn limits_writes_table_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrdu(
        dir.path(),
        &["limits", "--D", "0.3", "--sample", "50", "--n-approx", "1024", "--samples-out", "z.csv", "-o", "t.json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert!(t["var_z2"].as_f64().unwrap() > 0.0);
    assert_eq!(fs::read_to_string(dir.path().join("z.csv")).unwrap().lines().count(), 51);
    assert!(dir.path().join("z.json").exists());
}

#[test]
fn uprocess_writes_curve_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "path.csv");
    let out = lrdu(
        dir.path(),
        &["uprocess", "-i", "path.csv", "--kernel", "absdiff", "--grid", "0.5:2:4", "--decompose", "--hermite", "h.json", "-o", "u.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("u.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "r,u,w,rres");
    assert_eq!(text.lines().count(), 5);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("u.json")).unwrap()).unwrap();
    assert_eq!(meta["extra"]["grid_spec"], "0.5:2:4");
    let h: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("h.json")).unwrap()).unwrap();
    assert_eq!(h["m"], 2);
    assert_eq!(h["tau"], 2);
}

#[test]
fn montecarlo_writes_directory_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"model": {"kind": "fgn", "params": {"hurst": 0.8}}, "n": 200, "reps": 40,
                  "estimators": ["hl", "mean"], "seed": 3}"#;
    fs::write(dir.path().join("experiment.json"), cfg).unwrap();
    let out = lrdu(dir.path(), &["montecarlo", "-c", "experiment.json", "-o", "outdir/"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["draws.csv", "summary.json", "density_hl.csv", "density_mean.csv"] {
        assert!(dir.path().join("outdir").join(f).exists(), "{f}");
    }
    let draws = fs::read_to_string(dir.path().join("outdir/draws.csv")).unwrap();
    assert_eq!(draws.lines().next().unwrap(), "hl,mean");
    assert_eq!(draws.lines().count(), 41);
}

#[test]
fn montecarlo_rejects_unknown_config_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"model": {"kind": "fgn", "params": {"hurst": 0.8}}, "n": 20, "reps": 4,
                  "estimators": ["hl"], "seed": 3, "colour": 1}"#;
    fs::write(dir.path().join("c.json"), cfg).unwrap();
    let out = lrdu(dir.path(), &["montecarlo", "-c", "c.json", "-o", "out"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn help_documents_every_subcommand_and_unknown_flags_fail() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["simulate", "estimate", "uprocess", "limits", "montecarlo"] {
        let out = lrdu(dir.path(), &[sub, "--help"]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("--threads") && text.contains("--help"), "{sub}");
        let out = lrdu(dir.path(), &[sub, "--no-such-flag"]);
        assert!(!out.status.success());
    }
}
