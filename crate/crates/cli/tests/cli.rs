use std::path::Path;
use std::process::{Command, Output};

fn wulff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wulff"))
        .args(args)
        .env_remove("WULFF_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn norms_check_passes_for_p_norm() {
    let o = wulff(&["norms-check", "--norm", "pnorm:4", "--samples", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn norms_dual_prints_csv_without_out_dir() {
    let o = wulff(&["norms-dual", "--norm", "quad:4:1:0.5", "--points", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi1,xi2,numeric_dual,closed_form_dual,rel_error"));
    for line in lines {
        let err: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(err <= 1e-6, "{line}");
    }
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn solve_on_unit_disc_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = wulff(&["solve", "--h", "0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("u(O) = ")).unwrap().to_string();
    let u0: f64 = line.trim_start_matches("u(O) = ").parse().unwrap();
    assert!((u0 - 0.25).abs() < 1e-3, "{u0}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    for a in manifest["artifacts"].as_array().unwrap() {
        assert!(out.join(a["path"].as_str().unwrap()).exists());
    }
    for name in ["solution.json", "flux.csv", "flux.svg", "mesh.svg"] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn perturbed_domain_fails_overdetermined_check() {
    let o = wulff(&[
        "check-overdetermined",
        "--norm",
        "pnorm:4",
        "--domain",
        "perturbed:1:0.1:3",
        "--profile",
        "linear:0.5",
        "--h",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL consistent_with_wulff"));
}

#[test]
fn overdetermined_without_profile_is_config_error() {
    let o = wulff(&["check-overdetermined", "--h", "0.2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"h\": 0.1,\n  \"norm\": \n}\n").unwrap();
    let o = wulff(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json:4:"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    std::fs::write(&path, r#"{"mesh_size": 0.1}"#).unwrap();
    let o = wulff(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mesh_size"));
}

#[test]
fn bad_flag_is_usage_error() {
    assert_eq!(wulff(&["solve", "--norm", "pnorm:0.5"]).status.code(), Some(2));
    assert_eq!(wulff(&["solve", "--domain", "square:1"]).status.code(), Some(2));
}

#[test]
fn config_file_wins_over_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"h": 0.2, "domain": {"kind": "wulff", "radius": 1.0}}"#).unwrap();
    let o = wulff(&["solve", "--config", path.to_str().unwrap(), "--h", "0.05"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("--h ignored"));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = wulff(&[
            "compare",
            "--domain",
            "ellipse:1.5:1",
            "--h",
            "0.15",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        read_all(&out)
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn exact_flow_line_obeys_increase_law() {
    let o = wulff(&["flow", "--norm", "pnorm:3", "--x0", "0.4,0.3", "--dt", "0.02", "--exact"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS increase_law"));
}

#[test]
fn flow_requires_start_point() {
    assert_eq!(wulff(&["flow", "--exact"]).status.code(), Some(2));
}

#[test]
fn study_runs_each_mesh_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("study");
    let o = wulff(&[
        "study",
        "--hs",
        "0.2,0.15",
        "--experiment",
        "compare",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("study.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}
