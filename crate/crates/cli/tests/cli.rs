use finsler_cli::{run, Experiment, ExperimentConfig};
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_finsler"))
}

fn config(e: Experiment, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(e);
    cfg.out = Some(out.to_path_buf());
    cfg
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for e in [Experiment::E4, Experiment::E6] {
        run(&config(e, a.path())).unwrap();
        run(&config(e, b.path())).unwrap();
        for file in ["report.json", "table.csv"] {
            let x = std::fs::read(a.path().join(e.id()).join(file)).unwrap();
            let y = std::fs::read(b.path().join(e.id()).join(file)).unwrap();
            assert_eq!(x, y, "{e}/{file}");
        }
    }
}

#[test]
fn report_layout() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config(Experiment::E2, dir.path())).unwrap();
    assert!(report.all_passed());
    let out = dir.path().join("E2");
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["experiment"], "E2");
    assert_eq!(json["failed"], 0);
    assert!(json["sections"][0]["checks"].as_array().is_some_and(|c| !c.is_empty()));
    let table = std::fs::read_to_string(out.join("table.csv")).unwrap();
    assert_eq!(table.lines().next(), Some("series,param,measured,expected,abs_error"));
    assert!(table.lines().count() > 1);
    let svgs: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".svg"))
        .collect();
    assert!(!svgs.is_empty());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin().args(["verify", "E2", "--no-plots", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
    assert!(!dir.path().join("E2/plot_kappa.svg").exists());

    let bad = bin().args(["verify", "E2", "--samples", "1", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(bad.status.code(), Some(101));
    let bad = bin().args(["verify", "E9"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(101));
    let bad = bin().args(["verify", "all", "--metric", "euclidean(3)"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(101));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let toml = dir.path().join("e4.toml");
    std::fs::write(&toml, "experiment = \"E4\"\nsamples = 4\nmetric = \"riemannian_sphere(3, c=4)\"\n").unwrap();
    let st = bin()
        .args(["verify", "--no-plots", "--samples", "6", "--config"])
        .arg(&toml)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("E4/report.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["samples"], 6);
    assert_eq!(json["config"]["metric"], "riemannian_sphere(3, c=4)");

    std::fs::write(&toml, "experiment = \"E4\"\ncolour = 3\n").unwrap();
    let st = bin().arg("verify").arg("--config").arg(&toml).status().unwrap();
    assert_eq!(st.code(), Some(101));
}

#[test]
fn geodesic_csv() {
    let out = bin()
        .args(["geodesic", "--metric", "euclidean(2)", "--x", "0,0", "--y", "1,-2", "--s-max", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let last = r.records().last().unwrap().unwrap();
    let v: Vec<f64> = last.iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(v[0], 1.0);
    assert!((v[1] - 1.0).abs() < 1e-12 && (v[2] + 2.0).abs() < 1e-12);
}

#[test]
fn curvature_and_shape_json() {
    let out = bin()
        .args(["curvature", "--metric", "riemannian_sphere(2, c=4)", "--x", "0.1,0.2", "--y", "1,0", "--v", "0,1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((json["K"].as_f64().unwrap() - 4.0).abs() < 1e-6);

    let out = bin()
        .args(["shape", "--metric", "euclidean(3)", "--patch", "round_sphere(R=2)", "--u", "1,0.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in json["kappas"].as_array().unwrap() {
        assert!((k.as_f64().unwrap().abs() - 0.5).abs() < 1e-9);
    }
}
