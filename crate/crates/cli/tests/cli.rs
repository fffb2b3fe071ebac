use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use fibtrace::geometry::{fricke, Point3};

fn fibtrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibtrace")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let o = fibtrace(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fibtrace-cli-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn negative_coupling_is_a_config_error() {
    let o = fibtrace(&["spectrum", "--set", "spectrum.coupling=-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coupling"));
}

#[test]
fn mesh_resolution_one_is_rejected() {
    let o = fibtrace(&["mesh", "--set", "mesh.resolution=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mesh.resolution"));
}

#[test]
fn unknown_keys_and_bad_files_are_rejected() {
    assert_eq!(fibtrace(&["spectrum", "--set", "spectrum.colour=1"]).status.code(), Some(2));
    assert_eq!(fibtrace(&["spectrum", "--set", "nonsense"]).status.code(), Some(2));
    assert_eq!(fibtrace(&["spectrum", "--config", "/nonexistent.toml"]).status.code(), Some(2));
    assert_eq!(fibtrace(&["certify", "--set", "certify.mode=\"other\""]).status.code(), Some(2));
}

#[test]
fn config_file_and_overrides() {
    let d = scratch("config");
    let cfg = d.join("run.toml");
    std::fs::write(&cfg, "seed = 3\n[spectrum]\ncoupling = 0.0\nk = 6\n").unwrap();
    let v = json(&["spectrum", "--config", cfg.to_str().unwrap(), "--set", "spectrum.k=10"]);
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["config"]["spectrum"]["k"], 10);
    assert_eq!(v["tool"], "fibtrace");
    assert!(v["version"].is_string());
    assert!((v["result"]["measure"].as_f64().unwrap() - 4.0).abs() < 0.05);
    std::fs::remove_dir_all(d).ok();
}

#[test]
fn spectrum_writes_json_and_csv() {
    let d = scratch("spectrum");
    let out = d.join("bands.json");
    let o = fibtrace(&["spectrum", "--out", out.to_str().unwrap(), "--set", "spectrum.k=8"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let csv = std::fs::read_to_string(d.join("bands.csv")).unwrap();
    assert!(csv.starts_with("index,lo,hi,width\n"));
    assert_eq!(csv.lines().count() - 1, v["result"]["band_count"].as_u64().unwrap() as usize);
    std::fs::remove_dir_all(d).ok();
}

#[test]
fn spectrum_cover_shrinks() {
    let m = |k: &str| json(&["spectrum", "--set", &format!("spectrum.k={k}")])["result"]["measure"].as_f64().unwrap();
    assert!(m("10") <= m("8") + 1e-3);
}

#[test]
fn dimension_modes() {
    let v = json(&["dimension"]);
    let e = &v["result"]["estimate"];
    assert!((e["value"].as_f64().unwrap() - 0.6309).abs() <= 0.02);
    assert!(e["regression_residual"].is_number());
    let v = json(&["dimension", "--set", "dimension.mode=\"sweep\"", "--set", "dimension.couplings=[16.0, 32.0]"]);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["dim_log_v"].is_number()));
}

#[test]
fn certify_reports_flags() {
    let v = json(&["certify", "--set", "certify.samples=200", "--seed", "4"]);
    let r = &v["result"];
    assert_eq!(r["seed"], 4);
    let flags = &r["recurrence"]["run_dd"]["flags"];
    assert_eq!(flags["final_cone"], true);
    assert_eq!(flags["final_growth"], true);
    assert_eq!(r["model_map"]["perturbed"]["pass_fraction"], 1.0);
    assert!(r["empirical"]["min_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn mesh_points_lie_on_the_surface() {
    let v = json(&["mesh", "--set", "mesh.resolution=41"]);
    let level = 0.01f64 * 0.01 / 4.0;
    for p in v["result"]["points"].as_array().unwrap() {
        let q = Point3::new(p[0].as_f64().unwrap(), p[1].as_f64().unwrap(), p[2].as_f64().unwrap());
        let g = fricke(q);
        assert!((g - level).abs() <= 1e-9 * (1.0 + q.sup_norm().powi(3)), "{q:?}: {g}");
    }
    let v = json(&[
        "mesh",
        "--set", "mesh.coupling=0.2",
        "--set", "mesh.x_range=[0.8, 1.2]",
        "--set", "mesh.y_range=[0.8, 1.2]",
        "--set", "mesh.per2=true",
    ]);
    for p in v["result"]["per2"].as_array().unwrap() {
        assert!(p["period_two_defect"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn subshift_counts() {
    let r = &json(&["subshift", "--set", "subshift.n=2"])["result"];
    assert_eq!(r["word_count"], 10);
    assert_eq!(r["periodic_count"], 4);
    assert_eq!(r["entropy"].as_f64().unwrap(), r["spectral_radius"].as_f64().unwrap().ln());
    let r = &json(&["subshift", "--set", "subshift.n=3"])["result"];
    assert_eq!(r["periodic_count"], 0);
}

#[test]
fn stdout_is_deterministic() {
    let a = fibtrace(&["certify", "--set", "certify.samples=100", "--threads", "2"]);
    let b = fibtrace(&["certify", "--set", "certify.samples=100", "--threads", "3"]);
    assert_eq!(a.stdout, b.stdout);
}
