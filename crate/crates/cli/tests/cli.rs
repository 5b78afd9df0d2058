use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qslice(args: &[&str]) -> Output {
    qslice_env(args, &[])
}

fn qslice_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qslice"));
    cmd.args(args).env_remove("QSLICE_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn small_raster_is_a_p6_image() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("s.ppm");
    let png = dir.path().join("s.png");
    let o = qslice(&[
        "raster", "--center", "0,0", "--size", "4x4", "--res", "16", "--out", path_str(&ppm), "--png",
        path_str(&png),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let bytes = fs::read(&ppm).unwrap();
    assert!(bytes.starts_with(b"P6\n16 16\n255\n"));
    assert_eq!(bytes.len(), "P6\n16 16\n255\n".len() + 16 * 16 * 3);
    assert!(fs::read(&png).unwrap().starts_with(b"\x89PNG"));
    let stats: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(stats["config"]["res"], 16);
    assert_eq!(stats["stats"]["cols"], 16);
}

#[test]
fn zero_resolution_is_a_usage_error() {
    let o = qslice(&["raster", "--res", "0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--res"), "{}", stderr(&o));
    let o = qslice(&["raster", "--size", "0x3", "--res", "4"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--size"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = qslice(&[
        "raster", "--center", "0,0", "--size", "2", "--res", "2", "--out", "/nonexistent/dir/x.ppm",
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn malformed_point_is_a_usage_error() {
    let o = qslice(&["trace-at", "abc"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn trace_at_fuchsian_point() {
    let o = qslice(&["trace-at", "0,0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "fuchsian");
    for t in v["traces"].as_array().unwrap() {
        assert!(t[1].as_f64().unwrap().abs() < 1e-10);
        assert!(t[0].as_f64().unwrap().abs() > 2.0);
    }
    let kappa = v["kappa"][0].as_f64().unwrap();
    assert!((kappa + 2.0).abs() < 1e-8);
}

#[test]
fn trace_at_far_point_has_no_discrete_verdict() {
    let o = qslice(&["trace-at", "-45,-60"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let verdict = v["verdict"].as_str().unwrap();
    assert!(verdict == "not-discrete" || verdict == "inconclusive", "{verdict}");
    if verdict == "not-discrete" {
        assert!(v["witness"]["slope"].is_string());
    }
}

#[test]
fn degenerate_window_has_no_centers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = qslice(&[
        "centers", "--center", "5,5", "--size", "1e-6", "--res", "4", "--out", path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "0");
    assert_eq!(fs::read_to_string(&out).unwrap().trim(), "[]");
}

#[test]
fn growing_windows_do_not_lose_centers() {
    let dir = tempfile::tempdir().unwrap();
    let mut counts = Vec::new();
    for (size, res) in [("4", "8"), ("30", "30"), ("50", "50"), ("90", "90")] {
        let out = dir.path().join(format!("c{size}.json"));
        let o = qslice(&["centers", "--size", size, "--res", res, "--out", path_str(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let n: usize = stdout(&o).trim().parse().unwrap();
        let json: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(json.as_array().unwrap().len(), n);
        counts.push(n);
    }
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    assert!(counts[0] >= 1, "the Fuchsian point is always found");
    assert!(counts[3] >= 5, "{counts:?}");
}

#[test]
fn verify_passes_and_filters() {
    let o = qslice(&["verify"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let o = qslice(&["verify", "--suite", "elliptic"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("elliptic"));
    assert!(!out.contains("parabolicity"));
    let o = qslice(&["verify", "--suite", "nonsense"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn perturbed_theta_fails_parabolicity() {
    let o = qslice(&["verify", "--suite", "parabolicity", "--theta", "0.45"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("parabolicity   FAIL"));
    assert!(stderr(&o).contains("puncture trace"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let ppm = dir.path().join("a.ppm");
    fs::write(&cfg, format!("# test run\nsize = 6x3\nres = 8\ncenter = 1,0\nout = {}\n", ppm.display())).unwrap();
    let o = qslice(&["raster", "--config", path_str(&cfg), "--res", "12"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(fs::read(&ppm).unwrap().starts_with(b"P6\n12 6\n255\n"));
    let stats: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(stats["config"]["res"], 12);
    assert_eq!(stats["config"]["width"], 6.0);
    assert_eq!(stats["config"]["center"][0], 1.0);

    fs::write(&cfg, "size = 6x3\nresolution = 8\n").unwrap();
    assert_eq!(code(&qslice(&["raster", "--config", path_str(&cfg)])), 2);
    let missing = dir.path().join("missing.cfg");
    assert_eq!(code(&qslice(&["raster", "--config", path_str(&missing)])), 1);
}

#[test]
fn worker_variable_only_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("w.ppm");
    let base = ["raster", "--center", "0,0", "--size", "2", "--res", "4", "--out", path_str(&ppm)];
    let o = qslice_env(&base, &[("QSLICE_WORKERS", "3")]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["workers"], 3);
    let mut with_flag = base.to_vec();
    with_flag.extend(["--workers", "2"]);
    let o = qslice_env(&with_flag, &[("QSLICE_WORKERS", "junk")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["workers"], 2);
    let o = qslice_env(&base, &[("QSLICE_WORKERS", "junk")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("QSLICE_WORKERS"));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let ppm = dir.path().join(format!("r{workers}.ppm"));
        let json = dir.path().join(format!("c{workers}.json"));
        let o = qslice(&[
            "raster", "--size", "50", "--res", "40", "--workers", workers, "--out", path_str(&ppm), "--centers",
            path_str(&json),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        outputs.push((fs::read(&ppm).unwrap(), fs::read(&json).unwrap()));
    }
    assert!(outputs[0] == outputs[1]);
    assert!(String::from_utf8(outputs[0].1.clone()).unwrap().starts_with("[{\"c\":"));
}

#[test]
fn version_prints_name() {
    let o = qslice(&["version"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("qslice "));
}
