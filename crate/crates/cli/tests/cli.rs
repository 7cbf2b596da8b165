use dphase::grid::Grid;
use dphase::io;
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn dptool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dptool")).args(args).output().expect("spawn dptool")
}

fn scratch(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn p(d: &std::path::Path, f: &str) -> String {
    d.join(f).to_string_lossy().into_owned()
}

#[test]
fn unknown_suite_exits_2_without_output() {
    let out = dptool(&["verify", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_seed_and_missing_file_exit_2() {
    assert_eq!(dptool(&["--seed", "0xZZ", "verify", "--suite", "grid"]).status.code(), Some(2));
    assert_eq!(dptool(&["exponents", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
}

#[test]
fn verify_writes_report_into_output_dir() {
    let d = scratch("verify_grid");
    let out = dptool(&["--output-dir", &d.to_string_lossy(), "--seed", "0x5EED", "verify", "--suite", "grid"]);
    assert_eq!(out.status.code(), Some(0));
    let file = std::fs::read(d.join("grid.json")).unwrap();
    assert_eq!(file, out.stdout);
    let v = json(&out);
    assert_eq!(v["suite"], "grid");
    assert_eq!(v["config_echo"]["seed"], 0x5EED);
    assert!(v["timing_ms"].is_null());
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}

#[test]
fn exponents_prints_derived_block() {
    let d = scratch("exponents");
    let cfg = d.join("cfg.json");
    std::fs::write(&cfg, r#"{"n":2,"m":1,"p":2,"q":2.2,"alpha":0.5,"s":[["inf","inf"],["inf","inf"]],"t":[["inf","inf"],["inf","inf"]]}"#).unwrap();
    let out = dptool(&["exponents", "--config", &cfg.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["delta_hat"].as_f64().unwrap() - 11.0 / 21.0).abs() < 1e-15);
    // q beyond the admissible gap is infeasible
    std::fs::write(&cfg, r#"{"n":2,"m":1,"p":2,"q":3.5,"alpha":0.5,"s":[["inf","inf"],["inf","inf"]],"t":[["inf","inf"],["inf","inf"]]}"#).unwrap();
    assert_eq!(dptool(&["exponents", "--config", &cfg.to_string_lossy()]).status.code(), Some(2));
}

#[test]
fn gehring_certificate_and_failing_scan() {
    let out = dptool(&["gehring", "--n", "1", "--A", "1", "--kappa", "0.5", "--eps0", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["c_star"].as_f64(), Some(1000.0));
    assert_eq!(v["eps_max"].as_f64(), Some(5e-4));

    let d = scratch("gehring");
    let g = Grid::cube(2, -1.0, 1.0, 48);
    let f1 = g.sample(|x| 1.0 / (x[0] * x[0] + x[1] * x[1]).sqrt()).unwrap();
    io::save(&d.join("f1.dpgrid"), &f1).unwrap();
    let f1p = p(&d, "f1.dpgrid");
    let ok = dptool(&["gehring", "--verify", "--f1", &f1p, "--A", "3.375", "--theta", "0.5"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(json(&ok)["premise_all"], true);
    // an A far below the measured one breaks the premise
    let bad = dptool(&["gehring", "--verify", "--f1", &f1p, "--A", "0.01"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["premise_all"], false);
}

#[test]
fn grid_commands_round_trip_files() {
    let d = scratch("grid_cmds");
    let g = Grid::cube(2, -1.0, 1.0, 32);
    io::save(&d.join("f.dpgrid"), &g.sample(|x| (-4.0 * (x[0] * x[0] + x[1] * x[1])).exp()).unwrap()).unwrap();
    io::save(&d.join("one.dpgrid"), &g.sample(|_| 1.0).unwrap()).unwrap();
    io::save(&d.join("a.dpgrid"), &g.sample(|x| (x[0] * x[0] + x[1] * x[1]).sqrt().sqrt()).unwrap()).unwrap();
    io::save(&d.join("mask.dpgrid"), &g.sample(|x| if x[0].hypot(x[1]) < 0.7 { 1.0 } else { 0.0 }).unwrap()).unwrap();
    let dir = d.to_string_lossy().into_owned();
    let f = p(&d, "f.dpgrid");

    let out = dptool(&["--output-dir", &dir, "maximal", "--input", &f, "--beta", "0.5", "--restrict", "ball:0,0,0.5", "--output", "mf.dpgrid"]);
    assert_eq!(out.status.code(), Some(0));
    let mf = io::load(&d.join("mf.dpgrid"), None).unwrap();
    assert_eq!(mf.grid, g);

    let out = dptool(&["--output-dir", &dir, "riesz", "--input", &f, "--gamma", "1", "--ball", "0,0,0.5", "--output", "if.dpgrid"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(io::load(&d.join("if.dpgrid"), None).unwrap().values.iter().all(|v| v.is_finite()));

    let out = dptool(&["--output-dir", &dir, "regularize", "--input", &p(&d, "a.dpgrid"), "--alpha", "0.5", "--output", "at.dpgrid"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["regularized"]["estimate"].as_f64().unwrap() <= 1.0 + 1e-12);

    let out = dptool(&["polyfit", "--input", &f, "--ball", "0,0,0.5", "--weight", &p(&d, "one.dpgrid"), "--order", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let coeffs = v["coefficients"].as_object().unwrap();
    assert_eq!(coeffs.len(), 3);
    assert!(coeffs["(1,0)"][0].as_f64().unwrap().abs() < 1e-12);

    let out = dptool(&["--output-dir", &dir, "whitney", "--mask", &p(&d, "mask.dpgrid"), "--output", "cover.json", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let cov: Value = serde_json::from_slice(&std::fs::read(d.join("cover.json")).unwrap()).unwrap();
    assert_eq!(cov["pass"], true);
    assert_eq!(cov["balls"].as_array().unwrap().len(), cov["neighbors"].as_array().unwrap().len());

    let bad = dptool(&["polyfit", "--input", &f, "--ball", "0,0", "--weight", &p(&d, "one.dpgrid"), "--order", "2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn truncate_writes_field_and_report() {
    let d = scratch("truncate");
    let g = Grid::cube(1, -1.0, 1.0, 256);
    io::save(&d.join("u.dpgrid"), &g.sample(|x| 0.05 * (2.0 * x[0]).sin() + 0.02 * (3.0 * x[0] + 0.5).cos()).unwrap()).unwrap();
    io::save(&d.join("a.dpgrid"), &g.sample(|_| 1.0).unwrap()).unwrap();
    std::fs::write(d.join("cfg.json"), r#"{"n":1,"m":2,"p":2,"q":2.2,"alpha":0.5,"s":[["inf","inf","inf"],["inf","inf","inf"]],"t":[["inf","inf","inf"],["inf","inf","inf"]]}"#).unwrap();
    let out = dptool(&[
        "--output-dir",
        &d.to_string_lossy(),
        "truncate",
        "--u",
        &p(&d, "u.dpgrid"),
        "--a",
        &p(&d, "a.dpgrid"),
        "--config",
        &p(&d, "cfg.json"),
        "--lambda-mult",
        "1.5",
        "--output",
        "v.dpgrid",
        "--report",
        "rep.json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep: Value = serde_json::from_slice(&std::fs::read(d.join("rep.json")).unwrap()).unwrap();
    assert_eq!(rep["suite"], "truncate");
    let v = io::load(&d.join("v.dpgrid"), None).unwrap();
    assert_eq!(v.grid, g);
}

#[test]
fn residual_rejects_test_function_touching_boundary() {
    let d = scratch("residual");
    let g = Grid::cube(2, -1.0, 1.0, 32);
    io::save(&d.join("u.dpgrid"), &g.sample(|x| x[0] - 2.0 * x[1]).unwrap()).unwrap();
    io::save(&d.join("a.dpgrid"), &g.sample(|_| 1.0).unwrap()).unwrap();
    io::save(&d.join("one.dpgrid"), &g.sample(|_| 1.0).unwrap()).unwrap();
    io::save(&d.join("phi.dpgrid"), &g.sample(|x| (0.25 - x[0] * x[0] - x[1] * x[1]).max(0.0).powi(3)).unwrap()).unwrap();
    let base = [p(&d, "u.dpgrid"), p(&d, "a.dpgrid")];
    let run = |phi: &str| dptool(&["residual", "--u", &base[0], "--a", &base[1], "--phi", &p(&d, phi), "--p", "2", "--q", "2.2"]);
    let ok = run("phi.dpgrid");
    assert_eq!(ok.status.code(), Some(0));
    // affine u solves the system, so the residual is rounding only
    assert!(json(&ok)["residual"].as_f64().unwrap().abs() < 1e-10);
    let bad = run("one.dpgrid");
    assert_eq!(bad.status.code(), Some(2));
    assert!(bad.stdout.is_empty());
}
