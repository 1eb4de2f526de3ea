use std::path::Path;

use serde_json::Value;
use sphframes_cli::{run, EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK};

fn sphframes(args: &[&str]) -> i32 {
    run(std::iter::once("sphframes").chain(args.iter().copied()))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn build_grid(dir: &Path, k: &str) -> String {
    let grid = dir.join(format!("grid{k}.json"));
    let grid = grid.to_str().unwrap().to_string();
    let code = sphframes(&[
        "grid-build",
        "--n",
        "2",
        "--k",
        k,
        "--scales",
        "geometric:1,0.9,25",
        "--placement",
        "center",
        "-o",
        &grid,
    ]);
    assert_eq!(code, EXIT_OK);
    grid
}

#[test]
fn semiframe_example_is_nearly_tight() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("semi.json");
    let csv = dir.path().join("profile.csv");
    let code = sphframes(&[
        "semiframe",
        "--family",
        "poisson",
        "--m",
        "2",
        "--n",
        "2",
        "--q",
        "0.99",
        "--b0",
        "20",
        "--J",
        "2000",
        "--lmax",
        "200",
        "--profile",
        csv.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let v = read_json(&out);
    let (a, b) = (v["result"]["A"].as_f64().unwrap(), v["result"]["B"].as_f64().unwrap());
    assert!((a - 1.0).abs() < 0.01 && (b - 1.0).abs() < 0.01);
    assert_eq!(v["config"]["q"], "0.99");
    assert_eq!(v["version"], sphframes::VERSION);
    let profile = std::fs::read_to_string(csv).unwrap();
    assert!(profile.starts_with("l,S\n"));
    assert_eq!(profile.lines().count(), 201);
}

#[test]
fn grid_build_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let first = std::fs::read(build_grid(dir.path(), "3")).unwrap();
    let again = dir.path().join("again.json");
    let code = sphframes(&[
        "grid-build",
        "--n",
        "2",
        "--k",
        "3",
        "--scales",
        "geometric:1,0.9,25",
        "--placement",
        "center",
        "-o",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(first == std::fs::read(again).unwrap());
    let grid = sphframes::sphere::PhaseSpaceGrid::read(dir.path().join("grid3.json")).unwrap();
    assert_eq!(grid.len(), 25 * 384);
    assert_eq!(grid.meta().provenance.as_ref().unwrap()["config"]["k"], "3");
}

#[test]
fn eig_audit_reports_a_positive_lower_bound() {
    let dir = tempfile::tempdir().unwrap();
    let grid = build_grid(dir.path(), "3");
    let out = dir.path().join("eig.json");
    let code = sphframes(&[
        "frame-audit",
        "--method",
        "eig",
        "--grid",
        &grid,
        "--family",
        "poisson",
        "--m",
        "3",
        "--band",
        "10",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let v = read_json(&out);
    assert!(v["result"]["a_hat"].as_f64().unwrap() > 0.0);
    assert!(v["result"]["b_hat"].as_f64().unwrap().is_finite());
    assert!(v.get("meta").is_none());
}

#[test]
fn mc_audit_repeats_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let grid = build_grid(dir.path(), "2");
    let outputs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("mc{i}.json"));
            let code = sphframes(&[
                "frame-audit",
                "--method",
                "mc",
                "--grid",
                &grid,
                "--band",
                "4",
                "--trials",
                "5",
                "--seed",
                "9",
                "-o",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, EXIT_OK);
            std::fs::read(out).unwrap()
        })
        .collect();
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn timing_goes_to_a_separate_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("adm.json");
    assert_eq!(
        sphframes(&["admissibility", "--m", "3", "--timing", "-o", out.to_str().unwrap()]),
        EXIT_OK
    );
    let v = read_json(&out);
    assert!(v["meta"]["runtime_s"].as_f64().unwrap() >= 0.0);
    let closed = v["result"]["i_gamma_closed"].as_f64().unwrap();
    let numeric = v["result"]["i_gamma_numeric"].as_f64().unwrap();
    assert!((closed - numeric).abs() < 1e-10 * closed);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# eval settings\nn = 3\nm = 2\na = 0.7\ntheta = 0.5\n").unwrap();
    let out = dir.path().join("eval.json");
    let code = sphframes(&[
        "eval",
        "--config",
        cfg.to_str().unwrap(),
        "--m",
        "3",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let v = read_json(&out);
    assert_eq!(v["config"]["n"], "3");
    assert_eq!(v["config"]["m"], "3");
    assert_eq!(v["config"]["omega"], "1");
    assert_eq!(v["result"]["family"], "poisson(3)");
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn exit_codes_follow_the_contract() {
    assert_eq!(sphframes(&["kernel-check", "--eps_tilde", "0.6"]), EXIT_CONFIG);
    assert_eq!(sphframes(&["eval", "--n", "1"]), EXIT_CONFIG);
    assert_eq!(sphframes(&["eval", "--no-such-flag", "1"]), EXIT_CONFIG);
    assert_eq!(sphframes(&["no-such-command"]), EXIT_CONFIG);
    assert_eq!(sphframes(&["eval", "--a", "0.0001"]), EXIT_CONFIG);
    assert_eq!(
        sphframes(&["frame-audit", "--grid", "/nonexistent/grid.json"]),
        EXIT_CONFIG
    );
    let dir = tempfile::tempdir().unwrap();
    let grid = build_grid(dir.path(), "2");
    assert_eq!(
        sphframes(&["reconstruct", "--grid", &grid, "--band", "4", "--max_iter", "2"]),
        EXIT_NUMERIC
    );
}

#[test]
fn remaining_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let grid = build_grid(dir.path(), "2");
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let csv = p("scan.csv");
    let cases: Vec<Vec<String>> = vec![
        vec![
            "localization".into(),
            "--a_per_decade".into(),
            "4".into(),
            "--theta_per_decade".into(),
            "8".into(),
            "--csv".into(),
            csv.clone(),
        ],
        vec![
            "kernel-check".into(),
            "--scales_per_decade".into(),
            "2".into(),
            "--angles_per_decade".into(),
            "6".into(),
            "--b_min".into(),
            "0.05".into(),
        ],
        vec![
            "grid-density".into(),
            "--grid".into(),
            grid.clone(),
            "--probes".into(),
            "8".into(),
            "--rho".into(),
            "5".into(),
        ],
        vec![
            "reconstruct".into(),
            "--grid".into(),
            grid.clone(),
            "--band".into(),
            "4".into(),
        ],
        vec!["eval".into(), "--quantity".into(), "gradient".into()],
    ];
    for (i, case) in cases.iter().enumerate() {
        let out = p(&format!("out{i}.json"));
        let mut args: Vec<&str> = case.iter().map(String::as_str).collect();
        args.extend(["-o", out.as_str()]);
        assert_eq!(sphframes(&args), EXIT_OK, "{case:?}");
        assert!(read_json(Path::new(&out))["result"].is_object());
    }
    assert!(std::fs::read_to_string(csv)
        .unwrap()
        .starts_with("a,theta,value,scaled_value\n"));
    let v = read_json(Path::new(&p("out1.json")));
    assert!((v["result"]["normalization"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["result"]["max_relative_error"].as_f64().unwrap() < 1e-8);
}
