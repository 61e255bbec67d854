mod common;

use std::path::Path;
use std::process::{Command, Output};

use confprod::Report;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confprod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scene_arg(name: &str) -> String {
    common::scene(name).to_str().unwrap().to_string()
}

fn report(out: &Output) -> Report {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write_temp(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_flat_product_passes_tightly() {
    let out = run(&[
        "verify",
        "--scene",
        &scene_arg("flat_torus.json"),
        "--points",
        "16",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r.pass);
    assert!(r.checks.iter().all(|c| c.max < 1e-12), "{:?}", r.checks);
    assert_eq!(r.check("ricci").unwrap().points, 16);
}

#[test]
fn verify_sphere_product_is_einstein() {
    let out = run(&[
        "verify",
        "--scene",
        &scene_arg("sphere_product.json"),
        "--points",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let e = r.check("einstein").unwrap();
    assert!(e.pass && e.max < 1e-9);
    assert_eq!(r.details["lambda"], 1.0);
    assert_eq!(
        r.details["oracle_filled_classes"].as_array().unwrap().len(),
        0
    );
}

#[test]
fn verify_is_deterministic_modulo_wall_time() {
    let args = [
        "verify",
        "--scene",
        &scene_arg("sum_form.json"),
        "--points",
        "10",
        "--seed",
        "9",
    ];
    let (a, b) = (report(&run(&args)), report(&run(&args)));
    assert_eq!(a.to_json_without_time(), b.to_json_without_time());
    let c = report(&run(&[
        "verify",
        "--scene",
        &scene_arg("sum_form.json"),
        "--points",
        "10",
        "--seed",
        "10",
    ]));
    assert_ne!(a.to_json_without_time(), c.to_json_without_time());
}

#[test]
fn non_symmetric_metric_is_rejected_with_paths() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(
        dir.path(),
        "bad.json",
        r#"{"split":{"n1":2,"n2":1},"g1":[["1","x1"],["x2","1"]],"g2":[["1"]],"f1":"0","f2":"0"}"#,
    );
    let out = run(&["verify", "--scene", &path]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("$.g1[0][1]") && err.contains("$.g1[1][0]"),
        "{err}"
    );
}

#[test]
fn schema_errors_name_their_location() {
    let dir = tempfile::tempdir().unwrap();
    for (text, needle) in [
        (
            r#"{"split":{"n1":1,"n2":1},"g1":[["1"]],"g2":[["1"]],"f1":"sin(","f2":"0"}"#,
            "$.f1",
        ),
        (
            r#"{"split":{"n1":1,"n2":1},"g1":[["1"]],"g2":[["1"]],"f1":"0","f2":"0","colour":1}"#,
            "colour",
        ),
        (
            r#"{"split":{"n1":1,"n2":1},"g1":[["1"]],"g2":[["1", "0"]],"f1":"0","f2":"0"}"#,
            "$.g2[0]",
        ),
        (
            r#"{"split":{"n1":1,"n2":1},"g1":[["y1"]],"g2":[["1"]],"f1":"0","f2":"0"}"#,
            "$.g1",
        ),
        (
            r#"{"split":{"n1":1,"n2":1},"g1":[["1"]],"g2":[["1"]],"f1":"0","f2":"0","domain":[[1,0],[0,1]]}"#,
            "$.domain[0]",
        ),
        (
            r#"{"split":{"n1":1,"n2":1},"g1":[["1"]],"g2":[["1"]],"f1":"0","f2":"0","tolerances":{"ricci":1}}"#,
            "$.tolerances.ricci",
        ),
        (
            r#"{"split":{"n1":"one","n2":1},"g1":[["1"]],"g2":[["1"]],"f1":"0","f2":"0"}"#,
            "$.split.n1",
        ),
    ] {
        let out = run(&["verify", "--scene", &write_temp(dir.path(), "s.json", text)]);
        assert_eq!(out.status.code(), Some(1), "{text}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{needle} not in {err}");
    }
}

#[test]
fn tolerance_overrides() {
    let scene = scene_arg("flat_torus.json");
    let r = report(&run(&[
        "--tol", "lc=1e-3", "verify", "--scene", &scene, "--points", "2",
    ]));
    assert_eq!(r.tolerances["lc"], 1e-3);
    let out = run(&["verify", "--scene", &scene, "--tol", "bogus=1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["verify", "--scene", &scene, "--tol", "nonsense"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn report_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "verify",
        "--scene",
        &scene_arg("flat_torus.json"),
        "--points",
        "2",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Report = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(r.command, "verify");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn split_sum_form_passes() {
    let out = run(&[
        "split",
        "--scene",
        &scene_arg("sum_form.json"),
        "--grid",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r.check("conformality").unwrap().max < 1e-10);
    assert_eq!(r.details["regauge"]["performed"], false);
    assert_eq!(r.details["h1"]["x_samples"].as_array().unwrap().len(), 9);
}

#[test]
fn split_cross_term_fails_precondition() {
    let out = run(&[
        "split",
        "--scene",
        &scene_arg("cross_term.json"),
        "--grid",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert!(!r.pass);
    assert_eq!(r.preconditions[0].check, "d1d2f2");
    assert_eq!(r.preconditions[0].message, "d1d2f2 nonzero");
}

#[test]
fn split_records_regauge() {
    let out = run(&[
        "split",
        "--scene",
        &scene_arg("regauge.json"),
        "--grid",
        "7",
        "--basepoint",
        "1.0,1.0;1.0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.details["regauge"]["performed"], true);
    assert!(r.details["regauge"]["f1"].as_str().unwrap().contains("y1"));
    assert!(r.check("conformality").unwrap().max < 1e-10);
    let out = run(&[
        "split",
        "--scene",
        &scene_arg("regauge.json"),
        "--basepoint",
        "1.0;1.0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ode_family_and_constant_scenes() {
    let r = report(&run(&[
        "ode",
        "--scene",
        &scene_arg("ode_family.json"),
        "--points",
        "10",
    ]));
    for c in r
        .checks
        .iter()
        .filter(|c| c.name.starts_with("kderiv") || c.name.starts_with("homogeneity"))
    {
        assert!(c.max < 1e-8 && c.not_applicable == 0, "{c:?}");
    }
    let r = report(&run(&[
        "ode",
        "--scene",
        &scene_arg("ode_constant.json"),
        "--points",
        "5",
    ]));
    assert!(r.checks.iter().all(|c| c.max == 0.0));
    assert_eq!(r.check("eqlambda").unwrap().not_applicable, 5);
    let out = run(&[
        "ode",
        "--scene",
        &scene_arg("ode_generic.json"),
        "--points",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out).check("ric11sp").unwrap().max > 1e-3);
    let r = report(&run(&[
        "ode",
        "--scene",
        &scene_arg("ode_family.json"),
        "--points",
        "3",
        "--tol",
        "max_order=5",
    ]));
    assert!(r.check("homogeneity_A-1").unwrap().max < 1e-8);
}

#[test]
fn ode_needs_a_one_dimensional_base() {
    let out = run(&["ode", "--scene", &scene_arg("sphere_product.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.split.n1"));
}

#[test]
fn search_commands() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let t = trace.to_str().unwrap();

    let r = report(&run(&[
        "search",
        "--config",
        &scene_arg("search_zero.json"),
        "--out",
        t,
    ]));
    assert_eq!(r.details["iterations"], 0);
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 1);

    let out = run(&[
        "search",
        "--config",
        &scene_arg("search_cross_mode.json"),
        "--out",
        t,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r.details["objective"].as_f64().unwrap() < 1e-6);
    assert!(r.details["split_diagnostic"]["max"].as_f64().unwrap() < 1e-3);
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.len() > 1);
    for l in &lines {
        let mut keys: Vec<&str> = l.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(
            keys,
            ["grad_norm", "iter", "objective", "split_diag", "step"]
        );
    }
    assert!(lines
        .windows(2)
        .all(|w| w[1]["objective"].as_f64() <= w[0]["objective"].as_f64()));

    let out = run(&[
        "search",
        "--config",
        &scene_arg("search_aliased.json"),
        "--out",
        t,
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.grid"));
}

#[test]
fn search_overflow_is_a_numerical_abort() {
    let dir = tempfile::tempdir().unwrap();
    let mut f2 = vec![0.0; 27];
    f2[0] = 400.0;
    let cfg = serde_json::json!({
        "split": { "n1": 1, "n2": 2 },
        "init": { "coefficients": { "f1": vec![0.0; 9], "f2": f2 } }
    });
    let path = write_temp(dir.path(), "c.json", &cfg.to_string());
    let trace = dir.path().join("t.jsonl");
    let out = run(&[
        "search",
        "--config",
        &path,
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!trace.exists());
}
