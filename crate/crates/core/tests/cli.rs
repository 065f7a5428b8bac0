mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const M4: &str = r#"{"type":"m4","rows":[[0.125,0.125,0.125,0.125],[0.625,0.5,0.875,0.125],[0.125,0.25,0.0,0.0],[0.125,0.125,0.0,0.75]]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_extdep"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m4.csv");
    ok(&[
        "--seed",
        "3",
        "--out",
        p(&csv),
        "simulate",
        "--model",
        M4,
        "--n",
        "50",
    ]);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3,x4"));
    let first = lines.next().unwrap();
    // 17 significant digits
    assert!(
        first
            .split(',')
            .all(|v| v.split('e').next().unwrap().len() == 18),
        "{first}"
    );
    assert_eq!(text.lines().count(), 51);
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m4.csv.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["n"], 50);
    assert_eq!(meta["seed"]["value"], 3);
    assert_eq!(meta["model"]["type"], "m4");
    assert_eq!(meta["margins"][0]["family"], "unit_frechet");

    // same seed, same bytes; thread count does not matter
    let again = dir.path().join("again.csv");
    ok(&[
        "--seed",
        "3",
        "--threads",
        "2",
        "--out",
        p(&again),
        "simulate",
        "--model",
        M4,
        "--n",
        "50",
    ]);
    assert_eq!(fs::read(&csv).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn estimate_json_and_tsv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m4.csv");
    ok(&[
        "--seed",
        "11",
        "--out",
        p(&csv),
        "simulate",
        "--model",
        M4,
        "--n",
        "20000",
    ]);
    let js = ok(&[
        "estimate",
        "--input",
        p(&csv),
        "--margins",
        "meta",
        "--i1",
        "1,2",
        "--i2",
        "3,4",
    ]);
    let v: Value = serde_json::from_str(&js).unwrap();
    assert_eq!(v["estimator"], "eps_pair");
    assert_eq!(v["provenance"], "known_margins");
    assert_eq!(v["n"], 20000);
    let (value, se) = (
        v["value"].as_f64().unwrap(),
        v["std_error"].as_f64().unwrap(),
    );
    assert!((value - 0.875).abs() < 4.0 * se, "{value} {se}");
    let ci = v["ci"].as_array().unwrap();
    assert!(ci[0].as_f64().unwrap() < value && value < ci[1].as_f64().unwrap());

    // explicit Frechet margins equal the sidecar margins here
    let js2 = ok(&[
        "estimate",
        "--input",
        p(&csv),
        "--margins",
        "frechet",
        "--i1",
        "1,2",
        "--i2",
        "3,4",
    ]);
    let v2: Value = serde_json::from_str(&js2).unwrap();
    assert_eq!(v2["value"], v["value"]);

    let tsv = ok(&[
        "estimate",
        "--input",
        p(&csv),
        "--i1",
        "1",
        "--i2",
        "4",
        "--x",
        "2",
        "--y",
        "0.5",
        "--estimator",
        "lambda",
        "--format",
        "tsv",
        "--level",
        "0.9",
    ]);
    let rows: Vec<&str> = tsv.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("estimator\tvalue\tstd_error"));
    let fields: Vec<&str> = rows[1].split('\t').collect();
    assert_eq!(fields[0], "lambda");
    assert_eq!(fields[5], "0.9");
    assert_eq!(fields[7], "empirical_ranks");

    let stdf = ok(&[
        "estimate",
        "--input",
        p(&csv),
        "--margins",
        "frechet",
        "--estimator",
        "stdf",
        "--stdf-x",
        "1,1,inf,inf",
    ]);
    let scaled = ok(&[
        "estimate",
        "--input",
        p(&csv),
        "--margins",
        "frechet",
        "--estimator",
        "eps-scaled",
        "--i1",
        "1,2",
    ]);
    let (a, b): (Value, Value) = (
        serde_json::from_str(&stdf).unwrap(),
        serde_json::from_str(&scaled).unwrap(),
    );
    assert_eq!(a["value"], b["value"]);
}

#[test]
fn theory_prints_functionals() {
    let js = ok(&[
        "theory",
        "--model",
        M4,
        "--i1",
        "1,2",
        "--i2",
        "3,4",
        "--grid",
        "1:1,0:1,2:3",
    ]);
    let v: Value = serde_json::from_str(&js).unwrap();
    assert_eq!(v["eps_pair"], 0.875);
    assert_eq!(v["pair"], "{1,2},{3,4}");
    let grid = v["grid"].as_array().unwrap();
    assert_eq!(grid.len(), 3);
    assert_eq!(grid[0]["lambda_u"], 0.875);
    assert_eq!(grid[1]["lambda_u"], 0.0);

    let g = ok(&[
        "theory",
        "--model",
        r#"{"type":"gaussian","corr":[[1,0.5],[0.5,1]]}"#,
        "--i1",
        "1",
        "--i2",
        "2",
    ]);
    let v: Value = serde_json::from_str(&g).unwrap();
    assert_eq!(v["eta"], 0.75);
    assert_eq!(v["eps_pair"], 0.0);
}

#[test]
fn mc_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mc.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"model":{M4},"pair":{{"i1":[1,2],"i2":[3,4]}},"target":{{"kind":"l_pair","x":1,"y":1}},
               "n":200,"reps":100,"seed":{{"value":1}},"provenance":"known_margins"}}"#
        ),
    )
    .unwrap();
    let report = dir.path().join("report.json");
    ok(&["--out", p(&report), "mc", "--config", p(&cfg)]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    for key in [
        "estimates",
        "truth",
        "scaled_mean",
        "scaled_var",
        "theory_var",
        "var_ratio",
        "ks_distance",
        "pass",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["estimates"].as_array().unwrap().len(), 100);
    assert_eq!(v["truth"], 2.0);

    let again = ok(&["--threads", "3", "mc", "--config", p(&cfg)]);
    let w: Value = serde_json::from_str(&again).unwrap();
    assert_eq!(v["estimates"], w["estimates"]);
    let reseeded: Value =
        serde_json::from_str(&ok(&["--seed", "2", "mc", "--config", p(&cfg)])).unwrap();
    assert_ne!(v["estimates"], reseeded["estimates"]);

    let cons = ok(&[
        "mc",
        "--config",
        p(&cfg),
        "--mode",
        "consistency",
        "--n-grid",
        "100,400,1600",
    ]);
    let c: Value = serde_json::from_str(&cons).unwrap();
    assert_eq!(c["rows"].as_array().unwrap().len(), 3);

    let surv = dir.path().join("surv.json");
    fs::write(
        &surv,
        r#"{"t":10,"x":1,"y":1,"pair":{"i1":[1,2,3],"i2":[4]},"n":200000}"#,
    )
    .unwrap();
    let s: Value =
        serde_json::from_str(&ok(&["mc", "--config", p(&surv), "--mode", "survival"])).unwrap();
    assert!(s["closed_form"].as_f64().unwrap() > 0.0);
}

#[test]
fn analyze_bundled_markets() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    // rename the synthetic columns to the bundled market names
    let csv = common::synthetic_m4_prices(120, 5).replacen(
        "date,x1,x2,x3,x4,y1,y2,y3,y4",
        "date,CAC40,FTSE100,DowJones,Nasdaq,SMI,XDAX,HSI,Nikkei",
        1,
    );
    fs::write(&prices, csv).unwrap();
    let tsv = ok(&["analyze", "--input", p(&prices)]);
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[0].starts_with("group1\tgroup2\teps_pair"));
    assert!(lines[4].starts_with("Europe\tUSA|FarEast\t"));
    let value = lines[1].split('\t').nth(2).unwrap();
    assert_eq!(value.split('.').nth(1).unwrap().len(), 9);
    let n: usize = lines[1].split('\t').nth(9).unwrap().parse().unwrap();
    assert_eq!(n, 120);

    let js = ok(&["analyze", "--input", p(&prices), "--format", "json"]);
    let v: Value = serde_json::from_str(&js).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // validation error
    let out = run(&["theory", "--model", M4, "--i1", "1,2", "--i2", "2,3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlap"));
    let out = run(&[
        "theory",
        "--model",
        r#"{"type":"logistic","theta":0,"d":3}"#,
        "--i1",
        "1",
        "--i2",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // missing file
    assert_eq!(
        run(&["analyze", "--input", "/nonexistent.csv"])
            .status
            .code(),
        Some(2)
    );
    // bad price file reports the line
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "date,A\n2020-01-02,1\n2020-01-03,-4\n").unwrap();
    let out = run(&["analyze", "--input", p(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    // no exact truth for a non-max-stable model
    let cfg = dir.path().join("mc.json");
    fs::write(
        &cfg,
        r#"{"model":{"type":"minfactor"},"pair":{"i1":[1],"i2":[4]},"target":{"kind":"l_pair","x":1,"y":1},
            "n":100,"reps":10,"provenance":"known_margins"}"#,
    )
    .unwrap();
    assert_eq!(run(&["mc", "--config", p(&cfg)]).status.code(), Some(3));
    // numeric degeneracy: all rows identical under uniform margins near 1
    let flat = dir.path().join("flat.csv");
    fs::write(&flat, "x1,x2\n1,1\n1,1\n1,1\n").unwrap();
    let out = run(&[
        "estimate",
        "--input",
        p(&flat),
        "--margins",
        "uniform",
        "--i1",
        "1",
        "--i2",
        "2",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // clap usage error
    assert_eq!(run(&["estimate"]).status.code(), Some(2));
}
