use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tmsv"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
}

fn golden(name: &str) -> String {
    fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn err_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).expect("error report is JSON")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Bundled scenario with a shorter record.
fn short_scenario(dir: &Path, name: &str, r: Option<f64>) -> PathBuf {
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(scenario(name)).unwrap()).unwrap();
    doc["synth"]["duration"] = 4e-4.into();
    doc["analysis"] = serde_json::json!({"window": 20000, "max_delay": 20});
    if let Some(r) = r {
        doc["r"] = r.into();
    }
    let path = dir.join(format!("{name}_short.json"));
    fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

#[test]
fn expect_bundled_scenarios() {
    let reference = ok_json(&["expect", "--scenario", s(&scenario("reference"))]);
    assert!((num(&reference, "squeezing_db") + 1.19).abs() < 0.01);
    assert!((num(&reference, "antisqueezing_db") - 4.39).abs() < 0.01);
    let deployed = ok_json(&["expect", "--scenario", s(&scenario("deployed"))]);
    assert!((num(&deployed, "squeezing_db") + 0.5).abs() < 0.05);
    assert!((num(&deployed, "antisqueezing_db") - 2.6).abs() < 0.05);
    let spools = ok_json(&["expect", "--scenario", s(&scenario("spools5km"))]);
    assert!((num(&spools, "squeezing_db") + 0.88).abs() < 0.02);
}

#[test]
fn expect_vacuum_is_zero_db() {
    let dir = tempfile::tempdir().unwrap();
    let path = short_scenario(dir.path(), "reference", Some(0.0));
    let v = ok_json(&["expect", "--scenario", s(&path)]);
    assert_eq!(num(&v, "squeezing_db"), 0.0);
    assert_eq!(num(&v, "antisqueezing_db"), 0.0);
}

#[test]
fn golden_outputs_are_bit_exact() {
    let out = run(&[
        "expect",
        "--scenario",
        s(&scenario("reference")),
        "--format",
        "csv",
    ]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        golden("expect_reference.csv")
    );
    let out = run(&["sideband", "--optimize", "4", "--v-pi", "5.65"]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        golden("sideband_optimize4.json")
    );
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("expect.txt");
    let out = run(&[
        "expect",
        "--scenario",
        s(&scenario("deployed")),
        "--format",
        "table",
        "--out",
        s(&report),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(
        fs::read_to_string(&report).unwrap(),
        golden("expect_deployed.txt")
    );
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let sc = short_scenario(dir.path(), "spools5km", None);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let o = run(&[
            "simulate",
            "--scenario",
            s(&sc),
            "--seed",
            seed,
            "--out",
            s(out),
            "--trace-format",
            "csv",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 9);
    for name in &names {
        let name = name.to_str().unwrap();
        let x = fs::read(a.join(name)).unwrap();
        assert_eq!(
            x,
            fs::read(b.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
        if name.ends_with(".csv") {
            assert_ne!(x, fs::read(c.join(name)).unwrap(), "{name} ignores the seed");
            assert!(!x.contains(&b'\r'));
        }
    }
    let first = fs::read_to_string(a.join("signal_1.csv")).unwrap();
    assert!(first.starts_with("index,volts,monitor_volts\n0,"));
    assert_eq!(first.lines().count(), 200_001);
}

/// Simulates a bundled scenario at full size and analyzes it with its own
/// settings; returns (analysis, prediction).
fn round_trip(name: &str, seed: &str) -> (Value, Value) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let sim = ok_json(&[
        "simulate",
        "--scenario",
        s(&scenario(name)),
        "--seed",
        seed,
        "--out",
        s(&out),
    ]);
    assert_eq!(sim["n_samples"], 2_000_000);
    let analysis = ok_json(&["analyze", "--input", s(&out), "--out", s(&dir.path().join("ana"))]);
    let written: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ana/report.json")).unwrap()).unwrap();
    assert_eq!(written, analysis);
    let series = fs::read_to_string(dir.path().join("ana/series.csv")).unwrap();
    assert!(series.starts_with("time_ms,V_plus,V_minus,V_SN_plus,V_SN_minus\n"));
    (analysis, ok_json(&["expect", "--scenario", s(&scenario(name))]))
}

#[test]
fn deployed_round_trip_matches_expectation() {
    let (a, p) = round_trip("deployed", "3");
    assert_eq!(a["optimal_delay"], 0);
    assert!(
        (num(&a, "squeezing_db") - num(&p, "squeezing_db")).abs() < 0.15,
        "{a}"
    );
    assert!((num(&a, "squeezing_db") + 0.5).abs() < 0.15, "{a}");
    assert!(
        (num(&a, "antisqueezing_db") - num(&p, "antisqueezing_db")).abs() < 0.25,
        "{a}"
    );
}

#[test]
fn swept_round_trips_match_expectation() {
    for name in ["reference", "spools5km"] {
        let (a, p) = round_trip(name, "4");
        // extremes of a 10k-sample rolling series sit a few standard errors
        // beyond the underlying level
        let tol = 3.0 * num(&a, "error_db");
        assert!(
            (num(&a, "squeezing_db") - num(&p, "squeezing_db")).abs() < tol,
            "{name}: {a}"
        );
        assert!(
            (num(&a, "antisqueezing_db") - num(&p, "antisqueezing_db")).abs() < tol,
            "{name}: {a}"
        );
        let fwhm = num(&a, "fwhm_ns");
        assert!((24.0..=56.0).contains(&fwhm), "{name}: {fwhm}");
    }
}

#[test]
fn analysis_flags_and_self_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    ok_json(&[
        "simulate",
        "--scenario",
        s(&scenario("reference")),
        "--seed",
        "5",
        "--out",
        s(&out),
    ]);
    let f = |n: &str| out.join(format!("{n}.f32")).to_str().unwrap().to_string();
    let (t1, t2, n1, n2) = (f("signal_1"), f("signal_2"), f("shot_noise_1"), f("shot_noise_2"));
    let narrow = ok_json(&[
        "analyze",
        "--traces",
        &t1,
        &t2,
        "--shot-noise",
        &n1,
        &n2,
        "--window",
        "10000",
        "--max-delay",
        "20",
    ]);
    let wide = ok_json(&[
        "analyze",
        "--traces",
        &t1,
        &t2,
        "--shot-noise",
        &n1,
        &n2,
        "--window",
        "30000",
        "--max-delay",
        "20",
    ]);
    assert_eq!(wide["window"], 30000);
    assert!(num(&wide, "squeezing_db").abs() < num(&narrow, "squeezing_db").abs());

    let own = ok_json(&[
        "analyze",
        "--traces",
        &n1,
        &n2,
        "--shot-noise",
        &n1,
        &n2,
        "--max-delay",
        "20",
    ]);
    let tol = 3.0 * num(&own, "error_db");
    assert!(num(&own, "squeezing_db").abs() < tol, "{own}");
    assert!(num(&own, "antisqueezing_db").abs() < tol, "{own}");
}

#[test]
fn vacuum_traces_analyze_to_zero_db() {
    let dir = tempfile::tempdir().unwrap();
    let sc = short_scenario(dir.path(), "deployed", Some(0.0));
    let out = dir.path().join("sim");
    ok_json(&["simulate", "--scenario", s(&sc), "--seed", "2", "--out", s(&out)]);
    let a = ok_json(&["analyze", "--input", s(&out)]);
    let tol = 3.0 * num(&a, "error_db");
    assert!(num(&a, "squeezing_db").abs() < tol, "{a}");
    assert!(num(&a, "antisqueezing_db").abs() < tol, "{a}");
}

#[test]
fn fit_recovers_pump_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep.csv");
    fs::write(&sweep, golden("sweep_eta_0.49019.csv")).unwrap();
    let v = ok_json(&["fit", "--sweep", s(&sweep)]);
    assert!((num(&v, "eta_p") - 0.49019).abs() < 1e-6, "{v}");
    assert!((num(&v, "r_at_pmax") - 0.986).abs() < 1e-3, "{v}");
    assert!(num(&v, "r_squared") > 1.0 - 1e-9);
}

#[test]
fn sideband_reports() {
    let v = ok_json(&["sideband", "--optimize", "4"]);
    assert!((num(&v, "theta_rad") - 5.318).abs() < 0.01);
    assert!((num(&v, "rf_power_dbm") - 29.6).abs() < 0.1);
    let fixed = ok_json(&["sideband", "--theta", "5.31", "--v-pi", "5.65"]);
    assert!((num(&fixed, "rf_power_dbm") - 29.6).abs() < 0.1);
    let e = err_json(&["sideband", "--optimize", "4", "--range", "0.1", "2"]);
    assert_eq!(e["error"], "no-bracket");
}

#[test]
fn rf_metrics_echo_single_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let peaks = dir.path().join("peaks.csv");
    fs::write(
        &peaks,
        "freq_hz,power_dbm,kind\n10000000,4.5,fundamental\n20000000,-30.3,harmonic\n",
    )
    .unwrap();
    let v = ok_json(&["rf-metrics", "--peaks", s(&peaks)]);
    assert!((num(&v, "thd_dbc") + 34.8).abs() < 1e-9);
    assert!((num(&v, "sfdr_dbc") - 34.8).abs() < 1e-9);
    let csv = run(&["rf-metrics", "--peaks", s(&peaks), "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout)
        .unwrap()
        .starts_with("thd_dbc,sfdr_dbc\n"));
}

#[test]
fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("bad.csv");
    fs::write(
        &sweep,
        "p_w_watts,level_db,branch\n0.1,-0.2,squeezed\n0.2,x,squeezed\n",
    )
    .unwrap();
    let e = err_json(&["fit", "--sweep", s(&sweep)]);
    assert_eq!(e["error"], "format");
    assert!(e["message"].as_str().unwrap().contains("row 3"), "{e}");

    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        "{\n  \"name\": \"x\",\n  \"budget\": {\"name\": \"b\"},\n  \"r\": 0.5,\n  \"colour\": 1\n}\n",
    )
    .unwrap();
    let e = err_json(&["expect", "--scenario", s(&bad)]);
    assert!(e["message"].as_str().unwrap().contains("line 5"), "{e}");

    let e = err_json(&[
        "simulate",
        "--scenario",
        s(&scenario("deployed")),
        "--out",
        "/proc/tmsv-out",
    ]);
    assert_eq!(e["error"], "io");

    let e = err_json(&["expect"]);
    assert_eq!(e["error"], "usage");
}

#[test]
fn mismatched_sample_rates_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::from("index,volts,monitor_volts\n");
    for i in 0..4000 {
        rows.push_str(&format!("{i},{},0\n", ((i * 7919) % 101) as f64 * 1e-3));
    }
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, &rows).unwrap();
    fs::write(&b, &rows).unwrap();
    fs::write(
        dir.path().join("b.csv.json"),
        r#"{"format": "csv", "sample_rate": 2.5e8, "n_samples": 4000, "meta": {"source": "measured"}}"#,
    )
    .unwrap();
    fs::write(
        dir.path().join("a.csv.json"),
        r#"{"format": "csv", "sample_rate": 5e8, "n_samples": 4000, "meta": {"source": "measured"}}"#,
    )
    .unwrap();
    let e = err_json(&[
        "analyze",
        "--traces",
        s(&a),
        s(&b),
        "--shot-noise",
        s(&a),
        s(&a),
        "--window",
        "100",
        "--max-delay",
        "5",
    ]);
    assert!(
        e["message"].as_str().unwrap().contains("sample rates differ"),
        "{e}"
    );
}
