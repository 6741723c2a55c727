//! Black-box tests of the `darkmeter` binary: exit codes, file formats,
//! manifests, and reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_darkmeter"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn darkmeter")
}

fn write_null_config(path: &Path, hours: f64, seed: u64) {
    let config = format!(
        r#"{{
  "dark": {{ "base_rate": 200.0, "drift": {{ "type": "none" }}, "clamp_min": 0.0 }},
  "light_rate": 0.0,
  "flash_closed_rate": 0.0,
  "duration_hours": {hours},
  "protocol": {{ "block_len": 10, "interval_len": 1, "discard_first": true }},
  "seed": {seed}
}}"#
    );
    fs::write(path, config).unwrap();
}

fn stacks_fixture() -> String {
    format!(
        "{}/examples/data/attenuation_stacks.csv",
        env!("CARGO_MANIFEST_DIR")
    )
}

#[test]
fn simulate_writes_expected_rows_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    write_null_config(&config, 1.0, 77);

    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    assert!(run(&["simulate", "--config", config.to_str().unwrap(), "--out", out_a.to_str().unwrap()])
        .status
        .success());
    assert!(run(&["simulate", "--config", config.to_str().unwrap(), "--out", out_b.to_str().unwrap()])
        .status
        .success());

    let text_a = fs::read_to_string(&out_a).unwrap();
    let text_b = fs::read_to_string(&out_b).unwrap();
    assert_eq!(text_a, text_b, "same seed must give byte-identical output");

    let lines: Vec<&str> = text_a.lines().collect();
    assert_eq!(lines.len(), 3601);
    assert_eq!(lines[0], "t_start_s,shutter,counts");
    // Alternating 10-row blocks starting open.
    assert!(lines[1].starts_with("0,O,"));
    assert!(lines[10].starts_with("9,O,"));
    assert!(lines[11].starts_with("10,C,"));
    assert!(lines[21].starts_with("20,O,"));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 77);
    assert_eq!(manifest["outputs"][0]["path"], out_a.to_str().unwrap());

    // Different seed, different bytes.
    let out_c = dir.path().join("c.csv");
    assert!(run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_c.to_str().unwrap(),
        "--seed",
        "78"
    ])
    .status
    .success());
    assert_ne!(text_a, fs::read_to_string(&out_c).unwrap());
}

#[test]
fn malformed_config_exits_2_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    fs::write(&config, "{ \"dark\": { \"base_rate\": \"oops\" } }").unwrap();
    let out = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line"), "diagnostics missing position: {stderr}");
}

#[test]
fn analyze_reference_statistics_reports_direction_probability() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "analyze",
        "--summary-stats",
        "-4.14e-3,445.21,997920",
        "--f",
        "10",
        "--out",
        report_path.to_str().unwrap(),
        "--seed",
        "42",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    let pd = report["posterior"]["pd_plus"].as_f64().unwrap();
    assert!((0.40..=0.44).contains(&pd), "pd+ {pd}");
    assert_eq!(report["input"]["n"], 997920);
    assert!(report["diagnostics"]["converged"].as_bool().unwrap());
    assert!(report["prior"]["mu0"].as_f64().unwrap() == 0.0);

    // Re-running with the same flags reproduces the report bit for bit.
    let report2_path = dir.path().join("report2.json");
    run(&[
        "analyze",
        "--summary-stats",
        "-4.14e-3,445.21,997920",
        "--f",
        "10",
        "--out",
        report2_path.to_str().unwrap(),
        "--seed",
        "42",
    ]);
    assert_eq!(
        fs::read_to_string(&report_path).unwrap(),
        fs::read_to_string(&report2_path).unwrap()
    );
}

#[test]
fn analyze_ingests_simulated_campaign_and_recovers_null() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    write_null_config(&config, 6.0, 5);
    let data = dir.path().join("counts.csv");
    assert!(run(&["simulate", "--config", config.to_str().unwrap(), "--out", data.to_str().unwrap()])
        .status
        .success());

    let report_path = dir.path().join("report.json");
    let draws_path = dir.path().join("draws.csv");
    let out = run(&[
        "analyze",
        "--data",
        data.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
        "--draws-out",
        draws_path.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    let lo = report["posterior"]["hdi_full"][0].as_f64().unwrap();
    let hi = report["posterior"]["hdi_full"][1].as_f64().unwrap();
    assert!(lo < 0.0 && 0.0 < hi, "HDI [{lo}, {hi}] should contain zero");

    let draws = fs::read_to_string(&draws_path).unwrap();
    assert!(draws.starts_with("mu,sigma_sq\n"));
    assert_eq!(draws.lines().count(), 60_001);

    // The manifest records both outputs and the input fingerprint.
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("report.json.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["inputs"][0]["path"], data.to_str().unwrap());
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn analyze_flags_non_convergence_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "analyze",
        "--summary-stats",
        "0.0,400.0,10000",
        "--chains",
        "2",
        "--warmup",
        "100",
        "--draws",
        "600",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    // The report is still written, carrying the flag.
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(!report["diagnostics"]["converged"].as_bool().unwrap());
}

#[test]
fn analyze_rejects_garbled_csv_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    fs::write(&data, "t_start_s,shutter,counts\n0,O,5\n1,O,x\n").unwrap();
    let out = run(&[
        "analyze",
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn seed_env_var_is_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = bin()
        .args([
            "analyze",
            "--summary-stats",
            "0.0,400.0,100000",
            "--out",
            report_path.to_str().unwrap(),
        ])
        .env("DARKMETER_SEED", "777")
        .output()
        .unwrap();
    assert!(out.status.success());
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("report.json.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"], 777);
}

#[test]
fn sweep_emits_table_and_power_law_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep",
        "--summary-stats",
        "-4.14e-3,445.21,997920",
        "--f-grid",
        "10,100,1000,10000",
        "--chains",
        "2",
        "--warmup",
        "300",
        "--draws",
        "3000",
        "--out",
        out_path.to_str().unwrap(),
        "--seed",
        "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "f,mean,sd,hdi_lo,hdi_hi,pos_upper,pd_plus,rsd_full,rsd_pos"
    );
    assert_eq!(csv.lines().count(), 5);

    let fit: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("sweep.csv.fit.json")).unwrap(),
    )
    .unwrap();
    let b = fit["full"]["b"].as_f64().unwrap();
    assert!((0.35..=0.65).contains(&b), "exponent {b}");
}

#[test]
fn ea_solves_the_stack_table_and_chains_the_darkness_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("ea.json");
    let out = run(&[
        "ea",
        "--table",
        &stacks_fixture(),
        "--out",
        out_path.to_str().unwrap(),
        "--closed-rate",
        "0.47,0.09",
        "--lab-rate",
        "1.82,0.03",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let source = report["solution"]["log10_source"].as_f64().unwrap();
    assert!((source - 9.10).abs() < 0.01, "source {source}");
    let od: Vec<f64> = report["solution"]["od"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (got, want) in od.iter().zip([3.18, 4.21, 2.87, 3.19, 3.06]) {
        assert!((got - want).abs() < 0.01, "od {got} vs {want}");
    }
    let darkness = report["darkness"]["value"].as_f64().unwrap();
    assert!((darkness - 6.9e-10).abs() / 6.9e-10 < 0.10, "darkness {darkness}");
}

#[test]
fn ea_rejects_lab_rate_without_closed_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "ea",
        "--table",
        &stacks_fixture(),
        "--out",
        dir.path().join("ea.json").to_str().unwrap(),
        "--lab-rate",
        "1.82,0.03",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jzs_command_reproduces_the_analytic_factor() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("jzs.json");
    let out = run(&[
        "jzs",
        "--summary-stats",
        "-4.14e-3,445.21,997920",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let bf = report["bf01"].as_f64().unwrap();
    assert!((bf - 1029.59).abs() / 1029.59 < 0.01, "bf {bf}");
    assert!((report["t"].as_f64().unwrap() + 0.196).abs() < 0.002);
}

#[test]
fn budget_subcommands_produce_reports() {
    let dir = tempfile::tempdir().unwrap();

    let flash_path = dir.path().join("flash.json");
    let out = run(&[
        "budget",
        "flash",
        "--delta-b",
        "-4.19e-3,21.0e-3",
        "--delta-m",
        "-4.48e-2,2.31e-2",
        "--q",
        "1.05",
        "--rho-ratio",
        "0",
        "--out",
        flash_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&flash_path).unwrap()).unwrap();
    assert_eq!(report["corrected"]["mean"].as_f64().unwrap(), -4.19e-3);

    let sweep_path = dir.path().join("rho.csv");
    let out = run(&[
        "budget",
        "flash-sweep",
        "--delta-b",
        "-4.19e-3,21.0e-3",
        "--delta-m",
        "-4.48e-2,2.31e-2",
        "--q",
        "1.05",
        "--rho-min",
        "1e-5",
        "--rho-max",
        "0.5",
        "--points",
        "40",
        "--out",
        sweep_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&sweep_path).unwrap();
    assert!(csv.starts_with("rho_ratio,mean,sd\n"));
    let means: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(means.len(), 40);
    assert!(
        means.windows(2).all(|w| w[1] > w[0]),
        "corrected mean should increase with the reflectivity ratio here"
    );

    let hdi_path = dir.path().join("hdi.json");
    assert!(run(&[
        "budget",
        "hdi-length",
        "--var-rd",
        "222.6",
        "--n",
        "997920",
        "--out",
        hdi_path.to_str().unwrap(),
    ])
    .status
    .success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&hdi_path).unwrap()).unwrap();
    let length = report["length"].as_f64().unwrap();
    assert!((length - 0.0414).abs() < 1e-4, "length {length}");

    let retina_path = dir.path().join("retina.json");
    assert!(run(&[
        "budget",
        "retina",
        "--upper",
        "0.039",
        "--diameter-mm",
        "0.34",
        "--out",
        retina_path.to_str().unwrap(),
    ])
    .status
    .success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&retina_path).unwrap()).unwrap();
    let scaled = report["scaled"].as_f64().unwrap();
    assert!((scaled - 0.074).abs() < 1e-3, "scaled {scaled}");
}

#[test]
fn unknown_flags_exit_2() {
    let out = run(&["analyze", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}
