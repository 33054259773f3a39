//! End-to-end runs of every subcommand over the documented file formats.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairspectemp"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("fst_cli_tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> serde_json::Value {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn synth(dir: &Path, scenario: &str, param: f64) -> (PathBuf, PathBuf) {
    let graph = dir.join("graph.txt");
    let groups = dir.join("groups.txt");
    run_ok(bin().args([
        "synth",
        "--scenario",
        scenario,
        "--n",
        "16",
        "--p",
        "0.3",
        "--param",
        &param.to_string(),
        "--seed",
        "7",
        "--out-graph",
        graph.to_str().unwrap(),
        "--out-groups",
        groups.to_str().unwrap(),
    ]));
    (graph, groups)
}

#[test]
fn synth_then_metrics_round_trip() {
    let dir = workdir("metrics");
    let (graph, groups) = synth(&dir, "across-ratio", 0.2);
    let v = run_ok(bin().args([
        "metrics",
        "--graph",
        graph.to_str().unwrap(),
        "--groups",
        groups.to_str().unwrap(),
        "--reference",
        graph.to_str().unwrap(),
    ]));
    assert_eq!(v["n"], 16);
    assert_eq!(v["kind"], "adjacency");
    assert!(v["r_group"].as_f64().unwrap() > 0.0);
    assert_eq!(v["rel_err"].as_f64().unwrap(), 0.0);
}

#[test]
fn signals_estimate_diagnose_pipeline() {
    let dir = workdir("pipeline");
    let (graph, groups) = synth(&dir, "across-ratio", 0.5);
    let signals = dir.join("signals.csv");
    run_ok(bin().args([
        "signals",
        "export",
        "--graph",
        graph.to_str().unwrap(),
        "--samples",
        "4000",
        "--seed",
        "3",
        "--out",
        signals.to_str().unwrap(),
    ]));

    // covariance CSV for diagnose: derive it through the library format
    let x = fairspectemp::io::read_matrix_csv::<f64>(&signals).unwrap();
    let c = fairspectemp::signal::covariance_of(&x);
    let cov = dir.join("cov.csv");
    fairspectemp::io::write_matrix_csv(&cov, &c).unwrap();

    let estimate = dir.join("estimate.json");
    let v = run_ok(bin().args([
        "estimate",
        "--signals",
        signals.to_str().unwrap(),
        "--groups",
        groups.to_str().unwrap(),
        "--variant",
        "c",
        "--metric",
        "group",
        "--eps",
        "1.0",
        "--tau",
        "0.5",
        "--max-iter",
        "600",
        "--penalty-scalings",
        "2",
        "--out",
        estimate.to_str().unwrap(),
    ]));
    assert!(v["commutator_residual"].as_f64().unwrap().is_finite());
    assert!(estimate.exists());

    let report_json = std::fs::read_to_string(&estimate).unwrap();
    let report: fairspectemp::solver::EstimateReport<f64> =
        serde_json::from_str(&report_json).unwrap();
    assert_eq!(report.gso.n(), 16);

    let diag = dir.join("diag.json");
    let v = run_ok(bin().args([
        "diagnose",
        "--estimate",
        estimate.to_str().unwrap(),
        "--target",
        graph.to_str().unwrap(),
        "--groups",
        groups.to_str().unwrap(),
        "--cov",
        cov.to_str().unwrap(),
        "--metric",
        "group",
        "--eps",
        "1.0",
        "--tau",
        "0.5",
        "--out",
        diag.to_str().unwrap(),
    ]));
    assert!(v["error_bounds"]["upper"].as_f64().unwrap() >= 0.0);
    assert!(v["lower_bound_holds"].as_bool().unwrap());
    assert!(v["condition_commutativity"]["inf_norm_value"].is_number());
}

#[test]
fn estimate_v_variant_from_cov() {
    let dir = workdir("vvariant");
    let (graph, groups) = synth(&dir, "plain-er", 0.0);
    let signals = dir.join("signals.csv");
    run_ok(bin().args([
        "signals",
        "export",
        "--graph",
        graph.to_str().unwrap(),
        "--samples",
        "2000",
        "--out",
        signals.to_str().unwrap(),
    ]));
    let x = fairspectemp::io::read_matrix_csv::<f64>(&signals).unwrap();
    let cov = dir.join("cov.csv");
    fairspectemp::io::write_matrix_csv(&cov, &fairspectemp::signal::covariance_of(&x)).unwrap();
    let estimate = dir.join("estimate_v.json");
    let v = run_ok(bin().args([
        "estimate",
        "--cov",
        cov.to_str().unwrap(),
        "--groups",
        groups.to_str().unwrap(),
        "--variant",
        "v",
        "--bias-on",
        "spectrum",
        "--metric",
        "node",
        "--tau",
        "1.0",
        "--max-iter",
        "400",
        "--penalty-scalings",
        "1",
        "--out",
        estimate.to_str().unwrap(),
    ]));
    assert!(v["feasible"]["degree"].is_boolean());
    let report: fairspectemp::solver::EstimateReport<f64> =
        serde_json::from_str(&std::fs::read_to_string(&estimate).unwrap()).unwrap();
    assert!(report.lambda.is_some());
    assert!(report.spectral_bias_value.is_some());
}

#[test]
fn bench_emits_expected_files() {
    let dir = workdir("bench");
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "schema_version": 1,
            "scenario": {
                "n": 12, "g": 2, "kind": "across_ratio",
                "params": [0.5], "p": 0.3
            },
            "methods": ["st", "fst_cg"],
            "m_samples": [400],
            "seeds": [1, 2],
            "solver": { "max_iter": 300, "max_penalty_scalings": 2 },
            "auto_epsilon": true
        })
        .to_string(),
    )
    .unwrap();
    let out = dir.join("results");
    let v = run_ok(bin().args([
        "bench",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(v["rows"], 4);
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(results.starts_with("param,m,seed,method,"));
    assert_eq!(results.lines().count(), 5);
    assert!(out.join("medians.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert!(manifest["config"]["methods"].is_array());
}

#[test]
fn bench_rejects_unknown_config_keys() {
    let dir = workdir("badbench");
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{"schema_version":1,"scenario":{"n":8,"g":2,"kind":"plain_er","params":[0],"p":0.5},
           "methods":["st"],"m_samples":[100],"seeds":[1],"solver":{},"typo_key":true}"#,
    )
    .unwrap();
    let out = bin()
        .args(["bench", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn finance_backtest_runs() {
    let dir = workdir("finance");
    // synthetic sector-structured returns written through the library
    let panel = fairspectemp::finance::synthetic_crash_panel::<f64>(3, 2, 90, 40..55, 5).unwrap();
    let mut returns = String::from("date,");
    returns.push_str(&panel.tickers.join(","));
    returns.push('\n');
    for d in 0..panel.t_len() {
        returns.push_str(&panel.dates[d]);
        for i in 0..panel.n() {
            returns.push_str(&format!(",{}", panel.returns[(i, d)]));
        }
        returns.push('\n');
    }
    let returns_path = dir.join("returns.csv");
    std::fs::write(&returns_path, returns).unwrap();
    let sectors_path = dir.join("sectors.csv");
    let mut sectors = String::from("ticker,sector\n");
    for (i, t) in panel.tickers.iter().enumerate() {
        sectors.push_str(&format!(
            "{t},{}\n",
            panel.sector_names[panel.sectors.label(i)]
        ));
    }
    std::fs::write(&sectors_path, sectors).unwrap();

    let out = dir.join("strategy.json");
    let v = run_ok(bin().args([
        "finance",
        "--returns",
        returns_path.to_str().unwrap(),
        "--sectors",
        sectors_path.to_str().unwrap(),
        "--method",
        "corr",
        "--window",
        "30",
        "--step",
        "4",
        "--threshold",
        "auto",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert!(v["final_value"].as_f64().unwrap() > 0.0);
    let n_windows = v["n_windows"].as_u64().unwrap() as usize;
    assert_eq!(v["decisions"].as_array().unwrap().len(), n_windows);
    assert_eq!(v["value_series"].as_array().unwrap().len(), n_windows + 1);
}
