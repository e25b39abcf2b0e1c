use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use varcontrib::compare::{compare_reports, compare_seeds};
use varcontrib::error::CliError;
use varcontrib::{parse_config, report, run_experiment};

const BIN: &str = env!("CARGO_BIN_EXE_varcontrib");

fn small(model: &str, seed: u64) -> String {
    format!("model = \"{model}\"\np = 0.99\nn = 1000\nseed = {seed}\n")
}

fn varcontrib(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

#[test]
fn smoke_run_is_fast_and_complete() {
    for model in ["model1", "model2", "model3", "model4"] {
        let cfg = parse_config(&small(model, 1)).unwrap();
        let t = Instant::now();
        let rep = run_experiment(&cfg).unwrap();
        assert!(t.elapsed().as_secs_f64() < 1.0, "{model} took {:?}", t.elapsed());
        for label in ["MC", "NW", "GR", "MCMC"] {
            let est = rep.estimate(label).unwrap_or_else(|| panic!("{model}: {label} missing"));
            assert_eq!(est.ac.len(), 3);
            assert!(est.ac.iter().all(|x| x.is_finite()));
        }
        // the t copula with unequal correlations has no closed form
        assert_eq!(rep.oracle.is_some(), model != "model2");
    }
}

#[test]
fn same_seed_gives_identical_report_bytes() {
    let cfg = parse_config(&small("model2", 9)).unwrap();
    let a = report::to_json(&run_experiment(&cfg).unwrap());
    let b = report::to_json(&run_experiment(&cfg).unwrap());
    assert_eq!(a, b);
    let c = report::to_json(&run_experiment(&cfg.with_seed(10)).unwrap());
    assert_ne!(a, c);
}

#[test]
fn one_failing_estimator_does_not_sink_the_run() {
    let text = format!(
        "{}[[estimators]]\nkind = \"mc\"\n[[estimators]]\nkind = \"gr\"\n[[estimators]]\nkind = \"mcmc\"\ninit = [-5.0, 1.0]\n",
        small("model1", 2)
    );
    let rep = run_experiment(&parse_config(&text).unwrap()).unwrap();
    assert!(rep.outcome("MC").unwrap().is_ok());
    assert!(rep.outcome("GR").unwrap().is_ok());
    let bad = rep.outcome("MCMC").unwrap();
    assert_eq!(bad.status, "failed");
    assert!(bad.estimate.is_none() && bad.error.is_some());
    assert!(report::to_table(&rep).contains("failed"));
}

#[test]
fn echoed_config_reproduces_the_report() {
    let cfg = parse_config(&small("model3", 4)).unwrap();
    let again = parse_config(&cfg.to_toml()).unwrap();
    let a = report::to_json(&run_experiment(&cfg).unwrap());
    let b = report::to_json(&run_experiment(&again).unwrap());
    assert_eq!(a, b);
}

#[test]
fn compare_aggregates_and_refuses_mixed_experiments() {
    let cfg = parse_config(&small("model4", 0)).unwrap();
    let (cmp, reports) = compare_seeds(&cfg, &[1, 2, 3]).unwrap();
    assert_eq!(cmp.seeds, vec![1, 2, 3]);
    assert_eq!(cmp.rows.len(), 4);
    for row in &cmp.rows {
        assert_eq!(row.runs + row.failures, 3);
        if let Some(cov) = &row.coverage {
            assert!(cov.iter().all(|c| (0.0..=1.0).contains(c)));
        }
        assert_eq!(row.coverage.is_some(), row.label != "NW");
    }
    let other = run_experiment(&parse_config(&small("model1", 1)).unwrap()).unwrap();
    let mut mixed = reports.clone();
    mixed.push(other);
    assert!(matches!(compare_reports(&mixed), Err(CliError::Usage(_))));
}

#[test]
fn estimate_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", &small("model1", 5));
    let out = dir.path().join("report.json");
    let o = varcontrib(&["estimate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(json["estimators"].as_array().unwrap().len(), 4);
    assert!(json["v_hat"].as_f64().unwrap() > 0.0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("v_hat"));
}

#[test]
fn invalid_config_exits_nonzero_with_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "model = \"model1\"\np = 1.2\nn = 1000\nseed = 1\n");
    let o = varcontrib(&["estimate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid");

    let o = varcontrib(&["estimate", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(serde_json::from_slice::<serde_json::Value>(&o.stderr).is_ok());

    let o = varcontrib(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "usage");
}

#[test]
fn validate_reports_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", &small("model2", 1));
    let o = varcontrib(&["validate", "--config", &cfg]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = json["clt_validation"]["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"C2") && names.contains(&"C3"));
}

#[test]
fn chain_export_round_trips_to_the_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let text = small("model1", 6);
    let cfg_path = write(dir.path(), "c.toml", &text);
    let rep = run_experiment(&parse_config(&text).unwrap()).unwrap();
    let ac = &rep.estimate("MCMC").unwrap().ac;

    let out = dir.path().join("chain.csv");
    let o = varcontrib(&["export", "--config", &cfg_path, "--what", "chain", "--every-k", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 1000);
    for j in 0..3 {
        let mean = rows.iter().map(|r| r[j + 1]).sum::<f64>() / rows.len() as f64;
        assert!((mean - ac[j]).abs() < 1e-9, "component {j}: {mean} vs {}", ac[j]);
    }

    for k in [3usize, 7, 1000] {
        let out = dir.path().join(format!("chain{k}.csv"));
        let ks = k.to_string();
        let o = varcontrib(&["export", "--config", &cfg_path, "--what", "chain", "--every-k", &ks, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
        assert_eq!(rows.len(), 1000usize.div_ceil(k));
        assert!(rows.iter().enumerate().all(|(i, r)| r[0] as usize == i * k));
    }

    let o = varcontrib(&["export", "--config", &cfg_path, "--what", "chain", "--every-k", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mc_window_export_stays_within_delta() {
    let dir = tempfile::tempdir().unwrap();
    let text = "model = \"model2\"\np = 0.99\nn = 20000\nseed = 8\n[[estimators]]\nkind = \"mc\"\ntarget_m = 40\n";
    let cfg_path = write(dir.path(), "w.toml", text);
    let rep = run_experiment(&parse_config(text).unwrap()).unwrap();
    let out = dir.path().join("win.csv");
    let o = varcontrib(&["export", "--config", &cfg_path, "--what", "mcwindow", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 40);
    let delta = match &rep.estimate("MC").unwrap().meta {
        varcontrib_core::estimators::EstimateMeta::Mc { delta, .. } => *delta,
        _ => unreachable!(),
    };
    for r in &rows {
        let s = r[4];
        assert!((s - rep.v_hat).abs() <= delta);
        assert!((r[1] + r[2] + r[3] - s).abs() <= 1e-9 * s.abs());
    }
}

