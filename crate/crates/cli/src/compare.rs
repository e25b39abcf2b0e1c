//! Multi-seed aggregation of run reports.

use serde::Serialize;

use varcontrib_core::mcmc::Z_95;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::{run_experiment, RunReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub label: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_ac: Vec<f64>,
    pub mean_stderr: Option<Vec<f64>>,
    pub mean_bias: Option<Vec<f64>>,
    /// Root mean squared error against the per-seed oracle.
    pub rmse: Option<Vec<f64>>,
    /// Fraction of runs whose 95% interval covers the oracle.
    pub coverage: Option<Vec<f64>>,
    pub mean_acceptance_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub seeds: Vec<u64>,
    pub mean_v_hat: f64,
    pub rows: Vec<CompareRow>,
}

fn same_experiment(a: &ExperimentConfig, b: &ExperimentConfig) -> bool {
    a.model == b.model && a.p == b.p && a.n == b.n && a.estimators == b.estimators && a.mc_window_m == b.mc_window_m
}

pub fn compare_reports(reports: &[RunReport]) -> Result<Comparison, CliError> {
    let first = reports.first().ok_or_else(|| CliError::Usage("compare needs at least one run".into()))?;
    if let Some(bad) = reports.iter().find(|r| !same_experiment(&r.config, &first.config)) {
        return Err(CliError::Usage(format!(
            "cannot aggregate runs of different experiments (seed {} differs from seed {} in model or settings)",
            bad.config.seed, first.config.seed
        )));
    }
    let rows = first
        .estimators
        .iter()
        .map(|o| {
            let label = &o.label;
            let ok: Vec<(&RunReport, &crate::experiment::EstimatorOutcome)> = reports
                .iter()
                .filter_map(|r| r.outcome(label).filter(|x| x.is_ok()).map(|x| (r, x)))
                .collect();
            let d = first.config.dim();
            let k = ok.len() as f64;
            let mean_of = |f: &dyn Fn(&RunReport, &crate::experiment::EstimatorOutcome) -> Option<Vec<f64>>| {
                let vals: Option<Vec<Vec<f64>>> = ok.iter().map(|(r, x)| f(r, x)).collect();
                vals.filter(|v| !v.is_empty())
                    .map(|v| (0..d).map(|j| v.iter().map(|x| x[j]).sum::<f64>() / k).collect::<Vec<f64>>())
            };
            let mean_ac = mean_of(&|_, x| x.estimate.as_ref().map(|e| e.ac.clone())).unwrap_or_default();
            let mean_stderr = mean_of(&|_, x| x.estimate.as_ref().and_then(|e| e.stderr.clone()));
            let mean_bias = mean_of(&|_, x| x.bias.clone());
            let rmse = mean_of(&|_, x| x.bias.as_ref().map(|b| b.iter().map(|v| v * v).collect()))
                .map(|m| m.into_iter().map(f64::sqrt).collect());
            let coverage = mean_of(&|_, x| {
                let b = x.bias.as_ref()?;
                let s = x.estimate.as_ref()?.stderr.as_ref()?;
                Some(b.iter().zip(s).map(|(b, s)| (b.abs() <= Z_95 * s) as u8 as f64).collect())
            });
            let rates: Vec<f64> = ok
                .iter()
                .filter_map(|(_, x)| x.diagnostics.as_ref().and_then(|d| d.acceptance_rate))
                .collect();
            CompareRow {
                label: label.clone(),
                runs: ok.len(),
                failures: reports.len() - ok.len(),
                mean_ac,
                mean_stderr,
                mean_bias,
                rmse,
                coverage,
                mean_acceptance_rate: (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64),
            }
        })
        .collect();
    Ok(Comparison {
        seeds: reports.iter().map(|r| r.config.seed).collect(),
        mean_v_hat: reports.iter().map(|r| r.v_hat).sum::<f64>() / reports.len() as f64,
        rows,
    })
}

/// Runs `config` under every seed and aggregates.
pub fn compare_seeds(config: &ExperimentConfig, seeds: &[u64]) -> Result<(Comparison, Vec<RunReport>), CliError> {
    let reports = seeds
        .iter()
        .map(|s| run_experiment(&config.with_seed(*s)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((compare_reports(&reports)?, reports))
}

fn cells(v: &Option<Vec<f64>>) -> Vec<String> {
    v.as_ref().map_or_else(Vec::new, |x| x.iter().map(|a| format!("{a:.16e}")).collect())
}

pub fn to_csv(c: &Comparison) -> String {
    let mut out = String::from("label,component,runs,failures,mean_ac,mean_stderr,mean_bias,rmse,coverage\n");
    for r in &c.rows {
        let (se, b, rm, cov) = (cells(&r.mean_stderr), cells(&r.mean_bias), cells(&r.rmse), cells(&r.coverage));
        for (j, ac) in r.mean_ac.iter().enumerate() {
            let get = |v: &Vec<String>| v.get(j).cloned().unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{:.16e},{},{},{},{}\n",
                r.label,
                j + 1,
                r.runs,
                r.failures,
                ac,
                get(&se),
                get(&b),
                get(&rm),
                get(&cov)
            ));
        }
    }
    out
}

pub fn to_table(c: &Comparison) -> String {
    let fmt = |v: &Option<Vec<f64>>| {
        v.as_ref().map_or_else(|| "-".to_string(), |x| x.iter().map(|a| format!("{a:>9.4}")).collect::<Vec<_>>().join(" "))
    };
    let mut out = format!("{} seeds, mean v_hat = {:.4}\n", c.seeds.len(), c.mean_v_hat);
    for r in &c.rows {
        out.push_str(&format!("{:<8} runs {} (failed {})\n", r.label, r.runs, r.failures));
        out.push_str(&format!("         mean ac  {}\n", fmt(&Some(r.mean_ac.clone()))));
        out.push_str(&format!("         bias     {}\n", fmt(&r.mean_bias)));
        out.push_str(&format!("         rmse     {}\n", fmt(&r.rmse)));
        out.push_str(&format!("         coverage {}\n", fmt(&r.coverage)));
    }
    out
}
