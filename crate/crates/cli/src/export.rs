//! CSV exports of chain paths and MC windows for external plotting.

use std::io::Write;

use varcontrib_core::estimators::SampleBatch;
use varcontrib_core::mcmc::ChainRun;

use crate::error::CliError;

fn header(d: usize, extra: &str) -> String {
    let mut cols: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    cols.insert(0, extra.to_string());
    cols.join(",")
}

/// Every `every_k`-th state (starting with the first) lifted to the full
/// portfolio dimension. Returns the number of rows written.
pub fn export_chain_data<W: Write>(run: &ChainRun, every_k: usize, out: &mut W) -> Result<usize, CliError> {
    if every_k < 1 {
        return Err(CliError::Usage("every_k must be at least 1".into()));
    }
    let d = run.dim() + 1;
    writeln!(out, "{}", header(d, "step"))?;
    let mut rows = 0;
    for i in (0..run.len()).step_by(every_k) {
        let x = run.lifted(i);
        let cells: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{i},{}", cells.join(","))?;
        rows += 1;
    }
    Ok(rows)
}

/// Rows of the batch whose sum lies within `delta` of `v`, with their sums.
pub fn export_mc_window<W: Write>(batch: &SampleBatch, v: f64, delta: f64, out: &mut W) -> Result<usize, CliError> {
    let d = batch.dim();
    writeln!(out, "{},s", header(d, "row"))?;
    let members = batch.window(v, delta);
    for &i in &members {
        let cells: Vec<String> = batch.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(out, "{i},{},{}", cells.join(","), batch.sums()[i])?;
    }
    Ok(members.len())
}
