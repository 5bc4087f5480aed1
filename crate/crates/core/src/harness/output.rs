//! CSV output.
//!
//! Floats use Rust's shortest round-trip formatting, so identical results
//! give identical bytes.

use std::io::Write;

use super::MonteCarloResult;
use crate::error::Result;

pub const TRACE_HEADER: [&str; 6] = ["policy", "instance_id", "trial", "round", "cum_regret", "phase"];
pub const AGGREGATE_HEADER: [&str; 6] = ["policy", "round", "mean", "stderr", "ci95", "n"];

/// One row per successful episode and checkpoint.
pub fn write_traces<W: Write>(out: W, results: &[MonteCarloResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in results {
        for e in &r.episodes {
            let t = &e.trace;
            for i in 0..t.checkpoints.len() {
                w.write_record([
                    r.policy.clone(),
                    e.instance_id.to_string(),
                    e.trial.to_string(),
                    t.checkpoints[i].to_string(),
                    t.cum_regret[i].to_string(),
                    t.phases[i].map(|p| p.as_str().to_string()).unwrap_or_default(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per policy and checkpoint.
pub fn write_aggregates<W: Write>(out: W, results: &[MonteCarloResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for r in results {
        let a = &r.aggregate;
        for i in 0..a.rounds.len() {
            w.write_record([
                r.policy.clone(),
                a.rounds[i].to_string(),
                a.mean[i].to_string(),
                a.stderr[i].to_string(),
                a.ci95[i].to_string(),
                a.n.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
