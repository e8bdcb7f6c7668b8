//! Report serialization.
//!
//! CSV: one row per (policy, checkpoint) with the header
//! `policy,checkpoint_t,mean_regret,stderr_regret,optimal_rate`. Floats are
//! written in shortest round-trip form with a period decimal separator.
//!
//! JSON: the whole [`ExperimentReport`] plus an instance label.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::simulation::ExperimentReport;

pub const CSV_HEADER: [&str; 5] = [
    "policy",
    "checkpoint_t",
    "mean_regret",
    "stderr_regret",
    "optimal_rate",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for curve in &report.curves {
        for (k, t) in report.checkpoints.iter().enumerate() {
            w.serialize((
                curve.policy.as_str(),
                t,
                curve.mean_regret[k],
                curve.regret_stderr[k],
                curve.optimal_rate[k],
            ))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    instance: &'a str,
    seed: u64,
    #[serde(flatten)]
    report: &'a ExperimentReport,
}

pub fn write_json<W: Write>(
    report: &ExperimentReport,
    instance_label: &str,
    mut out: W,
) -> Result<()> {
    let doc = JsonReport {
        instance: instance_label,
        seed: report.config.master_seed,
        report,
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_report<W: Write>(
    report: &ExperimentReport,
    format: ReportFormat,
    instance_label: &str,
    out: W,
) -> Result<()> {
    match format {
        ReportFormat::Csv => write_csv(report, out),
        ReportFormat::Json => write_json(report, instance_label, out),
    }
}
