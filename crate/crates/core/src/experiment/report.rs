use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::{read_metrics, with_path, MetricRow};
use crate::error::{Error, Result};

/// Aggregates of one metrics file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub label: String,
    pub rows: usize,
    pub first_step: u64,
    pub last_step: u64,
    pub mean_fidelity: f64,
    pub min_fidelity: f64,
    pub final_fidelity: f64,
    pub rms_x0: f64,
    pub rms_x0x1: f64,
    pub min_raw_norm: f64,
    pub max_raw_norm: f64,
    pub max_amp_err_aligned: f64,
}

/// One line of the side-by-side table, in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub mean_fidelity: f64,
    pub min_fidelity: f64,
    pub final_fidelity: f64,
    pub rms_x0: f64,
    pub rms_x0x1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub summaries: Vec<MetricSummary>,
    pub comparison: Vec<ComparisonRow>,
}

fn rms(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    (values.map(|v| v * v).sum::<f64>() / n as f64).sqrt()
}

pub fn summarize(label: &str, rows: &[MetricRow]) -> Result<MetricSummary> {
    let (first, last) = match (rows.first(), rows.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::InvalidArgument(format!("`{label}` has no rows"))),
    };
    let n = rows.len();
    let fold = |f: fn(&MetricRow) -> f64, init: f64, op: fn(f64, f64) -> f64| rows.iter().map(f).fold(init, op);
    Ok(MetricSummary {
        label: label.into(),
        rows: n,
        first_step: first.step,
        last_step: last.step,
        mean_fidelity: rows.iter().map(|r| r.fidelity).sum::<f64>() / n as f64,
        min_fidelity: fold(|r| r.fidelity, f64::INFINITY, f64::min),
        final_fidelity: last.fidelity,
        rms_x0: rms(rows.iter().map(|r| r.x0_pred - r.x0_target), n),
        rms_x0x1: rms(rows.iter().map(|r| r.x0x1_pred - r.x0x1_target), n),
        min_raw_norm: fold(|r| r.raw_norm, f64::INFINITY, f64::min),
        max_raw_norm: fold(|r| r.raw_norm, f64::NEG_INFINITY, f64::max),
        max_amp_err_aligned: fold(|r| r.amp_err_aligned, 0.0, f64::max),
    })
}

/// Summaries of labelled row sets, keeping their order.
pub fn build_report(inputs: &[(String, Vec<MetricRow>)]) -> Result<Report> {
    let summaries = inputs
        .iter()
        .map(|(label, rows)| summarize(label, rows))
        .collect::<Result<Vec<_>>>()?;
    let comparison = summaries
        .iter()
        .map(|s| ComparisonRow {
            label: s.label.clone(),
            mean_fidelity: s.mean_fidelity,
            min_fidelity: s.min_fidelity,
            final_fidelity: s.final_fidelity,
            rms_x0: s.rms_x0,
            rms_x0x1: s.rms_x0x1,
        })
        .collect();
    Ok(Report { summaries, comparison })
}

/// Reads metrics files, labelling each by its path.
pub fn cmd_report(files: &[&Path]) -> Result<Report> {
    if files.is_empty() {
        return Err(Error::InvalidArgument("no metrics files given".into()));
    }
    let inputs = files
        .iter()
        .map(|p| Ok((p.display().to_string(), with_path(p, read_metrics)?)))
        .collect::<Result<Vec<_>>>()?;
    build_report(&inputs)
}
