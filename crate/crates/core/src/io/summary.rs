//! Per-frequency run summary (`summary.csv`).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FwiError, Result};

pub const SUMMARY_COLUMNS: [&str; 5] = ["frequency_hz", "mean_iter_seconds", "iterations", "inner_nodes", "final_grad_norm"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub frequency_hz: f64,
    pub mean_iter_seconds: f64,
    pub iterations: usize,
    pub inner_nodes: usize,
    pub final_grad_norm: f64,
}

pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut out = SUMMARY_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{},{},{:e}\n",
            r.frequency_hz, r.mean_iter_seconds, r.iterations, r.inner_nodes, r.final_grad_norm
        ));
    }
    out
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    fs::write(path, format_summary(rows)).map_err(|e| FwiError::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = fs::read_to_string(path).map_err(|e| FwiError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| FwiError::format(path, "empty summary"))?;
    if header != SUMMARY_COLUMNS.join(",") {
        return Err(FwiError::format(path, format!("unexpected header {header:?}")));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || FwiError::format(path, format!("bad summary row {line:?}"));
            if f.len() != 5 {
                return Err(bad());
            }
            Ok(SummaryRow {
                frequency_hz: f[0].parse().map_err(|_| bad())?,
                mean_iter_seconds: f[1].parse().map_err(|_| bad())?,
                iterations: f[2].parse().map_err(|_| bad())?,
                inner_nodes: f[3].parse().map_err(|_| bad())?,
                final_grad_norm: f[4].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}
