//! Solver statistics emitted as JSON lines.

use std::io::Write;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

/// One assemble, factorize or solve event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub event: String,
    pub frequency_hz: f64,
    pub nodes: usize,
    pub inner_nodes: usize,
    pub nonzeros: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assemble_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_bytes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve_seconds_per_rhs: Option<f64>,
}

/// Thread-safe JSON-lines sink.
pub struct StatsLog {
    out: Mutex<Box<dyn Write + Send>>,
}

impl StatsLog {
    pub fn new(out: Box<dyn Write + Send>) -> Self {
        Self { out: Mutex::new(out) }
    }

    /// Writes one record. Failures to log are ignored.
    pub fn record(&self, stats: &SolverStats) {
        if let Ok(line) = serde_json::to_string(stats) {
            if let Ok(mut out) = self.out.lock() {
                let _ = writeln!(out, "{line}");
                let _ = out.flush();
            }
        }
    }
}

impl std::fmt::Debug for StatsLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("StatsLog")
    }
}
