use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{write_text, IoError};
use crate::engine::MatcherConfig;
use crate::metrics::EvalReport;

/// Structured result of one evaluated run. Holds no wall-clock data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub regime: Option<String>,
    pub seed: Option<u64>,
    pub strategy: String,
    pub dt_window: f64,
    pub eps_lat: f64,
    pub eps_time: f64,
    pub eval: EvalReport,
}

impl RunReport {
    pub fn new(regime: Option<String>, seed: Option<u64>, matcher: &MatcherConfig, eval: EvalReport) -> Self {
        Self {
            regime,
            seed,
            strategy: matcher.strategy.as_str().into(),
            dt_window: matcher.dt_window,
            eps_lat: matcher.eps_lat,
            eps_time: matcher.eps_time,
            eval,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_text(path, &text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub regime: String,
    pub strategy: String,
    pub hosr: Option<f64>,
    pub idf1: Option<f64>,
    pub id_switches: u64,
    pub handovers: (usize, usize),
    /// Median per-snapshot handover latency.
    pub latency_ms: Option<f64>,
}

impl SummaryRow {
    pub fn from_report(r: &RunReport, latency_ms: Option<f64>) -> Self {
        Self {
            regime: r.regime.clone().unwrap_or_else(|| "-".into()),
            strategy: r.strategy.clone(),
            hosr: r.eval.hosr,
            idf1: r.eval.idf1.idf1,
            id_switches: r.eval.id_switches,
            handovers: (r.eval.handovers_successful, r.eval.handovers_total),
            latency_ms,
        }
    }
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{:.1}%", v * 100.0))
}

/// Fixed-width table: regime, HOSR, latency, plus identity columns.
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<14} {:<14} {:>8} {:>11} {:>8} {:>6} {:>12}",
        "Regime", "Strategy", "HOSR", "Handovers", "IDF1", "IDSW", "Latency(ms)"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<14} {:<14} {:>8} {:>11} {:>8} {:>6} {:>12}",
            r.regime,
            r.strategy,
            pct(r.hosr),
            format!("{}/{}", r.handovers.0, r.handovers.1),
            pct(r.idf1),
            r.id_switches,
            r.latency_ms.map_or_else(|| "n/a".into(), |v| format!("{v:.4}")),
        );
    }
    out
}
