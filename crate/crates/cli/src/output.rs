//! Deterministic JSON and CSV emission.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use horolab_core::report::{Verdict, VerificationReport};

/// A numeric table destined for CSV output.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// CSV text with fixed-width scientific floats, so byte output depends
    /// only on the numeric values.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// The outcome of one experiment run.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub inputs: serde_json::Value,
    pub tool_version: &'static str,
    pub wall_clock_seconds: f64,
    pub reports: Vec<VerificationReport>,
    #[serde(skip)]
    pub tables: BTreeMap<String, Table>,
    pub verdict: Verdict,
}

impl RunReport {
    pub fn new(experiment: String, inputs: serde_json::Value) -> Self {
        RunReport {
            experiment,
            inputs,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_clock_seconds: 0.0,
            reports: Vec::new(),
            tables: BTreeMap::new(),
            verdict: Verdict::Pass,
        }
    }

    pub fn finish(&mut self, started: std::time::Instant) {
        self.wall_clock_seconds = started.elapsed().as_secs_f64();
        if self.reports.iter().any(|r| !r.passed()) {
            self.verdict = Verdict::Fail;
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

pub fn write_json(path: &Path, report: &RunReport) -> anyhow::Result<()> {
    // tables are serialized alongside the report body for JSON consumers
    #[derive(Serialize)]
    struct Full<'a> {
        #[serde(flatten)]
        report: &'a RunReport,
        tables: &'a BTreeMap<String, Table>,
    }
    let text = serde_json::to_string_pretty(&Full { report, tables: &report.tables })?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_tables_csv(dir: &Path, prefix: &str, tables: &BTreeMap<String, Table>) -> anyhow::Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    for (name, table) in tables {
        let path = dir.join(format!("{prefix}{name}.csv"));
        std::fs::write(&path, table.to_csv())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_stable() {
        let mut t = Table::new(&["r", "v"]);
        t.push(vec![1.0, 2.0f64.sqrt()]);
        let a = t.to_csv();
        let b = t.to_csv();
        assert_eq!(a, b);
        assert!(a.starts_with("r,v\n"));
        assert!(a.contains("1.41421356237309515e0"));
    }
}
