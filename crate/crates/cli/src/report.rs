//! Rendering of command results as aligned text, CSV or JSON.
//!
//! Every command yields one [`Report`]: a flat table with a fixed column
//! order (the CSV form), a structured result, and a few summary lines for the
//! text form. The JSON form is
//!
//! ```json
//! { "command": "...", "scenario": { ... }, "result": { ... } }
//! ```
//!
//! where `scenario` is the resolved scenario in file form and can be fed back
//! to any subcommand.

use serde::Serialize;

use crate::error::{CliError, ErrorCode};
use crate::scenario::{OutputFormat, ScenarioFile};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub scenario: ScenarioFile,
    pub summary: Vec<(String, String)>,
    pub table: Table,
    pub result: serde_json::Value,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    command: &'a str,
    scenario: &'a ScenarioFile,
    result: &'a serde_json::Value,
}

/// Shortest decimal that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn to_json<T: Serialize>(value: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(value)
        .map_err(|e| CliError::new(ErrorCode::Io, format!("cannot encode result: {e}")))
}

impl Report {
    pub fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Table => Ok(self.render_text()),
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => self.render_json(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(self.command);
        out.push('\n');
        let key_width = self.summary.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.summary {
            out.push_str(&format!("  {k:<key_width$}  {v}\n"));
        }
        if self.table.rows.is_empty() {
            return out;
        }
        out.push('\n');
        let mut widths: Vec<usize> = self.table.columns.iter().map(|c| c.len()).collect();
        for row in &self.table.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &mut dyn Iterator<Item = &str>| -> String {
            let padded: Vec<String> = cells
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect();
            format!("{}\n", padded.join("  ").trim_end())
        };
        out.push_str(&line(&mut self.table.columns.iter().copied()));
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&format!("{}\n", rule.join("  ")));
        for row in &self.table.rows {
            out.push_str(&line(&mut row.iter().map(String::as_str)));
        }
        out
    }

    fn render_csv(&self) -> Result<String, CliError> {
        let io = |e: csv::Error| CliError::new(ErrorCode::Io, format!("cannot write CSV: {e}"));
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(self.table.columns).map_err(io)?;
        for row in &self.table.rows {
            writer.write_record(row).map_err(io)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::new(ErrorCode::Io, format!("cannot write CSV: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::new(ErrorCode::Io, e.to_string()))
    }

    fn render_json(&self) -> Result<String, CliError> {
        let report = JsonReport {
            command: self.command,
            scenario: &self.scenario,
            result: &self.result,
        };
        let mut text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::new(ErrorCode::Io, format!("cannot encode report: {e}")))?;
        text.push('\n');
        Ok(text)
    }
}
