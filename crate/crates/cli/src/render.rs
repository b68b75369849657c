//! Rendering of command results as aligned tables, CSV or JSON.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
    Dot,
}

/// Result of a command: a JSON document and the same data as rows.
pub struct Report {
    pub json: Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra lines shown after the table.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(json: Value, columns: Vec<&'static str>) -> Self {
        Report {
            json,
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>, String> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.json).map_err(|e| e.to_string())?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => self.csv(),
            Format::Table => Ok(self.table().into_bytes()),
            Format::Dot => Err("dot output is only available for `tree`".into()),
        }
    }

    fn csv(&self) -> Result<Vec<u8>, String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(|e| e.to_string())?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| e.to_string())?;
        }
        w.into_inner().map_err(|e| e.to_string())
    }

    /// One row renders as `key  value` lines, several as aligned columns.
    fn table(&self) -> String {
        let mut out = String::new();
        if self.rows.len() == 1 {
            let width = self.columns.iter().map(|c| c.len()).max().unwrap_or(0);
            for (c, v) in self.columns.iter().zip(&self.rows[0]) {
                let _ = writeln!(out, "{c:<width$}  {v}");
            }
        } else {
            let widths: Vec<usize> = (0..self.columns.len())
                .map(|i| {
                    self.rows
                        .iter()
                        .map(|r| r[i].len())
                        .chain([self.columns[i].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: Vec<&str>| -> String {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                padded.join("  ")
            };
            let _ = writeln!(out, "{}", line(self.columns.clone()));
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            let _ = writeln!(out, "{}", rule.join("  "));
            for r in &self.rows {
                let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
            }
        }
        for note in &self.notes {
            let _ = writeln!(out, "{note}");
        }
        out
    }
}

pub fn tuple(values: &[usize]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}
