//! Report model and its JSON / CSV / text renderings.
//!
//! The JSON top level always carries the same keys in the same order:
//! `command, input, k, eps, subset, residual_sq, bound, applicable,
//! identities, timing_ms, details`. Keys that do not apply are `null`.
//! Column indices are 1-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use cssp::oracle::IdentityCheck;
use serde::Serialize;
use serde_json::Value;

use crate::config::Format;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub input: String,
    pub k: Option<usize>,
    pub eps: f64,
    pub subset: Option<Vec<usize>>,
    pub residual_sq: Option<f64>,
    pub bound: Option<f64>,
    pub applicable: Option<bool>,
    pub identities: Option<BTreeMap<String, IdentityCheck>>,
    pub timing_ms: Option<f64>,
    pub details: Value,
    #[serde(skip)]
    pub table: Table,
}

/// Flat rows for CSV and text output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub fn one_based(subset: &[usize]) -> Vec<usize> {
    subset.iter().map(|i| i + 1).collect()
}

pub fn join_subset(subset: &[usize]) -> String {
    subset.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

/// Shortest round-trip decimal, switching to exponent form outside `[1e−4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = self.table.header.join(",");
                s.push('\n');
                for row in &self.table.rows {
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} on {}", self.command, self.input);
        let widths: Vec<usize> = (0..self.table.header.len())
            .map(|c| {
                self.table
                    .rows
                    .iter()
                    .map(|r| r[c].len())
                    .chain(std::iter::once(self.table.header[c].len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: Vec<&str>| -> String {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let _ = writeln!(s, "{}", line(self.table.header.clone()));
        for row in &self.table.rows {
            let _ = writeln!(s, "{}", line(row.iter().map(String::as_str).collect()));
        }
        if let Some(t) = self.timing_ms {
            let _ = writeln!(s, "time {t:.3} ms");
        }
        s
    }
}
