//! Structured-text rendering shared by every report.
//!
//! Two encodings: tab-separated tables with a header line, and JSON lines
//! (one object per row). Floats use Rust's shortest round-trip formatting, so
//! both encodings parse back to the exact values.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    #[default]
    Table,
    JsonLines,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Table => "tsv",
            ReportFormat::JsonLines => "jsonl",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "json-lines" | "jsonl" => Ok(ReportFormat::JsonLines),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

pub trait TableRow: Serialize {
    fn header() -> Vec<&'static str>;
    fn cells(&self) -> Vec<String>;
}

/// Anything that flattens into a list of rows.
pub trait Table {
    type Row: TableRow;
    fn rows(&self) -> Vec<Self::Row>;

    fn render(&self, format: ReportFormat) -> String {
        render_rows(&self.rows(), format)
    }
}

pub fn render_rows<R: TableRow>(rows: &[R], format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Table => {
            out.push_str(&R::header().join("\t"));
            out.push('\n');
            for r in rows {
                out.push_str(&r.cells().join("\t"));
                out.push('\n');
            }
        }
        ReportFormat::JsonLines => {
            for r in rows {
                out.push_str(&serde_json::to_string(r).expect("report rows serialize"));
                out.push('\n');
            }
        }
    }
    out
}

/// Splits a TSV table into `(header, rows)`; blank lines are skipped.
pub fn parse_tsv(text: &str) -> Option<(Vec<&str>, Vec<Vec<&str>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next()?.split('\t').collect();
    let rows = lines.map(|l| l.split('\t').collect()).collect();
    Some((header, rows))
}

/// Formats `mean ± std` with fixed precision for human-facing summaries.
pub fn mean_pm_std(mean: f64, std: f64, digits: usize) -> String {
    format!("{mean:.digits$} ± {std:.digits$}")
}
