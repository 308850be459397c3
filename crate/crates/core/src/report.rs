//! Report rendering: an aligned text table, CSV, and JSON.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::timing::{percent, AnalysisReport, TimedSegment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "table" => Ok(Self::Table),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown report format `{other}` (expected table, csv or json)")),
        }
    }
}

const HEADER: [&str; 8] = ["#", "code", "frames", "entries", "standard", "actual", "efficiency", "warnings"];

fn entries_cell(s: &TimedSegment) -> String {
    let parts: Vec<String> = s.segment.entries.iter().map(ToString::to_string).collect();
    if parts.is_empty() { "-".into() } else { parts.join(" + ") }
}

fn row(i: usize, s: &TimedSegment) -> [String; 8] {
    [
        (i + 1).to_string(),
        s.segment.code.clone(),
        format!("{}-{}", s.segment.start_frame, s.segment.end_frame),
        entries_cell(s),
        format!("{:.2}", s.standard_time),
        format!("{:.2}", s.actual_time),
        percent(s.efficiency),
        s.segment.warnings.join("; "),
    ]
}

pub fn render_table(report: &AnalysisReport) -> String {
    let mut rows: Vec<[String; 8]> = vec![HEADER.map(String::from)];
    rows.extend(report.segments.iter().enumerate().map(|(i, s)| row(i, s)));
    if !report.segments.is_empty() {
        let t = &report.totals;
        rows.push([
            "total".into(),
            String::new(),
            format!("{}-{}", report.metadata.first_frame, report.metadata.last_frame),
            String::new(),
            format!("{:.2}", t.standard_time),
            format!("{:.2}", t.actual_time),
            percent(t.efficiency),
            String::new(),
        ]);
    }
    let mut widths = [0usize; 8];
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for r in &rows {
        let mut line = String::new();
        for (k, cell) in r.iter().enumerate() {
            if k > 0 {
                line.push_str("  ");
            }
            let pad = widths[k] - cell.chars().count();
            // numeric columns right-aligned
            if matches!(k, 0 | 4 | 5 | 6) {
                line.extend(std::iter::repeat_n(' ', pad));
                line.push_str(cell);
            } else {
                line.push_str(cell);
                line.extend(std::iter::repeat_n(' ', pad));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn render_csv(report: &AnalysisReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Invariant(format!("csv writer: {e}"));
    w.write_record([
        "segment",
        "code",
        "motion",
        "from_posture",
        "to_posture",
        "start_frame",
        "end_frame",
        "entries",
        "action_distance",
        "standard_time",
        "actual_time",
        "efficiency",
        "warnings",
    ])
    .map_err(csv_err)?;
    for (i, s) in report.segments.iter().enumerate() {
        let g = &s.segment;
        w.write_record([
            (i + 1).to_string(),
            g.code.clone(),
            g.motion.to_string(),
            g.from_posture.clone(),
            g.to_posture.clone(),
            g.start_frame.to_string(),
            g.end_frame.to_string(),
            g.entries.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
            format!("{}", g.action_distance),
            format!("{}", s.standard_time),
            format!("{}", s.actual_time),
            format!("{}", s.efficiency),
            g.warnings.join("; "),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invariant(format!("csv writer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
}

pub fn render_json(report: &AnalysisReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Invariant(format!("json writer: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn render(report: &AnalysisReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Table => Ok(render_table(report)),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Json => render_json(report),
    }
}

/// Reads a report written by [`render_json`]. The totals are checked
/// against the segments.
pub fn read_report_json(bytes: &[u8]) -> Result<AnalysisReport> {
    let report: AnalysisReport = serde_json::from_slice(bytes).map_err(|e| {
        if e.line() == 0 {
            Error::validation(format!("report json: {e}"))
        } else {
            Error::parse(e.line(), e.column(), format!("report json: {e}"))
        }
    })?;
    report
        .check()
        .map_err(|e| Error::validation(format!("report json is inconsistent: {e}")))?;
    Ok(report)
}
