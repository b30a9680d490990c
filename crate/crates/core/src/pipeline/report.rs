use std::fmt::Write as _;
use std::str::FromStr;

use super::fraction_text;
use super::{PipelineError, Report, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl FromStr for ReportFormat {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(PipelineError::UnknownFormat(other.to_string())),
        }
    }
}

const CSV_HEADER: [&str; 18] = [
    "record",
    "collection",
    "level",
    "direction",
    "language",
    "family",
    "m",
    "g",
    "p_used",
    "p_value",
    "p_holm",
    "significant",
    "adequately_sampled",
    "neglog10_holm",
    "l0",
    "l",
    "f",
    "f_H",
];

/// Renders `report`; output bytes depend only on the report contents.
pub fn emit_report(report: &Report, format: ReportFormat) -> Result<Vec<u8>, PipelineError> {
    match format {
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Markdown => Ok(emit_markdown(report).into_bytes()),
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

fn p_text(p: f64) -> String {
    format!("{p:.6e}")
}

fn p_used_text(r: &TestResult) -> String {
    r.p_used
        .as_ref()
        .map(fraction_text::format)
        .unwrap_or_default()
}

fn emit_csv(report: &Report) -> Result<Vec<u8>, PipelineError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for s in &report.summaries {
        if s.l0 == 0 {
            continue;
        }
        w.write_record([
            "summary",
            &report.collection,
            s.level.as_str(),
            s.direction.as_str(),
            "",
            "",
            "",
            "",
            "",
            "",
            "",
            "",
            "",
            "",
            &s.l0.to_string(),
            &s.l.to_string(),
            &s.f.to_string(),
            &s.f_h.to_string(),
        ])?;
    }
    for r in &report.results {
        w.write_record([
            "test",
            &report.collection,
            r.level.as_str(),
            r.direction.as_str(),
            &r.language,
            &r.family,
            &r.m.to_string(),
            &r.g.to_string(),
            &p_used_text(r),
            &p_text(r.p_value),
            &p_text(r.p_holm),
            &r.significant.to_string(),
            &r.adequately_sampled.to_string(),
            &format!("{:.1}", r.neglog10_holm),
            "",
            "",
            "",
            "",
        ])?;
    }
    w.into_inner()
        .map_err(|e| PipelineError::Io(e.into_error()))
}

fn emit_markdown(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {} (alpha = {})\n", report.collection, report.alpha);
    let _ = writeln!(out, "| level | direction | l0 | l | f | f_H |");
    let _ = writeln!(out, "|---|---|---:|---:|---:|---:|");
    for s in report.summaries.iter().filter(|s| s.l0 > 0) {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} |",
            s.level, s.direction, s.l0, s.l, s.f, s.f_h
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "| level | direction | language | family | m | g | p | p-value | Holm p-value | -log10 | significant | m >= m* |"
    );
    let _ = writeln!(
        out,
        "|---|---|---|---|---:|---:|---|---:|---:|---:|---|---|"
    );
    for r in &report.results {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {:.1} | {} | {} |",
            r.level,
            r.direction,
            r.language,
            r.family,
            r.m,
            r.g,
            p_used_text(r),
            p_text(r.p_value),
            p_text(r.p_holm),
            r.neglog10_holm,
            if r.significant { "yes" } else { "no" },
            if r.adequately_sampled { "yes" } else { "no" },
        );
    }
    if !report.exclusions.is_empty() || report.parse_errors > 0 {
        let _ = writeln!(out, "\nExcluded sentences:");
        for (reason, count) in &report.exclusions {
            let _ = writeln!(out, "- {reason}: {count}");
        }
        let _ = writeln!(out, "- parse errors: {}", report.parse_errors);
    }
    out
}
