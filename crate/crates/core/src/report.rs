//! Report emission: CSV tables and JSON documents.
//!
//! CSV files are UTF-8 with LF line endings, a header row first, and floats
//! printed in Rust's shortest-roundtrip form, so identical runs produce
//! byte-identical artifacts and parsing a file back recovers every value
//! exactly. JSON output is a single object carrying a `schema_version`
//! field, currently `"1"`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::dimension::DimFit;
use crate::error::LabError;
use crate::harness::{DeclipReport, OutputFormat, PhaseCurve, PhaseRow};
use crate::uncertainty::{ConcentrationReport, UncertaintyVerdict};
use crate::Result;

/// Schema tag stamped into every JSON document.
pub const SCHEMA_VERSION: &str = "1";

/// Any emittable report.
#[derive(Debug, Clone)]
pub enum Report {
    Phase(PhaseCurve),
    Declip(DeclipReport),
    Concentration(ConcentrationReport),
    Dimension(DimFit),
    Uncertainty(UncertaintyVerdict),
}

/// Render a phase curve as CSV. Only the public seven columns appear; the
/// outcome tallies are JSON-only.
pub fn phase_csv(curve: &PhaseCurve) -> String {
    let mut out = String::from("k,rate,successes,trials,success_rate,ci_lo,ci_hi\n");
    for r in &curve.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k, r.rate, r.successes, r.trials, r.success_rate, r.ci_lo, r.ci_hi
        );
    }
    out
}

/// Parse a phase CSV produced by [`phase_csv`]. The tallies absent from the
/// CSV schema come back as zero.
pub fn parse_phase_csv(text: &str) -> Result<Vec<PhaseRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| LabError::Config("empty phase CSV".into()))?;
    if header != "k,rate,successes,trials,success_rate,ci_lo,ci_hi" {
        return Err(LabError::Config(format!("unexpected phase CSV header: {header}")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(LabError::Config(format!(
                "phase CSV row {} has {} fields, expected 7",
                i + 2,
                fields.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| LabError::Config(format!("bad float {s:?}: {e}")))
        };
        let parse_u = |s: &str| -> Result<u64> {
            s.parse::<u64>()
                .map_err(|e| LabError::Config(format!("bad integer {s:?}: {e}")))
        };
        rows.push(PhaseRow {
            k: parse_u(fields[0])? as usize,
            rate: parse_f(fields[1])?,
            successes: parse_u(fields[2])?,
            trials: parse_u(fields[3])?,
            success_rate: parse_f(fields[4])?,
            ci_lo: parse_f(fields[5])?,
            ci_hi: parse_f(fields[6])?,
            ambiguous: 0,
            none_consistent: 0,
        });
    }
    Ok(rows)
}

/// Render a concentration report as CSV. The theoretical bound is clamped
/// at 1 for presentation; the raw value lives in the JSON form.
pub fn concentration_csv(report: &ConcentrationReport) -> String {
    let mut out = String::from("delta,bound,p_hat,ci\n");
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{},{}", r.delta, r.bound.min(1.0), r.p_hat, r.ci);
    }
    out
}

/// Render a box-dimension ladder as CSV.
pub fn ladder_csv(fit: &DimFit) -> String {
    let mut out = String::from("j,delta,count,log2count\n");
    for r in &fit.ladder {
        let _ = writeln!(out, "{},{},{},{}", r.j, r.delta, r.count, r.log2_count);
    }
    out
}

/// One-row summary CSV for a declip report.
pub fn declip_csv(report: &DeclipReport) -> String {
    let mut out = String::from(
        "rho,theoretical_rate,successes,trials,success_rate,ci_lo,ci_hi,clip_q90,box_dim_per_n\n",
    );
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        report.rho,
        report.theoretical_rate,
        report.successes,
        report.trials,
        report.success_rate,
        report.ci_lo,
        report.ci_hi,
        report.clip_q90,
        report.box_dim_per_n
    );
    out
}

/// Serialize any report as a single JSON object with the schema tag.
pub fn json_document<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    let map = v.as_object_mut().ok_or_else(|| {
        LabError::Config("only object-shaped reports can be emitted as JSON".into())
    })?;
    map.insert(
        "schema_version".to_string(),
        serde_json::Value::String(SCHEMA_VERSION.to_string()),
    );
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    Ok(text)
}

/// Write a report to `path` in the requested format. Uncertainty verdicts
/// are always JSON documents regardless of the requested format.
pub fn emit(report: &Report, path: &Path, format: OutputFormat) -> Result<()> {
    let text = match (report, format) {
        (Report::Phase(c), OutputFormat::Csv) => phase_csv(c),
        (Report::Phase(c), OutputFormat::Json) => json_document(c)?,
        (Report::Declip(r), OutputFormat::Csv) => declip_csv(r),
        (Report::Declip(r), OutputFormat::Json) => json_document(r)?,
        (Report::Concentration(r), OutputFormat::Csv) => concentration_csv(r),
        (Report::Concentration(r), OutputFormat::Json) => json_document(r)?,
        (Report::Dimension(f), OutputFormat::Csv) => ladder_csv(f),
        (Report::Dimension(f), OutputFormat::Json) => json_document(f)?,
        (Report::Uncertainty(v), _) => json_document(v)?,
    };
    write_text(path, &text)
}

/// Write UTF-8 text, creating or truncating the file.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text.as_bytes())?;
    Ok(())
}
