//! Report assembly and emission.
//!
//! The CSV layout is fixed: `algorithm,iterations,error_norm,multiplications,wall_ms`,
//! one row per (algorithm, ladder point), floats printed with 17 significant
//! digits so values round-trip exactly. JSON mirrors the struct field names,
//! with the same float format via a custom serializer.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::AlgorithmKind;
use crate::mcsolve::PrecheckReport;

use super::config::ExperimentConfig;
use super::HarnessError;

/// One snapshot of one algorithm at one ladder point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: AlgorithmKind,
    pub iterations: u64,
    /// `||h - w||_2` against the true plant.
    pub error_norm: f64,
    /// Cumulative multiplications: measured for the baselines, the
    /// `N`-per-walk budget accounting for the Monte Carlo solver.
    pub multiplications: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config: ExperimentConfig,
    pub precheck: Option<PrecheckReport>,
    pub tool_version: String,
    /// True when a divergent system was run anyway under the force flag.
    pub forced_divergent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub metadata: ReportMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}`, expected csv or json")),
        }
    }
}

/// 17 significant digits: enough to reproduce any f64 bit pattern on parse.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv_string(report: &ExperimentReport) -> String {
    let mut out = String::from("algorithm,iterations,error_norm,multiplications,wall_ms\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.algorithm,
            row.iterations,
            fmt_float(row.error_norm),
            row.multiplications,
            fmt_float(row.wall_ms),
        ));
    }
    out
}

pub fn to_json_string(report: &ExperimentReport) -> Result<String, HarnessError> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, SigDigitFormatter::default());
    report.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serializer emits UTF-8"))
}

/// Writes the report to `path` in the requested format. I/O failures carry
/// the path.
pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    path: &Path,
) -> Result<(), HarnessError> {
    let text = match format {
        ReportFormat::Csv => to_csv_string(report),
        ReportFormat::Json => to_json_string(report)?,
    };
    write_text(path, &text)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    let mut file = std::fs::File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(text.as_bytes())
        .map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// JSON formatter that prints every f64 with 17 significant digits.
#[derive(Default)]
struct SigDigitFormatter {
    compact: serde_json::ser::CompactFormatter,
}

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        writer.write_all(fmt_float(value).as_bytes())
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        serde_json::ser::Formatter::write_f32(&mut self.compact, writer, value)
    }
}
