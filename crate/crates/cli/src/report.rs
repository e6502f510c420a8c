use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use warpspec::{ManifoldSpec, QuadratureConfig, SolverConfig};

/// Everything needed to rerun a report.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub config_file: Option<String>,
    pub settings: BTreeMap<String, String>,
    pub arguments: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifold: Option<ManifoldSpec>,
    pub quadrature: QuadratureConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
}

#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a ConfigEcho,
    pub result: T,
}

pub fn report<'a, T: Serialize>(
    command: &'static str,
    config: &'a ConfigEcho,
    result: T,
) -> Report<'a, T> {
    Report {
        tool: "warpspec",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        result,
    }
}

/// Pretty JSON to `path`, or to stdout when no path is given.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Two-column CSV with a header row.
pub fn two_column_csv(header: (&str, &str), rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (x, y) in rows {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

#[derive(Debug, Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    context: Vec<String>,
}

/// JSON error line; the kind comes from the library error when there is one.
pub fn error_record(err: &anyhow::Error) -> String {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<warpspec::Error>())
        .map_or("IoError", |e| e.kind());
    let mut context: Vec<String> = err.chain().map(|e| e.to_string()).collect();
    let message = context.pop().unwrap_or_default();
    let record = ErrorRecord {
        error: ErrorBody {
            kind,
            message,
            context,
        },
    };
    serde_json::to_string(&record)
        .unwrap_or_else(|_| format!("{{\"error\":{{\"kind\":\"{kind}\"}}}}"))
}
