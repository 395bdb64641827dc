//! Report serialization: canonical JSON and per-run CSV.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::ea::RunRecord;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

/// Shortest round-trip decimal form of `v` (`Debug` formatting of `f64`).
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Rewrites every floating-point number as its shortest round-trip string.
/// Object keys are already sorted by `serde_json`'s map.
fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(format_f64(n.as_f64().expect("f64 number"))),
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

/// `{"command": .., "result": .., "schema_version": 1}` with sorted keys,
/// floats as strings and a trailing newline.
pub fn canonical_json<T: Serialize>(command: &str, body: &T) -> Result<String> {
    let body = serde_json::to_value(body).map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
    let mut envelope = Map::new();
    envelope.insert("command".into(), Value::String(command.into()));
    envelope.insert("result".into(), canonicalize(body));
    envelope.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    let mut out = serde_json::to_string_pretty(&Value::Object(envelope))
        .map_err(|e| Error::InvalidArgument(format!("serialization failed: {e}")))?;
    out.push('\n');
    Ok(out)
}

/// One CSV row per run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub family: String,
    pub n: usize,
    pub c: String,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: u64,
    pub truncated: bool,
}

impl RunRow {
    pub fn new(family: &str, n: usize, c: f64, record: &RunRecord) -> RunRow {
        RunRow {
            family: family.into(),
            n,
            c: format_f64(c),
            seed: record.seed,
            t: record.optimisation_time,
            truncated: record.truncated,
        }
    }
}

pub fn write_runs_csv<W: Write>(out: W, rows: &[RunRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
    Ok(())
}
