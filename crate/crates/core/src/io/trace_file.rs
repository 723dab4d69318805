//! Line-delimited JSON traces: one metadata line, then one record per step.
//!
//! Floats are written in shortest round-trip form (at most 17 significant
//! digits) and parsed back exactly.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::framework::trace::{FrameworkTrace, TraceMeta, TraceRecord, TRACE_SCHEMA, TRACE_VERSION};

pub fn trace_to_string(trace: &FrameworkTrace) -> Result<String> {
    let mut out = serde_json::to_string(&trace.meta).map_err(|e| Error::Json { line: 1, source: e })?;
    out.push('\n');
    for (i, r) in trace.records.iter().enumerate() {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::Json { line: i + 2, source: e })?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_trace(trace: &FrameworkTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, trace_to_string(trace)?).map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
struct Header {
    schema: String,
    version: u32,
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<FrameworkTrace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(Error::EmptyInput)?;
    let header: Header = serde_json::from_str(first).map_err(|e| Error::Json { line: 1, source: e })?;
    if header.schema != TRACE_SCHEMA {
        return Err(Error::InvalidArgument(format!(
            "{}: not a trace file (schema {:?})",
            path.display(),
            header.schema
        )));
    }
    if header.version != TRACE_VERSION {
        return Err(Error::SchemaVersion {
            found: header.version,
            expected: TRACE_VERSION,
        });
    }
    let meta: TraceMeta = serde_json::from_str(first).map_err(|e| Error::Json { line: 1, source: e })?;
    let records = lines
        .map(|(i, l)| serde_json::from_str::<TraceRecord>(l).map_err(|e| Error::Json { line: i + 1, source: e }))
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameworkTrace { meta, records })
}
