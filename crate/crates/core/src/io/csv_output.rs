use std::path::Path;

use crate::error::{Error, Result};
use crate::mixture::Dataset;

/// CSV text with a `x1,…,xL` header. Values use the shortest decimal form
/// that parses back to the same `f64`.
pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut out = (1..=data.dims()).map(|e| format!("x{e}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in data.rows() {
        out.push_str(&row.iter().map(f64::to_string).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, dataset_to_csv(data)).map_err(|e| Error::io(path, e))
}

/// One zero-based component index per line under a `label` header.
pub fn write_labels(labels: &[usize], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("label\n");
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
