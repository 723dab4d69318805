use std::path::Path;

use crate::error::{Error, Result};
use crate::mixture::Dataset;

/// Reads a comma-separated file of finite numbers, one observation per
/// row. A first row in which no cell parses as a number is a header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut dims = None;
    let mut points = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = record
            .as_ref()
            .ok()
            .and_then(|r| r.position())
            .map(|p| p.line() as usize)
            .unwrap_or(idx + 1);
        let record = record.map_err(|e| Error::Parse {
            row,
            column: None,
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(parse_number).collect();
        if dims.is_none() && points.is_empty() && parsed.iter().all(Option::is_none) {
            // Header row.
            dims = Some(record.len());
            continue;
        }
        let expected = *dims.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::Parse {
                row,
                column: None,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        for (c, (cell, value)) in record.iter().zip(parsed).enumerate() {
            match value {
                Some(v) => points.push(v),
                None => {
                    return Err(Error::Parse {
                        row,
                        column: Some(c + 1),
                        message: format!("not a finite number: {cell:?}"),
                    })
                }
            }
        }
    }
    match dims {
        Some(d) if !points.is_empty() => Dataset::new(points, d),
        _ => Err(Error::EmptyInput),
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    // Rust also accepts "inf"/"nan" spellings; only finite values count.
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}
