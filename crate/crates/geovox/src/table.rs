//! Small CSV helpers for the report files. Values print in Rust's shortest
//! round-trip decimal form, which keeps outputs byte-deterministic.

use std::fs;
use std::path::Path;

use crate::error::{AppError, AppResult};

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v}")
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> AppResult<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| AppError::io(path, e))
}

/// Read one named column of a headered CSV as f64; "NaN" parses as NaN.
pub fn read_csv_column(path: &Path, column: &str) -> AppResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| AppError::format(path, "empty CSV"))?;
    let col = header
        .split(',')
        .position(|h| h.trim() == column)
        .ok_or_else(|| {
            AppError::format(path, format!("column {column:?} not found in {header:?}"))
        })?;
    let mut values = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let field = line.split(',').nth(col).ok_or_else(|| {
            AppError::format(path, format!("line {}: missing column {column:?}", ln + 2))
        })?;
        let v = field.trim().parse::<f64>().map_err(|_| {
            AppError::format(path, format!("line {}: bad number {field:?}", ln + 2))
        })?;
        values.push(v);
    }
    Ok(values)
}
