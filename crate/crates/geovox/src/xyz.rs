//! Point set text format (".xyz"): one "x y z" triple per line, '#' starts a
//! comment, blank lines ignored. Values are written in shortest round-trip
//! decimal form, so write/read is bit-exact.

use std::fs;
use std::path::Path;

use geovox_core::math::Vec3;

use crate::error::{AppError, AppResult};

pub fn read_points(path: &Path) -> AppResult<Vec<Vec3>> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let mut points = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 3 {
            return Err(AppError::format(
                path,
                format!("line {}: expected 3 coordinates, got {}", ln + 1, fields.len()),
            ));
        }
        let mut p = [0.0; 3];
        for (a, f) in fields.iter().enumerate() {
            p[a] = f.parse::<f64>().map_err(|_| {
                AppError::format(path, format!("line {}: bad number {f:?}", ln + 1))
            })?;
        }
        points.push(p);
    }
    Ok(points)
}

pub fn write_points(points: &[Vec3], path: &Path) -> AppResult<()> {
    let mut out = String::new();
    for p in points {
        out.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    fs::write(path, out).map_err(|e| AppError::io(path, e))
}
