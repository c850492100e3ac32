//! Minimal SVG line plot: one polyline with axes, no external renderer.

use std::fs;
use std::path::Path;

use crate::error::{AppError, AppResult};

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 48.0;

pub fn write_line_plot(
    path: &Path,
    ys: &[f64],
    title: &str,
    y_label: &str,
) -> AppResult<()> {
    if ys.is_empty() {
        return Err(AppError::Usage("cannot plot an empty series".into()));
    }
    let finite: Vec<f64> = ys.iter().copied().filter(|v| v.is_finite()).collect();
    let (lo, hi) = finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
        (l.min(v), h.max(v))
    });
    let (lo, hi) = if lo < hi { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let x_of = |i: usize| {
        MARGIN + (W - 2.0 * MARGIN) * i as f64 / (ys.len().max(2) - 1) as f64
    };
    let y_of = |v: f64| H - MARGIN - (H - 2.0 * MARGIN) * (v - lo) / (hi - lo);
    let mut pts = String::new();
    for (i, &v) in ys.iter().enumerate() {
        if v.is_finite() {
            pts.push_str(&format!("{:.2},{:.2} ", x_of(i), y_of(v)));
        }
    }
    let svg = format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<line x1=\"{m}\" y1=\"{ybot}\" x2=\"{xr}\" y2=\"{ybot}\" stroke=\"black\"/>\n",
            "<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{ybot}\" stroke=\"black\"/>\n",
            "<text x=\"{m}\" y=\"24\" font-size=\"14\">{title}</text>\n",
            "<text x=\"8\" y=\"{m}\" font-size=\"11\">{ymax:.4}</text>\n",
            "<text x=\"8\" y=\"{ybot}\" font-size=\"11\">{ymin:.4}</text>\n",
            "<text x=\"8\" y=\"{ymid}\" font-size=\"11\">{ylabel}</text>\n",
            "<polyline points=\"{pts}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
            "</svg>\n"
        ),
        w = W,
        h = H,
        m = MARGIN,
        xr = W - MARGIN,
        ybot = H - MARGIN,
        ymid = H / 2.0,
        title = title,
        ylabel = y_label,
        ymax = hi,
        ymin = lo,
        pts = pts.trim_end(),
    );
    fs::write(path, svg).map_err(|e| AppError::io(path, e))
}
