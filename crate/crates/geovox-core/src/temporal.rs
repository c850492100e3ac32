//! Sequence-level analysis of tracked meshes: Pearson correlation of feature
//! maps against the first frame, Green-Lagrange elongation maps, per-vertex
//! feature differences and local feature curves around a vertex.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math::dist2;
use crate::shapes::QuadMesh;
use crate::Result;

/// Per-vertex scalar maps over a frame sequence; every frame has the same
/// vertex count.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeries {
    frames: Vec<Vec<f64>>,
    pub frame_rate: Option<f64>,
}

impl FeatureSeries {
    pub fn new(frames: Vec<Vec<f64>>) -> Result<Self> {
        let width = frames.first().map(|f| f.len()).unwrap_or(0);
        if frames.is_empty() || width < 2 {
            return Err(Error::invalid(
                "a feature series needs at least one frame of at least two values",
            ));
        }
        for (t, f) in frames.iter().enumerate() {
            if f.len() != width {
                return Err(Error::invalid(format!(
                    "frame {t} has {} values, expected {width}",
                    f.len()
                )));
            }
        }
        Ok(FeatureSeries {
            frames,
            frame_rate: None,
        })
    }

    pub fn frames(&self) -> &[Vec<f64>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].len()
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson correlation of every frame against frame 0. The first entry is
/// exactly 1; frames with zero variance come back as `None` (undefined, not
/// fatal). Frame 0 itself must have nonzero variance.
pub fn pearson_series(series: &FeatureSeries) -> Result<Vec<Option<f64>>> {
    let base = &series.frames[0];
    let mb = mean(base);
    let var_base: f64 = base.iter().map(|v| (v - mb) * (v - mb)).sum();
    if var_base <= 0.0 {
        return Err(Error::invalid(
            "frame 0 has zero variance; correlation is undefined",
        ));
    }
    let mut out = Vec::with_capacity(series.len());
    out.push(Some(1.0));
    for frame in &series.frames[1..] {
        let mf = mean(frame);
        let mut cov = 0.0;
        let mut var_f = 0.0;
        for (b, f) in base.iter().zip(frame) {
            cov += (b - mb) * (f - mf);
            var_f += (f - mf) * (f - mf);
        }
        if var_f <= 0.0 {
            out.push(None);
        } else {
            out.push(Some(cov / libm::sqrt(var_base * var_f)));
        }
    }
    Ok(out)
}

/// Per-vertex Green-Lagrange elongation of `deformed` against `reference`.
///
/// Each unique edge contributes `(|e'|^2 - |e|^2) / (2 |e|^2)`; a vertex gets
/// the mean over its incident edges. Negative is compression, positive is
/// extension. A zero-length reference edge is rejected.
pub fn elongation(reference: &QuadMesh, deformed: &QuadMesh) -> Result<Vec<f64>> {
    if reference.vertices.len() != deformed.vertices.len() {
        return Err(Error::invalid("meshes must have the same vertex count"));
    }
    if reference.faces != deformed.faces {
        return Err(Error::invalid("meshes must share identical connectivity"));
    }
    let mut edges = BTreeSet::new();
    for f in &reference.faces {
        for e in 0..4 {
            let a = f[e];
            let b = f[(e + 1) % 4];
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let mut acc = vec![0.0f64; reference.vertices.len()];
    let mut cnt = vec![0usize; reference.vertices.len()];
    for &(a, b) in &edges {
        let l_ref = dist2(reference.vertices[a], reference.vertices[b]);
        if l_ref <= 0.0 {
            return Err(Error::invalid(format!(
                "zero-length reference edge between vertices {a} and {b}"
            )));
        }
        let l_def = dist2(deformed.vertices[a], deformed.vertices[b]);
        let strain = (l_def - l_ref) / (2.0 * l_ref);
        acc[a] += strain;
        acc[b] += strain;
        cnt[a] += 1;
        cnt[b] += 1;
    }
    Ok(acc
        .iter()
        .zip(&cnt)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect())
}

/// Per-vertex difference of frame `t` against frame 0.
pub fn feature_difference(series: &FeatureSeries, t: usize) -> Result<Vec<f64>> {
    let frame = series
        .frames
        .get(t)
        .ok_or_else(|| Error::invalid(format!("frame {t} out of {}", series.len())))?;
    Ok(frame
        .iter()
        .zip(&series.frames[0])
        .map(|(f, b)| f - b)
        .collect())
}

/// Raw and min-max normalized per-frame neighborhood means.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodCurve {
    /// Mean feature over the vertex and its one-ring, per frame.
    pub raw: Vec<f64>,
    /// Min-max normalization of `raw` to [0, 1]; all zeros when flat.
    pub normalized: Vec<f64>,
}

/// Average feature in the quad-mesh neighborhood of a vertex, per frame.
///
/// The neighborhood is the vertex plus its one-ring (the 8 surrounding
/// vertices on a regular quad-grid interior). The normalized curve serves
/// plotting; the raw means stay available.
pub fn point_neighborhood_curve(
    series: &FeatureSeries,
    mesh: &QuadMesh,
    vertex_index: usize,
) -> Result<NeighborhoodCurve> {
    if vertex_index >= mesh.vertices.len() {
        return Err(Error::invalid(format!(
            "vertex {vertex_index} out of {}",
            mesh.vertices.len()
        )));
    }
    if mesh.vertices.len() != series.width() {
        return Err(Error::invalid(format!(
            "series width {} does not match vertex count {}",
            series.width(),
            mesh.vertices.len()
        )));
    }
    let ring = mesh.one_ring(vertex_index);
    if ring.is_empty() {
        return Err(Error::invalid(format!(
            "vertex {vertex_index} is isolated"
        )));
    }
    let mut members = ring;
    members.push(vertex_index);
    let raw: Vec<f64> = series
        .frames
        .iter()
        .map(|f| members.iter().map(|&i| f[i]).sum::<f64>() / members.len() as f64)
        .collect();
    let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let normalized = if hi > lo {
        raw.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; raw.len()]
    };
    Ok(NeighborhoodCurve { raw, normalized })
}
