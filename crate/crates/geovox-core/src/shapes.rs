//! Synthetic test geometries (torus, ellipsoid, sphere with a closed gap,
//! bump-deformed sphere), point-set utilities and the quad-mesh container
//! used for vertex tracking.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{dist2, Vec3};
use crate::Result;

use core::f64::consts::PI;

/// Vertices plus quadrilateral faces. Face connectivity never changes over a
/// tracked sequence; only vertex positions move.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 4]>,
}

impl QuadMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 4]>) -> Result<Self> {
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= vertices.len() {
                    return Err(Error::invalid(format!(
                        "face {fi} references vertex {v} out of {}",
                        vertices.len()
                    )));
                }
            }
            for a in 0..4 {
                for b in (a + 1)..4 {
                    if f[a] == f[b] {
                        return Err(Error::invalid(format!(
                            "face {fi} repeats vertex index {}",
                            f[a]
                        )));
                    }
                }
            }
        }
        Ok(QuadMesh { vertices, faces })
    }

    /// Undirected edge set with the number of faces sharing each edge.
    pub fn edge_face_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut counts = BTreeMap::new();
        for f in &self.faces {
            for e in 0..4 {
                let a = f[e];
                let b = f[(e + 1) % 4];
                let key = (a.min(b), a.max(b));
                *counts.entry(key).or_insert(0) += 1;
            }
        }
        counts
    }

    /// One-ring of a vertex: every other vertex of every face containing it.
    /// On a regular quad grid interior this is the 8 surrounding vertices.
    pub fn one_ring(&self, vertex: usize) -> Vec<usize> {
        let mut ring = Vec::new();
        for f in &self.faces {
            if f.contains(&vertex) {
                for &v in f {
                    if v != vertex && !ring.contains(&v) {
                        ring.push(v);
                    }
                }
            }
        }
        ring.sort_unstable();
        ring
    }
}

/// Ordered 3D points with optional named per-point scalar channels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    pub points: Vec<Vec3>,
    attributes: BTreeMap<String, Vec<f64>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec3>) -> Self {
        PointSet {
            points,
            attributes: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Channels must match the point count.
    pub fn set_attribute(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.points.len() {
            return Err(Error::invalid(format!(
                "attribute length {} does not match point count {}",
                values.len(),
                self.points.len()
            )));
        }
        self.attributes.insert(name.into(), values);
        Ok(())
    }

    pub fn attribute(&self, name: &str) -> Option<&[f64]> {
        self.attributes.get(name).map(|v| v.as_slice())
    }

    pub fn attributes(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.attributes.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

fn check_resolution(n_u: usize, n_v: usize) -> Result<()> {
    if n_u < 8 || n_v < 8 {
        return Err(Error::invalid(format!(
            "mesh resolution must be at least 8x8, got {n_u}x{n_v}"
        )));
    }
    Ok(())
}

/// Torus with major radius `r_major` and tube radius `r_minor`, sampled on an
/// `n_u` x `n_v` doubly periodic grid. Watertight: every edge is shared by
/// exactly two faces.
pub fn gen_torus(r_major: f64, r_minor: f64, n_u: usize, n_v: usize) -> Result<QuadMesh> {
    if !(r_major > r_minor && r_minor > 0.0) {
        return Err(Error::invalid(format!(
            "torus requires r_major > r_minor > 0, got {r_major}, {r_minor}"
        )));
    }
    check_resolution(n_u, n_v)?;
    let mut vertices = Vec::with_capacity(n_u * n_v);
    for u in 0..n_u {
        for v in 0..n_v {
            let a = 2.0 * PI * u as f64 / n_u as f64;
            let b = 2.0 * PI * v as f64 / n_v as f64;
            let ring = r_major + r_minor * libm::cos(b);
            vertices.push([
                ring * libm::cos(a),
                ring * libm::sin(a),
                r_minor * libm::sin(b),
            ]);
        }
    }
    let mut faces = Vec::with_capacity(n_u * n_v);
    let at = |u: usize, v: usize| (u % n_u) * n_v + (v % n_v);
    for u in 0..n_u {
        for v in 0..n_v {
            faces.push([at(u, v), at(u + 1, v), at(u + 1, v + 1), at(u, v + 1)]);
        }
    }
    QuadMesh::new(vertices, faces)
}

/// Radius profile of the lat/long sphere-family generators.
fn gen_latlong(
    radius_at: impl Fn(f64, f64) -> f64,
    n_u: usize,
    n_v: usize,
) -> Result<QuadMesh> {
    check_resolution(n_u, n_v)?;
    // Rows v = 0 and v = n_v are the poles; the ring vertices there coincide,
    // giving the documented degenerate pole quads with 4 distinct indices.
    let mut vertices = Vec::with_capacity(n_u * (n_v + 1));
    for v in 0..=n_v {
        let theta = PI * v as f64 / n_v as f64;
        for u in 0..n_u {
            let phi = 2.0 * PI * u as f64 / n_u as f64;
            let r = radius_at(theta, phi);
            vertices.push([
                r * libm::sin(theta) * libm::cos(phi),
                r * libm::sin(theta) * libm::sin(phi),
                r * libm::cos(theta),
            ]);
        }
    }
    let at = |u: usize, v: usize| v * n_u + (u % n_u);
    let mut faces = Vec::with_capacity(n_u * n_v);
    for v in 0..n_v {
        for u in 0..n_u {
            faces.push([at(u, v), at(u + 1, v), at(u + 1, v + 1), at(u, v + 1)]);
        }
    }
    QuadMesh::new(vertices, faces)
}

/// Axis-aligned ellipsoid with semi-axes `a`, `b`, `c` on a lat/long grid.
pub fn gen_ellipsoid(a: f64, b: f64, c: f64, n_u: usize, n_v: usize) -> Result<QuadMesh> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(Error::invalid("ellipsoid semi-axes must be positive"));
    }
    check_resolution(n_u, n_v)?;
    let mut mesh = gen_latlong(|_, _| 1.0, n_u, n_v)?;
    for p in &mut mesh.vertices {
        p[0] *= a;
        p[1] *= b;
        p[2] *= c;
    }
    Ok(mesh)
}

/// Sphere with a smooth circular indentation around the +z pole.
///
/// `gap_angle_deg` is the full angular diameter of the indented cap; inside
/// it the radius is reduced by a cosine bump reaching `depth` at the center,
/// so the minimum radial distance is `radius - depth`.
pub fn gen_sphere_gap(
    radius: f64,
    gap_angle_deg: f64,
    depth: f64,
    n_u: usize,
    n_v: usize,
) -> Result<QuadMesh> {
    if !(radius > 0.0) {
        return Err(Error::invalid("sphere radius must be positive"));
    }
    if !(depth > 0.0 && depth < radius) {
        return Err(Error::invalid("gap depth must be in (0, radius)"));
    }
    if !(gap_angle_deg > 0.0 && gap_angle_deg < 360.0) {
        return Err(Error::invalid("gap angle must be in (0, 360) degrees"));
    }
    let alpha = gap_angle_deg.to_radians() / 2.0;
    gen_latlong(
        move |theta, _| {
            if theta < alpha {
                let t = libm::cos(PI * theta / (2.0 * alpha));
                radius - depth * t * t
            } else {
                radius
            }
        },
        n_u,
        n_v,
    )
}

/// Sphere whose radius is displaced by
/// `bump_amp * sin(bump_freq * theta) * sin(bump_freq * phi)`.
pub fn gen_bump_sphere(
    radius: f64,
    bump_amp: f64,
    bump_freq: f64,
    n_u: usize,
    n_v: usize,
) -> Result<QuadMesh> {
    if !(radius > 0.0) {
        return Err(Error::invalid("sphere radius must be positive"));
    }
    if !(bump_amp.abs() < radius) {
        return Err(Error::invalid("bump amplitude must be below the radius"));
    }
    gen_latlong(
        move |theta, phi| {
            radius + bump_amp * libm::sin(bump_freq * theta) * libm::sin(bump_freq * phi)
        },
        n_u,
        n_v,
    )
}

/// One representative point per occupied cell of an axis-aligned lattice of
/// pitch `cell`, anchored at the world origin. The representative is the
/// point nearest the cell center, ties broken by lowest input index;
/// survivors keep their input order. Idempotent at fixed cell size.
pub fn subsample_by_voxel(points: &PointSet, cell: f64) -> Result<PointSet> {
    if !(cell.is_finite() && cell > 0.0) {
        return Err(Error::invalid("subsample cell size must be positive"));
    }
    let mut best: BTreeMap<[i64; 3], (usize, f64)> = BTreeMap::new();
    for (i, p) in points.points.iter().enumerate() {
        let mut key = [0i64; 3];
        let mut center = [0.0; 3];
        for a in 0..3 {
            let c = libm::floor(p[a] / cell);
            key[a] = c as i64;
            center[a] = (c + 0.5) * cell;
        }
        let d = dist2(*p, center);
        match best.get(&key) {
            Some(&(_, bd)) if bd <= d => {}
            _ => {
                best.insert(key, (i, d));
            }
        }
    }
    let mut keep: Vec<usize> = best.values().map(|&(i, _)| i).collect();
    keep.sort_unstable();
    let mut out = PointSet::new(keep.iter().map(|&i| points.points[i]).collect());
    for (name, values) in points.attributes() {
        let sel: Vec<f64> = keep.iter().map(|&i| values[i]).collect();
        out.set_attribute(name, sel)?;
    }
    Ok(out)
}
