//! Wavefront OBJ with quad faces. Strict mode rejects any face that is not a
//! quad; lenient mode pairs consecutive triangles that share an edge back
//! into quads (the common quad-export-as-two-tris case). Vertex order and
//! face tuples round-trip exactly.

use std::fs;
use std::path::{Path, PathBuf};

use geovox_core::math::Vec3;
use geovox_core::shapes::QuadMesh;

use crate::error::{AppError, AppResult};
use crate::table::fmt_f64;

pub fn write_quad_mesh(mesh: &QuadMesh, path: &Path) -> AppResult<()> {
    let mut out = String::new();
    for v in &mesh.vertices {
        out.push_str(&format!(
            "v {} {} {}\n",
            fmt_f64(v[0]),
            fmt_f64(v[1]),
            fmt_f64(v[2])
        ));
    }
    for f in &mesh.faces {
        out.push_str(&format!(
            "f {} {} {} {}\n",
            f[0] + 1,
            f[1] + 1,
            f[2] + 1,
            f[3] + 1
        ));
    }
    fs::write(path, out).map_err(|e| AppError::io(path, e))
}

/// Write the mesh plus a sidecar CSV "vertex_index,value" carrying one scalar
/// per vertex; the sidecar sits next to the OBJ with a ".csv" extension.
/// Returns the sidecar path.
pub fn write_mesh_with_scalar(
    mesh: &QuadMesh,
    channel: &[f64],
    path: &Path,
) -> AppResult<PathBuf> {
    if channel.len() != mesh.vertices.len() {
        return Err(geovox_core::Error::InvalidInput(format!(
            "scalar channel length {} does not match vertex count {}",
            channel.len(),
            mesh.vertices.len()
        ))
        .into());
    }
    write_quad_mesh(mesh, path)?;
    let sidecar = path.with_extension("csv");
    let mut out = String::from("vertex_index,value\n");
    for (i, v) in channel.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt_f64(*v)));
    }
    fs::write(&sidecar, out).map_err(|e| AppError::io(&sidecar, e))?;
    Ok(sidecar)
}

pub fn read_quad_mesh(path: &Path, strict: bool) -> AppResult<QuadMesh> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[usize; 4]> = Vec::new();
    let mut pending_tri: Option<(usize, [usize; 3])> = None;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<&str> = fields.collect();
                if coords.len() < 3 {
                    return Err(AppError::format(
                        path,
                        format!("line {}: vertex needs 3 coordinates", ln + 1),
                    ));
                }
                let mut p = [0.0; 3];
                for a in 0..3 {
                    p[a] = coords[a].parse::<f64>().map_err(|_| {
                        AppError::format(
                            path,
                            format!("line {}: bad coordinate {:?}", ln + 1, coords[a]),
                        )
                    })?;
                }
                vertices.push(p);
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in fields {
                    let first = tok.split('/').next().unwrap_or(tok);
                    let v: i64 = first.parse().map_err(|_| {
                        AppError::format(
                            path,
                            format!("line {}: bad face index {tok:?}", ln + 1),
                        )
                    })?;
                    if v < 1 {
                        return Err(AppError::format(
                            path,
                            format!("line {}: face indices must be positive", ln + 1),
                        ));
                    }
                    idx.push((v - 1) as usize);
                }
                match idx.len() {
                    4 => {
                        if pending_tri.is_some() {
                            return Err(AppError::format(
                                path,
                                format!("line {}: unpaired triangle before this quad", ln + 1),
                            ));
                        }
                        faces.push([idx[0], idx[1], idx[2], idx[3]]);
                    }
                    3 if !strict => {
                        let tri = [idx[0], idx[1], idx[2]];
                        match pending_tri.take() {
                            None => pending_tri = Some((ln + 1, tri)),
                            Some((_, first)) => {
                                let quad = pair_triangles(first, tri).ok_or_else(|| {
                                    AppError::format(
                                        path,
                                        format!(
                                            "line {}: consecutive triangles do not share an edge",
                                            ln + 1
                                        ),
                                    )
                                })?;
                                faces.push(quad);
                            }
                        }
                    }
                    n => {
                        return Err(AppError::format(
                            path,
                            format!("line {}: face with {n} vertices, quads required", ln + 1),
                        ));
                    }
                }
            }
            _ => {} // comments, normals, groups, materials: ignored
        }
    }
    if let Some((ln, _)) = pending_tri {
        return Err(AppError::format(
            path,
            format!("line {ln}: dangling unpaired triangle"),
        ));
    }
    QuadMesh::new(vertices, faces).map_err(|e| AppError::format(path, e.to_string()))
}

/// Merge two triangles that share an edge into one quad, keeping the first
/// triangle's winding: the second triangle's off-edge vertex is spliced into
/// the shared edge of the first.
fn pair_triangles(t1: [usize; 3], t2: [usize; 3]) -> Option<[usize; 4]> {
    let shared: Vec<usize> = t1
        .iter()
        .copied()
        .filter(|v| t2.contains(v))
        .collect();
    if shared.len() != 2 {
        return None;
    }
    let off2 = *t2.iter().find(|v| !shared.contains(v))?;
    for e in 0..3 {
        let a = t1[e];
        let b = t1[(e + 1) % 3];
        if shared.contains(&a) && shared.contains(&b) {
            let c = t1[(e + 2) % 3];
            // Perimeter a -> off2 -> b -> c keeps t1's orientation with the
            // shared edge a-b as the quad diagonal replaced by off2.
            let quad = [a, off2, b, c];
            let mut distinct = quad;
            distinct.sort_unstable();
            if distinct.windows(2).any(|w| w[0] == w[1]) {
                return None;
            }
            return Some(quad);
        }
    }
    None
}
