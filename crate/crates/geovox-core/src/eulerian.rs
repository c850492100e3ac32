//! Eulerian PDE pipeline: build two non-intersecting Dirichlet boundaries
//! around a shape, relax Laplace's equation between them, transport geodesic
//! lengths along the normalized gradient field, and form the surface-variation
//! feature as sphere radius over geodesic length.
//!
//! The solve region is the set of voxels between the eroded shape (inner
//! boundary, held at 0) and the complement of the surrounding sphere (outer
//! boundary, held at 1e4). Out-of-grid neighbors are treated as mirrored
//! (insulated walls); in the intended setup the region never touches the
//! grid edge, so this only matters for hand-built configurations.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, NotConverged};
use crate::grid::{BinaryMask, GridGeom, ScalarGrid};
use crate::math::{dist, eigenvalues_sym3, eigenvector_sym3, Vec3};
use crate::Result;

/// Dirichlet value on the inner boundary.
pub const INNER_VALUE: f64 = 0.0;
/// Dirichlet value on the outer boundary.
pub const OUTER_VALUE: f64 = 1.0e4;

/// The two boundaries and the solve region between them.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConfig {
    inner: BinaryMask,
    outer: BinaryMask,
    region: BinaryMask,
    center: Vec3,
    radius: f64,
    /// Number of 5% radius growth steps needed to contain the shape.
    growth_steps: u32,
}

impl BoundaryConfig {
    /// Assemble from explicit boundary masks. `region` becomes the complement
    /// of `inner | outer`; the masks must share a lattice and be disjoint.
    pub fn from_masks(
        inner: BinaryMask,
        outer: BinaryMask,
        center: Vec3,
        radius: f64,
    ) -> Result<Self> {
        if inner.geom() != outer.geom() {
            return Err(Error::invalid("boundary masks must share a lattice"));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid("sphere radius must be positive"));
        }
        let geom = *inner.geom();
        let mut region = BinaryMask::like(&geom);
        for idx in 0..geom.len() {
            let (a, b) = (inner.at(idx), outer.at(idx));
            if a && b {
                let v = geom.coords(idx);
                return Err(Error::invalid(format!(
                    "inner and outer boundaries intersect at {:?}",
                    v
                )));
            }
            if !a && !b {
                region.set(geom.coords(idx), true);
            }
        }
        Ok(BoundaryConfig {
            inner,
            outer,
            region,
            center,
            radius,
            growth_steps: 0,
        })
    }

    pub fn inner(&self) -> &BinaryMask {
        &self.inner
    }

    pub fn outer(&self) -> &BinaryMask {
        &self.outer
    }

    pub fn region(&self) -> &BinaryMask {
        &self.region
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn growth_steps(&self) -> u32 {
        self.growth_steps
    }

    pub fn inner_value(&self) -> f64 {
        INNER_VALUE
    }

    pub fn outer_value(&self) -> f64 {
        OUTER_VALUE
    }
}

/// Erode the shape, find its principal axis, and enclose it in a sphere of
/// radius `radius_scale` times the principal-axis extent.
///
/// The centroid and axis come from the covariance of occupied voxel centers;
/// the extent is max minus min of their projections onto the dominant
/// eigenvector. If the sphere does not contain every shape voxel the radius
/// grows in 5% steps until it does ([`BoundaryConfig::growth_steps`] reports
/// how often). The grown sphere must still fit with one voxel of outer
/// boundary to spare on every side, otherwise the caller has to re-pad.
pub fn setup_boundaries(
    shape: &BinaryMask,
    erosion_iters: usize,
    radius_scale: f64,
) -> Result<BoundaryConfig> {
    if !shape.any() {
        return Err(Error::invalid("shape mask is empty"));
    }
    if !(radius_scale.is_finite() && radius_scale > 0.0) {
        return Err(Error::invalid("radius scale must be positive"));
    }
    let inner = shape.erode_cross(erosion_iters)?;
    let geom = *shape.geom();
    let center = shape.centroid().expect("non-empty shape");

    let mut cov = [[0.0; 3]; 3];
    let mut count = 0usize;
    for v in shape.iter_occupied() {
        let w = geom.world_of(v);
        let d = [w[0] - center[0], w[1] - center[1], w[2] - center[2]];
        for r in 0..3 {
            for s in 0..3 {
                cov[r][s] += d[r] * d[s];
            }
        }
        count += 1;
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= count as f64;
        }
    }
    let eig = eigenvalues_sym3(&cov);
    let axis = eigenvector_sym3(&cov, eig[2]);

    let mut proj_min = f64::INFINITY;
    let mut proj_max = f64::NEG_INFINITY;
    let mut dist_max: f64 = 0.0;
    for v in shape.iter_occupied() {
        let w = geom.world_of(v);
        let d = [w[0] - center[0], w[1] - center[1], w[2] - center[2]];
        let p = d[0] * axis[0] + d[1] * axis[1] + d[2] * axis[2];
        proj_min = proj_min.min(p);
        proj_max = proj_max.max(p);
        dist_max = dist_max.max(libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]));
    }
    let axis_extent = proj_max - proj_min;
    if axis_extent <= 0.0 {
        return Err(Error::degenerate("shape has no extent along its principal axis"));
    }
    let mut radius = radius_scale * axis_extent;
    let mut growth_steps = 0u32;
    while radius < dist_max {
        radius *= 1.05;
        growth_steps += 1;
    }

    // One voxel layer of outer boundary must remain on every side.
    let origin = geom.origin();
    let spacing = geom.spacing();
    let dims = geom.dims();
    for a in 0..3 {
        let lo_ok = center[a] - radius >= origin[a] + spacing[a];
        let hi_ok = center[a] + radius <= origin[a] + (dims[a] - 2) as f64 * spacing[a];
        if !(lo_ok && hi_ok) {
            return Err(Error::GridTooSmall(format!(
                "surrounding sphere of radius {radius:.3} around ({:.2}, {:.2}, {:.2}) \
                 does not fit axis {a}; re-voxelize with more padding",
                center[0], center[1], center[2]
            )));
        }
    }

    let sphere = BinaryMask::from_fn(&geom, |v| dist(geom.world_of(v), center) <= radius);
    let outer = sphere.complement();
    let mut cfg = BoundaryConfig::from_masks(inner, outer, center, radius)?;
    cfg.growth_steps = growth_steps;
    Ok(cfg)
}

/// Result of [`solve_laplace`].
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceSolution {
    pub h: ScalarGrid,
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi relaxation of the harmonic interpolant between the boundaries.
///
/// The update is the general anisotropic 6-neighbor average weighted by the
/// squared cross-spacings; with isotropic spacing it reduces to the plain
/// neighbor mean. Interior voxels start at the midpoint of the boundary
/// values and iterate until the largest per-voxel change drops below `tol`.
pub fn solve_laplace(
    cfg: &BoundaryConfig,
    tol: f64,
    max_iters: usize,
) -> Result<LaplaceSolution> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let geom = *cfg.region.geom();
    let mut h = vec![0.0f64; geom.len()];
    for idx in 0..geom.len() {
        h[idx] = if cfg.outer.at(idx) {
            OUTER_VALUE
        } else if cfg.inner.at(idx) {
            INNER_VALUE
        } else {
            0.5 * (INNER_VALUE + OUTER_VALUE)
        };
    }
    let region: Vec<usize> = (0..geom.len()).filter(|&i| cfg.region.at(i)).collect();
    if region.is_empty() {
        let grid = ScalarGrid::from_values(geom.dims(), geom.spacing(), geom.origin(), h)?;
        return Ok(LaplaceSolution {
            h: grid,
            iterations: 0,
            residual: 0.0,
        });
    }
    let neighbors = neighbor_table(&geom, &region);
    let s = geom.spacing();
    let w = [
        s[1] * s[1] * s[2] * s[2],
        s[0] * s[0] * s[2] * s[2],
        s[0] * s[0] * s[1] * s[1],
    ];
    let denom = 2.0 * (w[0] + w[1] + w[2]);

    let mut next = h.clone();
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iters {
        let mut delta: f64 = 0.0;
        for (r, nb) in region.iter().zip(&neighbors) {
            let idx = *r;
            let val = (w[0] * (h[nb[0]] + h[nb[1]])
                + w[1] * (h[nb[2]] + h[nb[3]])
                + w[2] * (h[nb[4]] + h[nb[5]]))
                / denom;
            delta = delta.max((val - h[idx]).abs());
            next[idx] = val;
        }
        core::mem::swap(&mut h, &mut next);
        residual = delta;
        if delta < tol {
            let grid = ScalarGrid::from_values(geom.dims(), geom.spacing(), geom.origin(), h)?;
            return Ok(LaplaceSolution {
                h: grid,
                iterations: iter,
                residual,
            });
        }
    }
    let grid = ScalarGrid::from_values(geom.dims(), geom.spacing(), geom.origin(), h)?;
    Err(Error::NotConverged(Box::new(NotConverged {
        solver: "jacobi laplace relaxation",
        iterations: max_iters,
        residual,
        tolerance: tol,
        last: vec![grid],
    })))
}

/// Per-region-voxel linear indices of the 6 face neighbors, with out-of-grid
/// neighbors mirrored back inside (insulated grid walls).
fn neighbor_table(geom: &GridGeom, region: &[usize]) -> Vec<[usize; 6]> {
    let dims = geom.dims();
    region
        .iter()
        .map(|&idx| {
            let v = geom.coords(idx);
            let mut nb = [0usize; 6];
            for a in 0..3 {
                let mut lo = v;
                let mut hi = v;
                lo[a] = if v[a] == 0 { 1 } else { v[a] - 1 };
                hi[a] = if v[a] + 1 == dims[a] { dims[a] - 2 } else { v[a] + 1 };
                nb[2 * a] = geom.idx(lo);
                nb[2 * a + 1] = geom.idx(hi);
            }
            nb
        })
        .collect()
}

/// Unit tangent field of the harmonic interpolant with stagnation bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    pub components: [ScalarGrid; 3],
    /// Region voxels where the gradient norm fell at or below epsilon.
    pub stagnant: BinaryMask,
    pub stagnant_count: usize,
}

/// Normalized gradient of `h` inside `region`.
///
/// The gradient stencil reads `h` on the whole grid (boundary values drive
/// the rim voxels); normalization happens only inside the region. Voxels with
/// gradient norm at or below `eps` are flagged stagnant and get a zero
/// tangent; by the maximum principle these are discretization artifacts.
pub fn tangent_field(h: &ScalarGrid, region: &BinaryMask, eps: f64) -> Result<TangentField> {
    if h.geom() != region.geom() {
        return Err(Error::invalid("tangent field lattice mismatch"));
    }
    let geom = *h.geom();
    let everywhere = BinaryMask::from_fn(&geom, |_| true);
    let grad = h.gradient(&everywhere)?;
    let mut components = [
        ScalarGrid::like(&geom, 0.0),
        ScalarGrid::like(&geom, 0.0),
        ScalarGrid::like(&geom, 0.0),
    ];
    let mut stagnant = BinaryMask::like(&geom);
    let mut stagnant_count = 0usize;
    for idx in 0..geom.len() {
        if !region.at(idx) {
            continue;
        }
        let g = [grad[0].at(idx), grad[1].at(idx), grad[2].at(idx)];
        let n = libm::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
        let v = geom.coords(idx);
        if n > eps {
            for a in 0..3 {
                components[a].set(v, g[a] / n);
            }
        } else {
            stagnant.set(v, true);
            stagnant_count += 1;
        }
    }
    Ok(TangentField {
        components,
        stagnant,
        stagnant_count,
    })
}

/// Result of [`solve_lengths`].
#[derive(Debug, Clone, PartialEq)]
pub struct LengthSolution {
    /// Geodesic length to the inner boundary.
    pub l0: ScalarGrid,
    /// Geodesic length to the outer boundary.
    pub l1: ScalarGrid,
    /// Total geodesic length `l0 + l1` inside the region, 0 elsewhere.
    pub g: ScalarGrid,
    /// Full symmetric cycles executed (8 directional sweeps each).
    pub cycles: usize,
    pub sweeps: usize,
    pub residual: f64,
}

/// Upwind Gauss-Seidel integration of the paired geodesic-length transport
/// equations along the tangent field.
///
/// `l0` grows from the inner boundary along the tangent direction, `l1` from
/// the outer boundary against it; the upwind neighbor per axis is selected by
/// the sign of the tangent component and weighted by its magnitude over the
/// spacing. Each symmetric cycle runs all 8 axis sign orderings; iteration
/// stops when the largest value change in a cycle drops below `tol`.
///
/// Stagnant voxels bypass the transport update (so the denominator can never
/// vanish) and instead receive the largest defined neighbor value plus the
/// local spacing.
pub fn solve_lengths(
    tangent: &TangentField,
    cfg: &BoundaryConfig,
    tol: f64,
    max_cycles: usize,
) -> Result<LengthSolution> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let geom = *cfg.region.geom();
    if tangent.components[0].geom() != &geom {
        return Err(Error::invalid("tangent field lattice mismatch"));
    }
    let dims = geom.dims();
    let spacing = geom.spacing();
    let mut l0 = vec![0.0f64; geom.len()];
    let mut l1 = vec![0.0f64; geom.len()];
    let region_any = cfg.region.any();
    let mut residual = 0.0f64;
    let mut cycles = 0usize;
    let mut converged = !region_any;

    let strides = [1isize, dims[0] as isize, (dims[0] * dims[1]) as isize];

    for _ in 0..max_cycles {
        if converged {
            break;
        }
        cycles += 1;
        let mut cycle_delta: f64 = 0.0;
        for ord in 0..8usize {
            let rev = [ord & 1 != 0, ord & 2 != 0, ord & 4 != 0];
            for kk in 0..dims[2] {
                let k = if rev[2] { dims[2] - 1 - kk } else { kk };
                for jj in 0..dims[1] {
                    let j = if rev[1] { dims[1] - 1 - jj } else { jj };
                    for ii in 0..dims[0] {
                        let i = if rev[0] { dims[0] - 1 - ii } else { ii };
                        let v = [i, j, k];
                        let idx = geom.idx(v);
                        if !cfg.region.at(idx) {
                            continue;
                        }
                        if tangent.stagnant.at(idx) {
                            let d = stagnant_update(&geom, v, &l0, &l1, cfg, spacing);
                            if let Some((n0, n1)) = d {
                                cycle_delta = cycle_delta.max((n0 - l0[idx]).abs());
                                cycle_delta = cycle_delta.max((n1 - l1[idx]).abs());
                                l0[idx] = n0;
                                l1[idx] = n1;
                            }
                            continue;
                        }
                        let t = [
                            tangent.components[0].at(idx),
                            tangent.components[1].at(idx),
                            tangent.components[2].at(idx),
                        ];
                        let mut num0 = 1.0;
                        let mut den0 = 0.0;
                        let mut num1 = 1.0;
                        let mut den1 = 0.0;
                        for a in 0..3 {
                            if t[a] == 0.0 {
                                continue;
                            }
                            let w = t[a].abs() / spacing[a];
                            // Upwind neighbor for l0 sits against the tangent
                            // sign, downwind for l1 with it. Components whose
                            // neighbor leaves the grid or lands on the wrong
                            // boundary are dropped from both sums.
                            let delta: isize = if t[a] > 0.0 { -1 } else { 1 };
                            let c0 = v[a] as isize + delta;
                            if c0 >= 0 && (c0 as usize) < dims[a] {
                                let un = (idx as isize + delta * strides[a]) as usize;
                                if !cfg.outer.at(un) {
                                    num0 += w * l0[un];
                                    den0 += w;
                                }
                            }
                            let c1 = v[a] as isize - delta;
                            if c1 >= 0 && (c1 as usize) < dims[a] {
                                let dn = (idx as isize - delta * strides[a]) as usize;
                                if !cfg.inner.at(dn) {
                                    num1 += w * l1[dn];
                                    den1 += w;
                                }
                            }
                        }
                        if den0 > 0.0 {
                            let val = num0 / den0;
                            cycle_delta = cycle_delta.max((val - l0[idx]).abs());
                            l0[idx] = val;
                        }
                        if den1 > 0.0 {
                            let val = num1 / den1;
                            cycle_delta = cycle_delta.max((val - l1[idx]).abs());
                            l1[idx] = val;
                        }
                    }
                }
            }
        }
        residual = cycle_delta;
        if cycle_delta < tol {
            converged = true;
        }
    }

    let mut g = vec![0.0f64; geom.len()];
    for idx in 0..geom.len() {
        if cfg.region.at(idx) {
            g[idx] = l0[idx] + l1[idx];
        }
    }
    let make = |values: Vec<f64>| {
        ScalarGrid::from_values(geom.dims(), geom.spacing(), geom.origin(), values)
    };
    let (l0, l1, g) = (make(l0)?, make(l1)?, make(g)?);
    if !converged {
        return Err(Error::NotConverged(Box::new(NotConverged {
            solver: "symmetric gauss-seidel length transport",
            iterations: cycles,
            residual,
            tolerance: tol,
            last: vec![l0, l1],
        })));
    }
    Ok(LengthSolution {
        l0,
        l1,
        g,
        cycles,
        sweeps: cycles * 8,
        residual,
    })
}

/// Fallback for stagnant voxels: largest defined neighbor plus local spacing.
fn stagnant_update(
    geom: &GridGeom,
    v: [usize; 3],
    l0: &[f64],
    l1: &[f64],
    cfg: &BoundaryConfig,
    spacing: [f64; 3],
) -> Option<(f64, f64)> {
    let dims = geom.dims();
    let mut best0 = f64::NEG_INFINITY;
    let mut best1 = f64::NEG_INFINITY;
    for a in 0..3 {
        for d in [-1isize, 1] {
            let c = v[a] as isize + d;
            if c < 0 || c as usize >= dims[a] {
                continue;
            }
            let mut n = v;
            n[a] = c as usize;
            let nidx = geom.idx(n);
            if cfg.region.at(nidx) || cfg.inner.at(nidx) {
                best0 = best0.max(l0[nidx] + spacing[a]);
            }
            if cfg.region.at(nidx) || cfg.outer.at(nidx) {
                best1 = best1.max(l1[nidx] + spacing[a]);
            }
        }
    }
    if best0.is_finite() || best1.is_finite() {
        let v0 = if best0.is_finite() { best0 } else { 0.0 };
        let v1 = if best1.is_finite() { best1 } else { 0.0 };
        Some((v0, v1))
    } else {
        None
    }
}

/// Feature field: sphere radius over total geodesic length inside the region,
/// zero outside. Large values mark convex surface areas, small values concave
/// ones.
pub fn feature_field(cfg: &BoundaryConfig, g: &ScalarGrid) -> Result<ScalarGrid> {
    if g.geom() != cfg.region.geom() {
        return Err(Error::invalid("feature field lattice mismatch"));
    }
    let geom = *g.geom();
    let mut feat = vec![0.0f64; geom.len()];
    for idx in 0..geom.len() {
        if cfg.region.at(idx) {
            let gv = g.at(idx);
            if gv <= 0.0 {
                return Err(Error::NonPositiveG {
                    index: geom.coords(idx),
                    value: gv,
                });
            }
            feat[idx] = cfg.radius / gv;
        }
    }
    ScalarGrid::from_values(geom.dims(), geom.spacing(), geom.origin(), feat)
}

/// Per-point samples of the feature field.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSamples {
    /// One value per input point; NaN where the point was out of domain.
    pub values: Vec<f64>,
    /// Indices of points outside the grid's sampling domain.
    pub out_of_domain: Vec<usize>,
    /// Points that had to be projected to the nearest region voxel center,
    /// with the projection distance.
    pub projected: Vec<(usize, f64)>,
}

/// Sample the feature at surface points by trilinear interpolation restricted
/// to the solve region.
///
/// Points whose surrounding cell has no region corner (typically vertices
/// that ended up inside the eroded inner mask) are projected to the nearest
/// region voxel center and read there; the projection distance is reported.
/// Points outside the grid are collected, not fatal.
pub fn surface_feature(
    points: &[Vec3],
    feat: &ScalarGrid,
    cfg: &BoundaryConfig,
) -> Result<SurfaceSamples> {
    if feat.geom() != cfg.region.geom() {
        return Err(Error::invalid("surface feature lattice mismatch"));
    }
    let geom = *feat.geom();
    let mut values = Vec::with_capacity(points.len());
    let mut out_of_domain = Vec::new();
    let mut projected = Vec::new();
    for (pi, p) in points.iter().enumerate() {
        if !geom.in_sample_domain(*p) {
            out_of_domain.push(pi);
            values.push(f64::NAN);
            continue;
        }
        match feat.sample_trilinear_masked(&cfg.region, *p)? {
            Some(v) => values.push(v),
            None => match nearest_region_voxel(&geom, &cfg.region, *p) {
                Some((v, d)) => {
                    projected.push((pi, d));
                    values.push(feat.get(v));
                }
                None => {
                    out_of_domain.push(pi);
                    values.push(f64::NAN);
                }
            },
        }
    }
    Ok(SurfaceSamples {
        values,
        out_of_domain,
        projected,
    })
}

/// Nearest region voxel center by expanding breadth-first search from the
/// point's voxel; returns its coordinates and world distance.
fn nearest_region_voxel(
    geom: &GridGeom,
    region: &BinaryMask,
    p: Vec3,
) -> Option<([usize; 3], f64)> {
    let start = geom.voxel_of(p)?;
    let mut visited = BinaryMask::like(geom);
    let mut queue = VecDeque::new();
    visited.set(start, true);
    queue.push_back((start, 0usize));
    let mut best: Option<([usize; 3], f64)> = None;
    let min_spacing = geom
        .spacing()
        .iter()
        .fold(f64::INFINITY, |m, &s| m.min(s));
    while let Some((v, depth)) = queue.pop_front() {
        if let Some((_, bd)) = best {
            // Hop count is non-decreasing along the queue and bounds the
            // Euclidean distance from below by (depth - 1) * min_spacing, so
            // the search can stop once no frontier voxel can beat the best.
            if depth > 1 && (depth as f64 - 1.0) * min_spacing > bd {
                break;
            }
        }
        if region.get(v) {
            let d = dist(geom.world_of(v), p);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((v, d));
            }
            continue;
        }
        let [i, j, k] = [v[0] as isize, v[1] as isize, v[2] as isize];
        for n in [
            [i - 1, j, k],
            [i + 1, j, k],
            [i, j - 1, k],
            [i, j + 1, k],
            [i, j, k - 1],
            [i, j, k + 1],
        ] {
            if geom.contains(n) {
                let u = [n[0] as usize, n[1] as usize, n[2] as usize];
                if !visited.get(u) {
                    visited.set(u, true);
                    queue.push_back((u, depth + 1));
                }
            }
        }
    }
    best
}

/// Tuning knobs of the field pipeline with the documented defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerianParams {
    pub erosion_iters: usize,
    pub radius_scale: f64,
    pub laplace_tol: f64,
    pub laplace_max_iters: usize,
    pub length_tol: f64,
    pub length_max_cycles: usize,
    pub stagnant_eps: f64,
}

impl Default for EulerianParams {
    fn default() -> Self {
        EulerianParams {
            erosion_iters: 1,
            radius_scale: 0.8,
            laplace_tol: 0.5,
            laplace_max_iters: 5000,
            length_tol: 1e-3,
            length_max_cycles: 500,
            stagnant_eps: 1e-6,
        }
    }
}

/// All fields of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicFields {
    pub cfg: BoundaryConfig,
    pub h: ScalarGrid,
    pub tangent: TangentField,
    pub l0: ScalarGrid,
    pub l1: ScalarGrid,
    pub g: ScalarGrid,
    pub feat: ScalarGrid,
}

/// Solver diagnostics of one pipeline run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldReport {
    pub laplace_iterations: usize,
    pub laplace_residual: f64,
    pub length_cycles: usize,
    pub length_sweeps: usize,
    pub length_residual: f64,
    pub stagnant_count: usize,
    pub radius: f64,
    pub center: Vec3,
    pub growth_steps: u32,
}

/// Run boundaries, Laplace, tangent, lengths and feature in sequence.
pub fn compute_feature_fields(
    shape: &BinaryMask,
    params: &EulerianParams,
) -> Result<(GeodesicFields, FieldReport)> {
    let cfg = setup_boundaries(shape, params.erosion_iters, params.radius_scale)?;
    let lap = solve_laplace(&cfg, params.laplace_tol, params.laplace_max_iters)?;
    let tangent = tangent_field(&lap.h, cfg.region(), params.stagnant_eps)?;
    let lengths = solve_lengths(&tangent, &cfg, params.length_tol, params.length_max_cycles)?;
    let feat = feature_field(&cfg, &lengths.g)?;
    let report = FieldReport {
        laplace_iterations: lap.iterations,
        laplace_residual: lap.residual,
        length_cycles: lengths.cycles,
        length_sweeps: lengths.sweeps,
        length_residual: lengths.residual,
        stagnant_count: tangent.stagnant_count,
        radius: cfg.radius(),
        center: cfg.center(),
        growth_steps: cfg.growth_steps(),
    };
    Ok((
        GeodesicFields {
            cfg,
            h: lap.h,
            tangent,
            l0: lengths.l0,
            l1: lengths.l1,
            g: lengths.g,
            feat,
        },
        report,
    ))
}
