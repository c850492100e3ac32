//! Dense 3D voxel containers: scalar fields, binary occupancy masks,
//! morphology, gradients, trilinear sampling and point-cloud voxelization.
//!
//! Storage order is x-fastest throughout: `idx = i + nx * (j + ny * k)`.
//! World and index space are related affinely, `world = origin + index *
//! spacing`, where `origin` is the world position of the center of voxel
//! `(0, 0, 0)`.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math::Vec3;
use crate::Result;

/// Placement of a dense voxel lattice in world space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeom {
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
}

impl GridGeom {
    /// Every axis needs at least 3 voxels (room for one interior voxel) and
    /// positive, finite spacing.
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        for a in 0..3 {
            if dims[a] < 3 {
                return Err(Error::invalid(format!(
                    "dims must be >= 3 per axis, got {:?}",
                    dims
                )));
            }
            if !(spacing[a].is_finite() && spacing[a] > 0.0) {
                return Err(Error::invalid(format!(
                    "spacing must be positive and finite, got {:?}",
                    spacing
                )));
            }
            if !origin[a].is_finite() {
                return Err(Error::invalid("origin must be finite"));
            }
        }
        let len = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]));
        match len {
            Some(n) if n <= (1 << 33) => {}
            _ => return Err(Error::invalid(format!("dims overflow: {:?}", dims))),
        }
        Ok(GridGeom {
            dims,
            spacing,
            origin,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        false // dims >= 3 per axis by construction
    }

    /// Linear index, x-fastest.
    #[inline]
    pub fn idx(&self, v: [usize; 3]) -> usize {
        debug_assert!(v[0] < self.dims[0] && v[1] < self.dims[1] && v[2] < self.dims[2]);
        v[0] + self.dims[0] * (v[1] + self.dims[1] * v[2])
    }

    /// Inverse of [`GridGeom::idx`].
    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn contains(&self, v: [isize; 3]) -> bool {
        (0..3).all(|a| v[a] >= 0 && (v[a] as usize) < self.dims[a])
    }

    /// World position of a voxel center. Exact for integer indices.
    #[inline]
    pub fn world_of(&self, v: [usize; 3]) -> Vec3 {
        [
            self.origin[0] + v[0] as f64 * self.spacing[0],
            self.origin[1] + v[1] as f64 * self.spacing[1],
            self.origin[2] + v[2] as f64 * self.spacing[2],
        ]
    }

    /// Continuous index-space coordinates of a world point.
    #[inline]
    pub fn index_space(&self, p: Vec3) -> Vec3 {
        [
            (p[0] - self.origin[0]) / self.spacing[0],
            (p[1] - self.origin[1]) / self.spacing[1],
            (p[2] - self.origin[2]) / self.spacing[2],
        ]
    }

    /// Voxel whose cell contains the world point, or `None` outside the grid.
    pub fn voxel_of(&self, p: Vec3) -> Option<[usize; 3]> {
        let s = self.index_space(p);
        let mut v = [0usize; 3];
        for a in 0..3 {
            let r = libm::floor(s[a] + 0.5);
            if r < 0.0 || r >= self.dims[a] as f64 {
                return None;
            }
            v[a] = r as usize;
        }
        Some(v)
    }

    /// True when the point lies inside the hull of voxel centers, the domain
    /// of trilinear interpolation.
    pub fn in_sample_domain(&self, p: Vec3) -> bool {
        let s = self.index_space(p);
        (0..3).all(|a| s[a] >= 0.0 && s[a] <= (self.dims[a] - 1) as f64)
    }

    fn same_lattice(&self, other: &GridGeom) -> bool {
        self.dims == other.dims
    }
}

/// Dense 3D scalar field with grid placement metadata.
///
/// All stored values are finite after any public operation completes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    geom: GridGeom,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3], fill: f64) -> Result<Self> {
        if !fill.is_finite() {
            return Err(Error::invalid("fill value must be finite"));
        }
        let geom = GridGeom::new(dims, spacing, origin)?;
        let values = vec![fill; geom.len()];
        Ok(ScalarGrid { geom, values })
    }

    pub fn from_values(
        dims: [usize; 3],
        spacing: [f64; 3],
        origin: [f64; 3],
        values: Vec<f64>,
    ) -> Result<Self> {
        let geom = GridGeom::new(dims, spacing, origin)?;
        if values.len() != geom.len() {
            return Err(Error::invalid(format!(
                "expected {} values for dims {:?}, got {}",
                geom.len(),
                dims,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("scalar grid values must be finite"));
        }
        Ok(ScalarGrid { geom, values })
    }

    /// Same lattice and placement as `like`, constant fill.
    pub fn like(like: &GridGeom, fill: f64) -> Self {
        ScalarGrid {
            geom: *like,
            values: vec![fill; like.len()],
        }
    }

    pub fn geom(&self) -> &GridGeom {
        &self.geom
    }

    pub fn dims(&self) -> [usize; 3] {
        self.geom.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.geom.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.geom.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, v: [usize; 3]) -> f64 {
        self.values[self.geom.idx(v)]
    }

    #[inline]
    pub fn set(&mut self, v: [usize; 3], value: f64) {
        let idx = self.geom.idx(v);
        self.values[idx] = value;
    }

    #[inline]
    pub fn at(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// Gradient restricted to `region`: central differences over spacing where
    /// both axis neighbors stay in the region, one-sided where one leaves it,
    /// zero where both do. Voxels outside the region get zero vectors.
    pub fn gradient(&self, region: &BinaryMask) -> Result<[ScalarGrid; 3]> {
        if !self.geom.same_lattice(&region.geom) {
            return Err(Error::invalid("gradient region lattice mismatch"));
        }
        let mut out = [
            ScalarGrid::like(&self.geom, 0.0),
            ScalarGrid::like(&self.geom, 0.0),
            ScalarGrid::like(&self.geom, 0.0),
        ];
        let [nx, ny, nz] = self.geom.dims;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let v = [i, j, k];
                    if !region.get(v) {
                        continue;
                    }
                    let idx = self.geom.idx(v);
                    for a in 0..3 {
                        let mut lo = [v[0] as isize, v[1] as isize, v[2] as isize];
                        let mut hi = lo;
                        lo[a] -= 1;
                        hi[a] += 1;
                        let lo_ok = self.geom.contains(lo)
                            && region.get([lo[0] as usize, lo[1] as usize, lo[2] as usize]);
                        let hi_ok = self.geom.contains(hi)
                            && region.get([hi[0] as usize, hi[1] as usize, hi[2] as usize]);
                        let s = self.geom.spacing[a];
                        let g = match (lo_ok, hi_ok) {
                            (true, true) => {
                                let f_lo =
                                    self.get([lo[0] as usize, lo[1] as usize, lo[2] as usize]);
                                let f_hi =
                                    self.get([hi[0] as usize, hi[1] as usize, hi[2] as usize]);
                                (f_hi - f_lo) / (2.0 * s)
                            }
                            (true, false) => {
                                let f_lo =
                                    self.get([lo[0] as usize, lo[1] as usize, lo[2] as usize]);
                                (self.values[idx] - f_lo) / s
                            }
                            (false, true) => {
                                let f_hi =
                                    self.get([hi[0] as usize, hi[1] as usize, hi[2] as usize]);
                                (f_hi - self.values[idx]) / s
                            }
                            (false, false) => 0.0,
                        };
                        out[a].values[idx] = g;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Trilinear interpolation of the 8 voxel values surrounding `p`.
    pub fn sample_trilinear(&self, p: Vec3) -> Result<f64> {
        if !self.geom.in_sample_domain(p) {
            return Err(Error::OutOfDomain { point: p });
        }
        let (cell, frac) = self.sample_cell(p);
        let mut acc = 0.0;
        for (corner, w) in corner_weights(frac) {
            let v = [cell[0] + corner[0], cell[1] + corner[1], cell[2] + corner[2]];
            acc += w * self.get(v);
        }
        Ok(acc)
    }

    /// Trilinear interpolation over the corners that lie inside `region`,
    /// with the weights renormalized. `Ok(None)` when no corner is in the
    /// region.
    pub fn sample_trilinear_masked(&self, region: &BinaryMask, p: Vec3) -> Result<Option<f64>> {
        if !self.geom.same_lattice(&region.geom) {
            return Err(Error::invalid("sample region lattice mismatch"));
        }
        if !self.geom.in_sample_domain(p) {
            return Err(Error::OutOfDomain { point: p });
        }
        let (cell, frac) = self.sample_cell(p);
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for (corner, w) in corner_weights(frac) {
            let v = [cell[0] + corner[0], cell[1] + corner[1], cell[2] + corner[2]];
            if region.get(v) {
                acc += w * self.get(v);
                wsum += w;
            }
        }
        if wsum <= 1e-12 {
            return Ok(None);
        }
        Ok(Some(acc / wsum))
    }

    fn sample_cell(&self, p: Vec3) -> ([usize; 3], Vec3) {
        let s = self.geom.index_space(p);
        let mut cell = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let max_base = self.geom.dims[a] - 2;
            let base = libm::floor(s[a]).max(0.0) as usize;
            let base = base.min(max_base);
            cell[a] = base;
            frac[a] = (s[a] - base as f64).clamp(0.0, 1.0);
        }
        (cell, frac)
    }
}

fn corner_weights(frac: Vec3) -> impl Iterator<Item = ([usize; 3], f64)> {
    (0..8).map(move |c| {
        let corner = [c & 1, (c >> 1) & 1, (c >> 2) & 1];
        let mut w = 1.0;
        for a in 0..3 {
            w *= if corner[a] == 1 { frac[a] } else { 1.0 - frac[a] };
        }
        ([corner[0], corner[1], corner[2]], w)
    })
}

/// Dense 3D boolean occupancy grid with the same placement metadata as
/// [`ScalarGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    geom: GridGeom,
    occupancy: Vec<bool>,
}

impl BinaryMask {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        let geom = GridGeom::new(dims, spacing, origin)?;
        let occupancy = vec![false; geom.len()];
        Ok(BinaryMask { geom, occupancy })
    }

    pub fn from_occupancy(
        dims: [usize; 3],
        spacing: [f64; 3],
        origin: [f64; 3],
        occupancy: Vec<bool>,
    ) -> Result<Self> {
        let geom = GridGeom::new(dims, spacing, origin)?;
        if occupancy.len() != geom.len() {
            return Err(Error::invalid(format!(
                "expected {} occupancy flags for dims {:?}, got {}",
                geom.len(),
                dims,
                occupancy.len()
            )));
        }
        Ok(BinaryMask { geom, occupancy })
    }

    /// Empty mask on the same lattice as `like`.
    pub fn like(like: &GridGeom) -> Self {
        BinaryMask {
            geom: *like,
            occupancy: vec![false; like.len()],
        }
    }

    /// Occupancy decided per voxel from its grid coordinates.
    pub fn from_fn(geom: &GridGeom, mut f: impl FnMut([usize; 3]) -> bool) -> Self {
        let mut mask = BinaryMask::like(geom);
        let [nx, ny, nz] = geom.dims;
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let v = [i, j, k];
                    let idx = geom.idx(v);
                    mask.occupancy[idx] = f(v);
                }
            }
        }
        mask
    }

    pub fn geom(&self) -> &GridGeom {
        &self.geom
    }

    pub fn dims(&self) -> [usize; 3] {
        self.geom.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.geom.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.geom.origin
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    #[inline]
    pub fn get(&self, v: [usize; 3]) -> bool {
        self.occupancy[self.geom.idx(v)]
    }

    #[inline]
    pub fn at(&self, idx: usize) -> bool {
        self.occupancy[idx]
    }

    #[inline]
    pub fn set(&mut self, v: [usize; 3], value: bool) {
        let idx = self.geom.idx(v);
        self.occupancy[idx] = value;
    }

    pub fn count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.occupancy.iter().any(|&b| b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            geom: self.geom,
            occupancy: self.occupancy.iter().map(|&b| !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.geom.same_lattice(&other.geom)
            && self
                .occupancy
                .iter()
                .zip(&other.occupancy)
                .all(|(&a, &b)| !a || b)
    }

    /// Occupied voxel coordinates in storage order.
    pub fn iter_occupied(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(idx, _)| self.geom.coords(idx))
    }

    /// Morphological erosion with the 6-neighbor cross element. A voxel
    /// survives an iteration iff it and all face neighbors are occupied;
    /// out-of-grid neighbors count as unoccupied.
    pub fn erode_cross(&self, iterations: usize) -> Result<BinaryMask> {
        if !self.any() {
            return Err(Error::degenerate("cannot erode an empty mask"));
        }
        let out = self.erode_unchecked(iterations);
        if !out.any() {
            return Err(Error::degenerate(format!(
                "erosion with {iterations} iteration(s) emptied the mask; reduce iterations"
            )));
        }
        Ok(out)
    }

    pub(crate) fn erode_unchecked(&self, iterations: usize) -> BinaryMask {
        let mut cur = self.clone();
        for _ in 0..iterations {
            let mut next = BinaryMask::like(&self.geom);
            let [nx, ny, nz] = self.geom.dims;
            for k in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        let v = [i, j, k];
                        if !cur.get(v) {
                            continue;
                        }
                        let keep = face_neighbors(v).iter().all(|&n| {
                            cur.geom.contains(n)
                                && cur.get([n[0] as usize, n[1] as usize, n[2] as usize])
                        });
                        if keep {
                            next.set(v, true);
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }

    /// Morphological dilation with the cross element; growth past the grid
    /// boundary is clipped.
    pub fn dilate_cross(&self, iterations: usize) -> BinaryMask {
        let mut cur = self.clone();
        for _ in 0..iterations {
            let mut next = cur.clone();
            let [nx, ny, nz] = self.geom.dims;
            for k in 0..nz {
                for j in 0..ny {
                    for i in 0..nx {
                        let v = [i, j, k];
                        if !cur.get(v) {
                            continue;
                        }
                        for n in face_neighbors(v) {
                            if cur.geom.contains(n) {
                                next.set([n[0] as usize, n[1] as usize, n[2] as usize], true);
                            }
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }

    /// Fill every cavity not 6-connected to the grid boundary.
    pub fn fill_holes(&self) -> BinaryMask {
        let [nx, ny, nz] = self.geom.dims;
        let mut exterior = vec![false; self.geom.len()];
        let mut queue = VecDeque::new();
        let push = |v: [usize; 3], exterior: &mut Vec<bool>, queue: &mut VecDeque<[usize; 3]>| {
            let idx = self.geom.idx(v);
            if !self.occupancy[idx] && !exterior[idx] {
                exterior[idx] = true;
                queue.push_back(v);
            }
        };
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1 {
                        push([i, j, k], &mut exterior, &mut queue);
                    }
                }
            }
        }
        while let Some(v) = queue.pop_front() {
            for n in face_neighbors(v) {
                if self.geom.contains(n) {
                    push(
                        [n[0] as usize, n[1] as usize, n[2] as usize],
                        &mut exterior,
                        &mut queue,
                    );
                }
            }
        }
        BinaryMask {
            geom: self.geom,
            occupancy: exterior.iter().map(|&e| !e).collect(),
        }
    }

    /// Centroid of occupied voxel centers, in world coordinates.
    pub fn centroid(&self) -> Option<Vec3> {
        let mut acc = [0.0; 3];
        let mut n = 0usize;
        for v in self.iter_occupied() {
            let w = self.geom.world_of(v);
            for a in 0..3 {
                acc[a] += w[a];
            }
            n += 1;
        }
        if n == 0 {
            return None;
        }
        Some([acc[0] / n as f64, acc[1] / n as f64, acc[2] / n as f64])
    }
}

#[inline]
fn face_neighbors(v: [usize; 3]) -> [[isize; 3]; 6] {
    let [i, j, k] = [v[0] as isize, v[1] as isize, v[2] as isize];
    [
        [i - 1, j, k],
        [i + 1, j, k],
        [i, j - 1, k],
        [i, j + 1, k],
        [i, j, k - 1],
        [i, j, k + 1],
    ]
}

/// Rasterize a point cloud into a solid occupancy mask.
///
/// The grid covers the point bounding box inflated by `padding` voxels per
/// side. A voxel is occupied iff at least one point falls in its cell; a
/// morphological closing (`closing` iterations of cross dilation, then the
/// same number of erosions) bridges gaps between sparse surface samples, and
/// a 6-connected exterior flood fill turns the closed surface into a solid.
///
/// `closing` is the one density-sensitive knob of the pipeline: it must be
/// large enough that dilation bridges the largest point gap at this spacing.
pub fn voxelize(points: &[Vec3], spacing: f64, padding: usize, closing: usize) -> Result<BinaryMask> {
    if points.is_empty() {
        return Err(Error::invalid("cannot voxelize an empty point set"));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::invalid("voxel spacing must be positive"));
    }
    if padding < 1 {
        return Err(Error::invalid("padding must be at least 1 voxel"));
    }
    if padding <= closing {
        return Err(Error::invalid(
            "padding must exceed the closing radius so dilation stays off the grid boundary",
        ));
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        for a in 0..3 {
            if !p[a].is_finite() {
                return Err(Error::invalid("points must be finite"));
            }
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let mut dims = [0usize; 3];
    let mut origin = [0.0; 3];
    for a in 0..3 {
        let span = libm::floor((hi[a] - lo[a]) / spacing + 0.5) as usize;
        dims[a] = span + 1 + 2 * padding;
        origin[a] = lo[a] - padding as f64 * spacing;
    }
    let geom = GridGeom::new(dims, [spacing; 3], origin)?;
    let mut mask = BinaryMask::like(&geom);
    for p in points {
        let v = geom
            .voxel_of(*p)
            .expect("bounding box plus padding covers every input point");
        mask.set(v, true);
    }
    // Close and solidify: the exterior flood fill runs on the dilated mask,
    // where every gap the closing can bridge is sealed; eroding afterwards
    // shrinks the solid back to the sample surface. Filling after the erosion
    // instead would leak through pinholes that erosion re-opens on sparsely
    // sampled surfaces.
    let solid = if closing > 0 {
        mask.dilate_cross(closing)
            .fill_holes()
            .erode_unchecked(closing)
    } else {
        mask.fill_holes()
    };
    if !solid.any() {
        return Err(Error::degenerate("voxelization produced an empty mask"));
    }
    Ok(solid)
}
