//! Baseline local eigenfeatures from the covariance of point neighborhoods:
//! anisotropy, omnivariance, linearity, planarity, sphericity and curvature,
//! computed per point from its k nearest neighbors.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{dist2, eigenvalues_sym3, Mat3, Vec3};
use crate::shapes::PointSet;
use crate::Result;

/// Sorted eigenvalues and the six derived features of one point.
///
/// Eigenvalues satisfy `0 <= l1 <= l2 <= l3`. When `l3 = 0` every ratio
/// feature is defined as 0 and `degenerate` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFeatures {
    pub lambda: [f64; 3],
    pub anisotropy: f64,
    pub omnivariance: f64,
    pub linearity: f64,
    pub planarity: f64,
    pub sphericity: f64,
    pub curvature: f64,
    pub degenerate: bool,
}

/// Exact k nearest neighbors of `points[p_index]` by Euclidean distance,
/// excluding the query point itself; ties broken by lower index.
///
/// A uniform-grid bucket index accelerates large inputs; small inputs fall
/// back to a brute-force scan. Both produce identical results.
pub fn knn(points: &PointSet, p_index: usize, k: usize) -> Result<Vec<usize>> {
    let n = points.len();
    if p_index >= n {
        return Err(Error::invalid(format!(
            "point index {p_index} out of {n}"
        )));
    }
    if k >= n {
        return Err(Error::invalid(format!(
            "k = {k} must be below the point count {n}"
        )));
    }
    if n < 1000 {
        return Ok(knn_brute(&points.points, p_index, k));
    }
    knn_bucketed(&points.points, p_index, k)
}

fn knn_brute(points: &[Vec3], p_index: usize, k: usize) -> Vec<usize> {
    let p = points[p_index];
    let mut order: Vec<usize> = (0..points.len()).filter(|&i| i != p_index).collect();
    order.sort_unstable_by(|&a, &b| {
        let da = dist2(points[a], p);
        let db = dist2(points[b], p);
        da.partial_cmp(&db)
            .expect("finite distances")
            .then(a.cmp(&b))
    });
    order.truncate(k);
    order
}

fn knn_bucketed(points: &[Vec3], p_index: usize, k: usize) -> Result<Vec<usize>> {
    let p = points[p_index];
    let mut lo = points[0];
    let mut hi = points[0];
    for q in points {
        for a in 0..3 {
            if !q[a].is_finite() {
                return Err(Error::invalid("points must be finite"));
            }
            lo[a] = lo[a].min(q[a]);
            hi[a] = hi[a].max(q[a]);
        }
    }
    // Aim for a few points per bucket.
    let n = points.len();
    let target = libm::cbrt(n as f64 / 2.0).max(1.0);
    let mut dims = [1usize; 3];
    let mut cell = [1.0f64; 3];
    for a in 0..3 {
        let extent = (hi[a] - lo[a]).max(1e-12);
        dims[a] = (target as usize).clamp(1, 64);
        cell[a] = extent / dims[a] as f64 * (1.0 + 1e-12);
    }
    let bucket_of = |q: Vec3| -> [usize; 3] {
        let mut b = [0usize; 3];
        for a in 0..3 {
            let t = ((q[a] - lo[a]) / cell[a]) as usize;
            b[a] = t.min(dims[a] - 1);
        }
        b
    };
    let bidx = |b: [usize; 3]| b[0] + dims[0] * (b[1] + dims[1] * b[2]);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); dims[0] * dims[1] * dims[2]];
    for (i, q) in points.iter().enumerate() {
        buckets[bidx(bucket_of(*q))].push(i);
    }
    // Expand rings of buckets until k candidates are guaranteed optimal: a
    // ring at Chebyshev distance r covers every point within r-1 cells, so
    // stop when the k-th best distance fits inside the covered radius.
    let home = bucket_of(p);
    let min_cell = cell[0].min(cell[1]).min(cell[2]);
    let mut cands: Vec<(f64, usize)> = Vec::new();
    let max_ring = dims[0].max(dims[1]).max(dims[2]);
    for ring in 0..=max_ring {
        let mut added = false;
        for bz in home[2].saturating_sub(ring)..=(home[2] + ring).min(dims[2] - 1) {
            for by in home[1].saturating_sub(ring)..=(home[1] + ring).min(dims[1] - 1) {
                for bx in home[0].saturating_sub(ring)..=(home[0] + ring).min(dims[0] - 1) {
                    let cheb = bx.abs_diff(home[0]).max(by.abs_diff(home[1])).max(bz.abs_diff(home[2]));
                    if cheb != ring {
                        continue;
                    }
                    added = true;
                    for &i in &buckets[bidx([bx, by, bz])] {
                        if i != p_index {
                            cands.push((dist2(points[i], p), i));
                        }
                    }
                }
            }
        }
        if cands.len() >= k {
            cands.sort_unstable_by(|a, b| {
                a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1))
            });
            let kth = libm::sqrt(cands[k - 1].0);
            let covered = ring as f64 * min_cell;
            if kth <= covered {
                break;
            }
        }
        if !added && cands.len() >= k {
            break;
        }
    }
    cands.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
    Ok(cands.into_iter().take(k).map(|(_, i)| i).collect())
}

/// Covariance of the selected neighbors around their centroid, with the 1/k
/// normalization. Symmetric positive semi-definite by construction.
pub fn local_covariance(points: &PointSet, neighbor_indices: &[usize]) -> Result<Mat3> {
    let k = neighbor_indices.len();
    if k < 3 {
        return Err(Error::invalid(format!(
            "local covariance needs at least 3 neighbors, got {k}"
        )));
    }
    let mut mean = [0.0; 3];
    for &i in neighbor_indices {
        let p = points
            .points
            .get(i)
            .ok_or_else(|| Error::invalid(format!("neighbor index {i} out of range")))?;
        for a in 0..3 {
            mean[a] += p[a];
        }
    }
    for m in &mut mean {
        *m /= k as f64;
    }
    let mut c = [[0.0; 3]; 3];
    for &i in neighbor_indices {
        let p = points.points[i];
        let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        for r in 0..3 {
            for s in 0..3 {
                c[r][s] += d[r] * d[s];
            }
        }
    }
    for row in &mut c {
        for v in row.iter_mut() {
            *v /= k as f64;
        }
    }
    Ok(c)
}

/// The six eigenfeatures of a symmetric positive semi-definite matrix.
///
/// Eigenvalues are clamped at zero and sorted ascending. Omnivariance is the
/// cube root of the eigenvalue product. With `l3 = 0` (all neighbors
/// coincident) the ratio features are defined as 0 and flagged degenerate.
pub fn eigenfeatures(c: &Mat3) -> Result<EigenFeatures> {
    let scale = c.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale.max(1.0);
    for r in 0..3 {
        for s in (r + 1)..3 {
            if (c[r][s] - c[s][r]).abs() > tol {
                return Err(Error::invalid("covariance matrix must be symmetric"));
            }
        }
    }
    let raw = eigenvalues_sym3(c);
    let lambda = [raw[0].max(0.0), raw[1].max(0.0), raw[2].max(0.0)];
    let [l1, l2, l3] = lambda;
    if l3 <= 0.0 {
        return Ok(EigenFeatures {
            lambda,
            anisotropy: 0.0,
            omnivariance: 0.0,
            linearity: 0.0,
            planarity: 0.0,
            sphericity: 0.0,
            curvature: 0.0,
            degenerate: true,
        });
    }
    let sum = l1 + l2 + l3;
    Ok(EigenFeatures {
        lambda,
        anisotropy: (l3 - l1) / l3,
        omnivariance: libm::cbrt(l1 * l2 * l3),
        linearity: (l3 - l2) / l3,
        planarity: (l2 - l1) / l3,
        sphericity: l1 / l3,
        curvature: l1 / sum,
        degenerate: false,
    })
}

/// Eigenfeatures for every point from its k nearest neighbors.
pub fn pointwise_features(points: &PointSet, k: usize) -> Result<Vec<EigenFeatures>> {
    if k < 3 {
        return Err(Error::invalid("k must be at least 3"));
    }
    if points.len() <= k {
        return Err(Error::invalid(format!(
            "need more than k = {k} points, got {}",
            points.len()
        )));
    }
    let mut out = Vec::with_capacity(points.len());
    for i in 0..points.len() {
        let nbrs = knn(points, i, k)?;
        let c = local_covariance(points, &nbrs)?;
        out.push(eigenfeatures(&c)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: Vec<Vec3>) -> PointSet {
        PointSet::new(v)
    }

    #[test]
    fn knn_collinear() {
        let set = pts(vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [3.0, 0.0, 0.0],
        ]);
        assert_eq!(knn(&set, 0, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn knn_tie_lower_index_wins() {
        let set = pts(vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
        ]);
        // Indices 1, 2, 3 all at distance 1; k = 2 keeps the two lowest.
        assert_eq!(knn(&set, 0, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn knn_k_too_large_rejected() {
        let set = pts(vec![[0.0; 3], [1.0, 0.0, 0.0]]);
        assert!(knn(&set, 0, 2).is_err());
    }

    #[test]
    fn knn_bucketed_matches_bruteforce() {
        // Deterministic pseudo-random cloud large enough to take the
        // bucketed path.
        let mut p = Vec::new();
        let mut s = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1200 {
            p.push([next() * 20.0, next() * 20.0, next() * 20.0]);
        }
        let set = pts(p.clone());
        for &i in &[0usize, 17, 311, 1199] {
            let fast = knn(&set, i, 6).unwrap();
            let slow = knn_brute(&p, i, 6);
            assert_eq!(fast, slow, "point {i}");
        }
    }

    #[test]
    fn covariance_identical_neighbors_zero() {
        let set = pts(vec![[2.0, 2.0, 2.0]; 4]);
        let c = local_covariance(&set, &[0, 1, 2, 3]).unwrap();
        assert_eq!(c, [[0.0; 3]; 3]);
    }

    #[test]
    fn covariance_axis_pair() {
        let set = pts(vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
        ]);
        let c = local_covariance(&set, &[0, 1, 2, 3]).unwrap();
        assert_eq!(c[0][0], 1.0);
        for r in 0..3 {
            for s in 0..3 {
                if (r, s) != (0, 0) {
                    assert_eq!(c[r][s], 0.0);
                }
            }
        }
    }

    #[test]
    fn covariance_matches_double_loop() {
        let data = vec![
            [0.3, 1.2, -0.7],
            [2.0, 0.1, 0.4],
            [-1.1, 0.8, 1.9],
            [0.6, -0.4, 0.2],
            [1.4, 1.1, -1.3],
        ];
        let set = pts(data.clone());
        let idx: Vec<usize> = (0..data.len()).collect();
        let c = local_covariance(&set, &idx).unwrap();
        // Independent summation order: accumulate E[xy] then subtract means.
        let k = data.len() as f64;
        let mut m = [0.0; 3];
        for p in &data {
            for a in 0..3 {
                m[a] += p[a] / k;
            }
        }
        for r in 0..3 {
            for s in 0..3 {
                let mut acc = 0.0;
                for p in &data {
                    acc += (p[r] - m[r]) * (p[s] - m[s]);
                }
                assert!((c[r][s] - acc / k).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn covariance_too_few_neighbors() {
        let set = pts(vec![[0.0; 3], [1.0, 0.0, 0.0]]);
        assert!(local_covariance(&set, &[0, 1]).is_err());
    }

    #[test]
    fn eigenfeature_limit_cases_exact() {
        // Plane limit.
        let f = eigenfeatures(&[[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(f.planarity, 1.0);
        assert_eq!(f.linearity, 0.0);
        assert_eq!(f.sphericity, 0.0);
        assert_eq!(f.curvature, 0.0);
        // Line limit.
        let f = eigenfeatures(&[[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(f.linearity, 1.0);
        assert_eq!(f.anisotropy, 1.0);
        // Isotropic limit.
        let f = eigenfeatures(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(f.sphericity, 1.0);
        assert_eq!(f.anisotropy, 0.0);
        assert_eq!(f.curvature, 1.0 / 3.0);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let m = [[1.0, 0.5, 0.0], [0.2, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(eigenfeatures(&m).is_err());
    }

    #[test]
    fn zero_matrix_degenerate() {
        let f = eigenfeatures(&[[0.0; 3]; 3]).unwrap();
        assert!(f.degenerate);
        assert_eq!(f.curvature, 0.0);
    }

    #[test]
    fn plane_patch_curvature_zero() {
        let mut v = Vec::new();
        for x in 0..6 {
            for y in 0..6 {
                v.push([x as f64, y as f64, 0.0]);
            }
        }
        let set = pts(v);
        let feats = pointwise_features(&set, 4).unwrap();
        for f in feats {
            assert!(f.curvature.abs() < 1e-12);
        }
    }

    #[test]
    fn curved_cloud_positive_curvature() {
        // Well-spread sphere sampling (spiral lattice): local neighborhoods
        // are genuinely curved patches, so curvature is strictly positive
        // everywhere. A lat/long grid would not do here: its rings are
        // coplanar circles whose neighborhoods are degenerate.
        let n = 400;
        let golden = core::f64::consts::PI * (3.0 - libm::sqrt(5.0));
        let mut v = Vec::new();
        for i in 0..n {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = libm::sqrt(1.0 - z * z);
            let ph = golden * i as f64;
            v.push([r * libm::cos(ph), r * libm::sin(ph), z]);
        }
        let set = pts(v);
        let feats = pointwise_features(&set, 8).unwrap();
        assert!(feats.iter().all(|f| f.curvature > 0.0));
    }

    fn rotate_z(p: Vec3, angle: f64) -> Vec3 {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]]
    }

    proptest! {
        #[test]
        fn lps_identity_and_invariances(
            seed in proptest::collection::vec(-3.0f64..3.0, 12),
            angle in 0.0f64..6.28,
            shift in proptest::collection::vec(-10.0f64..10.0, 3),
            s in 0.1f64..4.0,
        ) {
            let base: Vec<Vec3> = seed.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
            let set = pts(base.clone());
            let idx: Vec<usize> = (0..base.len()).collect();
            let c = local_covariance(&set, &idx).unwrap();
            let f = eigenfeatures(&c).unwrap();
            if !f.degenerate {
                prop_assert!((f.linearity + f.planarity + f.sphericity - 1.0).abs() < 1e-9);
            }
            // Rigid motion: rotate + translate all points.
            let moved: Vec<Vec3> = base
                .iter()
                .map(|p| {
                    let r = rotate_z(*p, angle);
                    [r[0] + shift[0], r[1] + shift[1], r[2] + shift[2]]
                })
                .collect();
            let fm = eigenfeatures(&local_covariance(&pts(moved), &idx).unwrap()).unwrap();
            let scale_ref = f.lambda[2].max(1e-12);
            for a in 0..3 {
                prop_assert!((f.lambda[a] - fm.lambda[a]).abs() < 1e-9 * scale_ref.max(1.0));
            }
            // Uniform scaling: eigenvalues scale by s^2, ratios invariant.
            let scaled: Vec<Vec3> = base.iter().map(|p| [p[0] * s, p[1] * s, p[2] * s]).collect();
            let fs = eigenfeatures(&local_covariance(&pts(scaled), &idx).unwrap()).unwrap();
            if !f.degenerate && !fs.degenerate {
                prop_assert!((fs.curvature - f.curvature).abs() < 1e-7);
                prop_assert!((fs.omnivariance - s * s * f.omnivariance).abs() < 1e-7 * (1.0 + f.omnivariance * s * s));
            }
        }
    }
}
