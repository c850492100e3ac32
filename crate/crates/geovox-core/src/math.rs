//! Fixed-size vector and symmetric-matrix helpers shared across modules.

pub type Vec3 = [f64; 3];

/// Row-major 3x3 matrix.
pub type Mat3 = [[f64; 3]; 3];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm2(a: Vec3) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    libm::sqrt(norm2(a))
}

#[inline]
pub fn dist2(a: Vec3, b: Vec3) -> f64 {
    norm2(sub(a, b))
}

#[inline]
pub fn dist(a: Vec3, b: Vec3) -> f64 {
    libm::sqrt(dist2(a, b))
}

#[inline]
pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

/// Eigenvalues of a symmetric 3x3 matrix, ascending.
///
/// Closed-form trigonometric solve. An exactly diagonal matrix short-circuits
/// to its diagonal entries, so limit cases come out exact.
pub fn eigenvalues_sym3(m: &Mat3) -> [f64; 3] {
    let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    let mut eig = if off == 0.0 {
        [m[0][0], m[1][1], m[2][2]]
    } else {
        let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        let p2 = (m[0][0] - q) * (m[0][0] - q)
            + (m[1][1] - q) * (m[1][1] - q)
            + (m[2][2] - q) * (m[2][2] - q)
            + 2.0 * off;
        let p = libm::sqrt(p2 / 6.0);
        let mut b = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                b[r][c] = (m[r][c] - if r == c { q } else { 0.0 }) / p;
            }
        }
        let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let r = (det_b / 2.0).clamp(-1.0, 1.0);
        let phi = libm::acos(r) / 3.0;
        let hi = q + 2.0 * p * libm::cos(phi);
        let lo = q + 2.0 * p * libm::cos(phi + 2.0 * core::f64::consts::PI / 3.0);
        [lo, 3.0 * q - lo - hi, hi]
    };
    eig.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    eig
}

/// Unit eigenvector for the given eigenvalue of a symmetric 3x3 matrix.
///
/// Uses the largest cross product of rows of `m - lambda I`. For (near-)
/// degenerate eigenvalues any vector of the eigenspace is acceptable; the
/// fallback for a vanishing cross product is deterministic.
pub fn eigenvector_sym3(m: &Mat3, lambda: f64) -> Vec3 {
    let r0 = [m[0][0] - lambda, m[0][1], m[0][2]];
    let r1 = [m[1][0], m[1][1] - lambda, m[1][2]];
    let r2 = [m[2][0], m[2][1], m[2][2] - lambda];
    let candidates = [cross(r0, r1), cross(r0, r2), cross(r1, r2)];
    let mut best = candidates[0];
    let mut best_n = norm2(best);
    for c in &candidates[1..] {
        let n = norm2(*c);
        if n > best_n {
            best = *c;
            best_n = n;
        }
    }
    if best_n <= f64::MIN_POSITIVE {
        return [1.0, 0.0, 0.0];
    }
    scale(best, 1.0 / libm::sqrt(best_n))
}
