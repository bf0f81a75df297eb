//! Small fixed-size vector and matrix helpers shared by the element-local
//! computations. Everything here is stack-allocated and branch-light; the
//! global sparse algebra lives in [`crate::sparse`].

/// 3-vector in physical space.
pub type Vec3 = [f64; 3];

/// Dense 3x3 matrix, row major.
pub type Mat3 = [[f64; 3]; 3];

/// Dense 4x4 matrix, row major.
pub type Mat4 = [[f64; 4]; 4];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn mat3_mul_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

/// Checks symmetry and positive definiteness via the leading principal
/// minors (Sylvester's criterion).
pub fn mat3_is_spd(m: &Mat3) -> bool {
    let sym_tol = 1e-12
        * m.iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()))
            .max(1.0);
    let symmetric = (m[0][1] - m[1][0]).abs() <= sym_tol
        && (m[0][2] - m[2][0]).abs() <= sym_tol
        && (m[1][2] - m[2][1]).abs() <= sym_tol;
    let d1 = m[0][0];
    let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let d3 = mat3_det(m);
    symmetric && d1 > 0.0 && d2 > 0.0 && d3 > 0.0
}

pub fn mat3_det(m: &Mat3) -> f64 {
    dot(m[0], cross(m[1], m[2]))
}

/// Inverse of a 3x3 matrix via the adjugate. Returns `None` when the
/// determinant vanishes.
pub fn mat3_inverse(m: &Mat3) -> Option<Mat3> {
    let det = mat3_det(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    let c0 = cross(m[1], m[2]);
    let c1 = cross(m[2], m[0]);
    let c2 = cross(m[0], m[1]);
    // Rows of the inverse are the cofactor columns scaled by 1/det.
    Some([
        [c0[0] * inv_det, c1[0] * inv_det, c2[0] * inv_det],
        [c0[1] * inv_det, c1[1] * inv_det, c2[1] * inv_det],
        [c0[2] * inv_det, c1[2] * inv_det, c2[2] * inv_det],
    ])
}

/// Solves a small dense system in place with partially pivoted Gaussian
/// elimination. `a` is row major with `n = b.len()` rows. Returns the index
/// of the first zero pivot on failure.
pub fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<(), usize> {
    let n = b.len();
    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_mag = a[k][k].abs();
        for i in (k + 1)..n {
            if a[i][k].abs() > pivot_mag {
                pivot_mag = a[i][k].abs();
                pivot_row = i;
            }
        }
        if pivot_mag == 0.0 || !pivot_mag.is_finite() {
            return Err(k);
        }
        if pivot_row != k {
            a.swap(k, pivot_row);
            b.swap(k, pivot_row);
        }
        let pivot = a[k][k];
        for i in (k + 1)..n {
            let factor = a[i][k] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= factor * a[k][j];
            }
            b[i] -= factor * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut sum = b[k];
        for j in (k + 1)..n {
            sum -= a[k][j] * b[j];
        }
        b[k] = sum / a[k][k];
    }
    Ok(())
}

/// Inverse of a 4x4 matrix by Gaussian elimination on [M | I].
pub fn mat4_inverse(m: &Mat4) -> Option<Mat4> {
    let mut aug = [[0.0f64; 8]; 4];
    for i in 0..4 {
        aug[i][..4].copy_from_slice(&m[i]);
        aug[i][4 + i] = 1.0;
    }
    for k in 0..4 {
        let mut pivot_row = k;
        let mut pivot_mag = aug[k][k].abs();
        for i in (k + 1)..4 {
            if aug[i][k].abs() > pivot_mag {
                pivot_mag = aug[i][k].abs();
                pivot_row = i;
            }
        }
        if pivot_mag == 0.0 || !pivot_mag.is_finite() {
            return None;
        }
        aug.swap(k, pivot_row);
        let pivot = aug[k][k];
        for j in 0..8 {
            aug[k][j] /= pivot;
        }
        for i in 0..4 {
            if i == k {
                continue;
            }
            let factor = aug[i][k];
            if factor == 0.0 {
                continue;
            }
            for j in 0..8 {
                aug[i][j] -= factor * aug[k][j];
            }
        }
    }
    let mut inv = [[0.0f64; 4]; 4];
    for i in 0..4 {
        inv[i].copy_from_slice(&aug[i][4..]);
    }
    Some(inv)
}

pub fn mat4_mul_vec(m: &Mat4, v: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2] + m[i][3] * v[3];
    }
    out
}
