//! Fixed-size 4x4 helpers for the state-space recursions.
//!
//! The state dimension is pinned at 4, so plain arrays beat a general matrix
//! library here: everything unrolls, nothing allocates.

pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

pub const ZERO_VEC: Vec4 = [0.0; 4];
pub const ZERO_MAT: Mat4 = [[0.0; 4]; 4];

pub fn identity() -> Mat4 {
    let mut m = ZERO_MAT;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn mat_vec(a: &Mat4, x: &Vec4) -> Vec4 {
    let mut y = ZERO_VEC;
    for i in 0..4 {
        y[i] = a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2] + a[i][3] * x[3];
    }
    y
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = ZERO_MAT;
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j] + a[i][3] * b[3][j];
        }
    }
    c
}

/// a * b^T without materializing the transpose.
pub fn mat_mul_t(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = ZERO_MAT;
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = a[i][0] * b[j][0] + a[i][1] * b[j][1] + a[i][2] * b[j][2] + a[i][3] * b[j][3];
        }
    }
    c
}

pub fn outer(x: &Vec4, y: &Vec4) -> Mat4 {
    let mut m = ZERO_MAT;
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = x[i] * y[j];
        }
    }
    m
}

/// acc += s * m
pub fn add_scaled(acc: &mut Mat4, m: &Mat4, s: f64) {
    for i in 0..4 {
        for j in 0..4 {
            acc[i][j] += s * m[i][j];
        }
    }
}

pub fn add_scaled_vec(acc: &mut Vec4, v: &Vec4, s: f64) {
    for i in 0..4 {
        acc[i] += s * v[i];
    }
}

/// Left-to-right sum of the entries; the all-ones output map applied to a state vector.
pub fn sum_entries(x: &Vec4) -> f64 {
    x[0] + x[1] + x[2] + x[3]
}

/// ones^T * m * ones: sum of all 16 entries, row-major.
pub fn sum_all(m: &Mat4) -> f64 {
    let mut s = 0.0;
    for row in m {
        for v in row {
            s += v;
        }
    }
    s
}
