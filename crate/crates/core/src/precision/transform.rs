use std::ops::Mul;

use crate::dataset::PointRecord;
use crate::df64::Df64;
use crate::error::{Error, Result};
use crate::Precision;

/// Row-major 4x4 matrix acting on column vectors (`m[row][col]`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const IDENTITY: Mat4 = Mat4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    pub fn translation(t: [f64; 3]) -> Mat4 {
        let mut m = Mat4::IDENTITY;
        for (row, v) in t.into_iter().enumerate() {
            m.0[row][3] = v;
        }
        m
    }

    pub fn scale(s: [f64; 3]) -> Mat4 {
        let mut m = Mat4::IDENTITY;
        for (k, v) in s.into_iter().enumerate() {
            m.0[k][k] = v;
        }
        m
    }

    /// Right-handed perspective projection for Vulkan clip space: depth in
    /// `[0, 1]` and `y` pointing down.
    pub fn perspective(fovy: f64, aspect: f64, near: f64, far: f64) -> Mat4 {
        let f = 1.0 / (fovy / 2.0).tan();
        Mat4([
            [f / aspect, 0.0, 0.0, 0.0],
            [0.0, -f, 0.0, 0.0],
            [0.0, 0.0, far / (near - far), near * far / (near - far)],
            [0.0, 0.0, -1.0, 0.0],
        ])
    }

    /// Right-handed view matrix looking from `eye` towards `target`.
    pub fn look_at(eye: [f64; 3], target: [f64; 3], up: [f64; 3]) -> Mat4 {
        let f = normalize(sub(target, eye));
        let s = normalize(cross(f, up));
        let u = cross(s, f);
        Mat4([
            [s[0], s[1], s[2], -dot(s, eye)],
            [u[0], u[1], u[2], -dot(u, eye)],
            [-f[0], -f[1], -f[2], dot(f, eye)],
            [0.0, 0.0, 0.0, 1.0],
        ])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Column-major copy, the layout GLSL `mat4` push constants expect.
    pub fn to_cols_f32(&self) -> [f32; 16] {
        std::array::from_fn(|i| self.0[i % 4][i / 4] as f32)
    }

    /// Column-major copy for `dmat4` push constants.
    pub fn to_cols_f64(&self) -> [f64; 16] {
        std::array::from_fn(|i| self.0[i % 4][i / 4])
    }
}

impl Mul for Mat4 {
    type Output = Mat4;

    fn mul(self, rhs: Mat4) -> Mat4 {
        Mat4(std::array::from_fn(|r| {
            std::array::from_fn(|c| (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum())
        }))
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// An MVP matrix plus the viewport it maps onto. The binary32 and df64 copies
/// of the matrix are derived once here, as a GPU path uploads them once per
/// frame.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformStack {
    mvp: Mat4,
    viewport: (u32, u32),
    mvp32: [[f32; 4]; 4],
    mvp_df: Option<[[Df64; 4]; 4]>,
}

impl TransformStack {
    pub fn new(mvp: Mat4, viewport: (u32, u32)) -> Result<Self> {
        if !mvp.is_finite() {
            return Err(Error::Validation("mvp entries must be finite".into()));
        }
        if viewport.0 == 0 || viewport.1 == 0 {
            return Err(Error::Validation(format!(
                "viewport must be positive, got {}x{}",
                viewport.0, viewport.1
            )));
        }
        let mvp_df = split_matrix(&mvp).ok();
        Ok(TransformStack {
            mvp,
            viewport,
            mvp32: mvp.0.map(|row| row.map(|v| v as f32)),
            mvp_df,
        })
    }

    pub fn identity(viewport: (u32, u32)) -> Result<Self> {
        TransformStack::new(Mat4::IDENTITY, viewport)
    }

    /// Translation by `(offset, offset, 0)`: points near the origin land
    /// where binary32 spacing is coarse relative to their detail.
    pub fn far_translated(offset: f64, viewport: (u32, u32)) -> Result<Self> {
        TransformStack::new(Mat4::translation([offset, offset, 0.0]), viewport)
    }

    pub fn mvp(&self) -> &Mat4 {
        &self.mvp
    }

    pub fn viewport(&self) -> (u32, u32) {
        self.viewport
    }
}

fn split_matrix(m: &Mat4) -> Result<[[Df64; 4]; 4]> {
    let mut out = [[Df64::ZERO; 4]; 4];
    for (r, row) in m.0.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            out[r][c] = Df64::split(v)?;
        }
    }
    Ok(out)
}

/// Clip-space image of `p` (with `w = 1`) under the stack's MVP, evaluated in
/// `precision` and widened to binary64. Every row is accumulated as
/// `((m0*x + m1*y) + m2*z) + m3`.
pub fn transform_point(
    p: &PointRecord,
    t: &TransformStack,
    precision: Precision,
) -> Result<[f64; 4]> {
    let [x, y, z] = p.coords;
    match precision {
        Precision::Binary64 => {
            let m = &t.mvp.0;
            Ok(std::array::from_fn(|r| {
                m[r][0] * x + m[r][1] * y + m[r][2] * z + m[r][3]
            }))
        }
        Precision::Binary32 => {
            let m = &t.mvp32;
            let (x, y, z) = (x as f32, y as f32, z as f32);
            Ok(std::array::from_fn(|r| {
                (m[r][0] * x + m[r][1] * y + m[r][2] * z + m[r][3]) as f64
            }))
        }
        Precision::Df64 => {
            let m = match &t.mvp_df {
                Some(m) => m,
                None => {
                    return Err(split_matrix(&t.mvp)
                        .err()
                        .unwrap_or(Error::Range("mvp".into())))
                }
            };
            let v = [Df64::split(x)?, Df64::split(y)?, Df64::split(z)?];
            let mut out = [0.0; 4];
            for (r, row) in m.iter().enumerate() {
                let mut acc = row[0].checked_mul(v[0])?;
                acc = acc.checked_add(row[1].checked_mul(v[1])?)?;
                acc = acc.checked_add(row[2].checked_mul(v[2])?)?;
                acc = acc.checked_add(row[3])?;
                out[r] = acc.to_f64();
            }
            Ok(out)
        }
    }
}
