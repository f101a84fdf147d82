use rayon::prelude::*;

use super::{colorize, lattice_axis, Palette};
use crate::dataset::{Dataset, Dims, PointRecord};
use crate::error::{Error, Result};

/// Quaternion with components ordered `(x, y, z, w)`; `w` is the scalar part.
pub type Quat = [f64; 4];

/// Hamilton product `a * b`.
pub fn quat_mul(a: Quat, b: Quat) -> Quat {
    let [ax, ay, az, aw] = a;
    let [bx, by, bz, bw] = b;
    [
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    ]
}

fn norm(q: Quat) -> f64 {
    (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JuliaParams {
    pub c: Quat,
    pub max_iter: u32,
    /// Escape bound on the quaternion norm.
    pub threshold: f64,
    /// Lattice samples per axis.
    pub resolution: usize,
    /// The lattice spans `[-extent, extent]` on each axis.
    pub extent: f64,
}

impl Default for JuliaParams {
    fn default() -> Self {
        JuliaParams {
            c: [-0.2, 0.6, 0.2, 0.2],
            max_iter: 32,
            threshold: 4.0,
            resolution: 64,
            extent: 1.5,
        }
    }
}

impl JuliaParams {
    pub fn validate(&self) -> Result<()> {
        if self.threshold.is_nan() || self.threshold <= 0.0 {
            return Err(Error::Validation("threshold must be positive".into()));
        }
        if self.resolution < 1 {
            return Err(Error::Validation("resolution must be at least 1".into()));
        }
        if !(self.extent >= 0.0 && self.extent.is_finite()) {
            return Err(Error::Validation(
                "extent must be finite and non-negative".into(),
            ));
        }
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("c must be finite".into()));
        }
        Ok(())
    }
}

/// Iterates `q <- q^2 + c` from `q = (x, y, z, 0)` while `n < max_iter` and
/// `|q| < threshold`. Returns `Some(n)` when the norm reached the threshold.
pub fn julia_escape(x: f64, y: f64, z: f64, p: &JuliaParams) -> Option<u32> {
    let mut q = [x, y, z, 0.0];
    let mut n = 0;
    while n < p.max_iter && norm(q) < p.threshold {
        let sq = quat_mul(q, q);
        q = [
            sq[0] + p.c[0],
            sq[1] + p.c[1],
            sq[2] + p.c[2],
            sq[3] + p.c[3],
        ];
        n += 1;
    }
    (norm(q) >= p.threshold).then_some(n)
}

/// Lattice points whose orbit escapes, each carrying its escape count.
pub fn julia_quat_points(p: &JuliaParams) -> Result<Dataset> {
    p.validate()?;
    let (lo, hi) = if p.resolution == 1 {
        (0.0, 0.0)
    } else {
        (-p.extent, p.extent)
    };
    let axis = lattice_axis(lo, hi, p.resolution);
    let slices: Vec<Vec<(PointRecord, u32)>> = axis
        .par_iter()
        .map(|&x| {
            let mut slice = Vec::new();
            for &y in &axis {
                for &z in &axis {
                    if let Some(n) = julia_escape(x, y, z, p) {
                        slice.push((PointRecord::new_3d(x, y, z, [0.0; 3]), n));
                    }
                }
            }
            slice
        })
        .collect();
    let (points, counts): (Vec<_>, Vec<_>) = slices.into_iter().flatten().unzip();
    let mut dataset = Dataset::new(
        format!("julia_{}", points.len()),
        format!(
            "julia(c={:?}, max_iter={}, threshold={}, resolution={}, extent={})",
            p.c, p.max_iter, p.threshold, p.resolution, p.extent
        ),
        Dims::Three,
        points,
    );
    dataset.escape_counts = Some(counts);
    if dataset.is_empty() {
        return Ok(dataset);
    }
    colorize(&dataset, &Palette::default())
}
