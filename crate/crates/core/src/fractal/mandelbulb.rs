use rayon::prelude::*;

use super::{colorize, lattice_axis, Palette};
use crate::dataset::{Dataset, Dims, PointRecord};
use crate::error::{Error, Result};

/// Axis-aligned box `[min, max]` per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds3 {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Bounds3 {
    pub fn cube(half: f64) -> Self {
        Bounds3 {
            min: [-half; 3],
            max: [half; 3],
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MandelbulbParams {
    pub max_iterations: u32,
    /// Threshold on the squared radius.
    pub bailout: f64,
    pub power: f64,
    /// Lattice samples per axis.
    pub resolution: usize,
    pub bounds: Bounds3,
}

impl Default for MandelbulbParams {
    fn default() -> Self {
        MandelbulbParams {
            max_iterations: 12,
            bailout: 4.0,
            power: 8.0,
            resolution: 64,
            bounds: Bounds3::cube(1.2),
        }
    }
}

impl MandelbulbParams {
    pub fn validate(&self) -> Result<()> {
        if self.bailout.is_nan() || self.bailout <= 0.0 {
            return Err(Error::Validation("bailout must be positive".into()));
        }
        if self.resolution < 2 {
            return Err(Error::Validation("resolution must be at least 2".into()));
        }
        if !self.power.is_finite() {
            return Err(Error::Validation("power must be finite".into()));
        }
        if (0..3).any(|k| {
            self.bounds.min[k].partial_cmp(&self.bounds.max[k]) != Some(std::cmp::Ordering::Less)
        }) {
            return Err(Error::Validation(
                "bounds must satisfy min < max on every axis".into(),
            ));
        }
        Ok(())
    }
}

/// Runs the spherical-coordinate power map from `(x, y, z)` and returns the
/// number of iterations completed before the squared radius reached the
/// bailout. A point belongs to the bulb when this equals `max_iterations`.
pub fn mandelbulb_iterations(x: f64, y: f64, z: f64, p: &MandelbulbParams) -> u32 {
    let (mut zx, mut zy, mut zz) = (x, y, z);
    let mut iteration = 0;
    while iteration < p.max_iterations && zx * zx + zy * zy + zz * zz < p.bailout {
        let r = (zx * zx + zy * zy + zz * zz).sqrt();
        let theta = (zx * zx + zy * zy).sqrt().atan2(zz);
        let phi = zy.atan2(zx);
        let new_r = r.powf(p.power);
        let new_theta = theta * p.power;
        let new_phi = phi * p.power;
        zx = new_r * new_theta.sin() * new_phi.cos() + x;
        zy = new_r * new_theta.sin() * new_phi.sin() + y;
        zz = new_r * new_theta.cos() + z;
        iteration += 1;
    }
    iteration
}

/// Every lattice point of the bulb, in lattice order (x outermost, z innermost).
pub fn mandelbulb_points(p: &MandelbulbParams) -> Result<Dataset> {
    p.validate()?;
    let b = &p.bounds;
    let xs = lattice_axis(b.min[0], b.max[0], p.resolution);
    let ys = lattice_axis(b.min[1], b.max[1], p.resolution);
    let zs = lattice_axis(b.min[2], b.max[2], p.resolution);
    let slices: Vec<Vec<PointRecord>> = xs
        .par_iter()
        .map(|&x| {
            let mut slice = Vec::new();
            for &y in &ys {
                for &z in &zs {
                    if mandelbulb_iterations(x, y, z, p) == p.max_iterations {
                        slice.push(PointRecord::new_3d(x, y, z, [0.0; 3]));
                    }
                }
            }
            slice
        })
        .collect();
    let points: Vec<PointRecord> = slices.into_iter().flatten().collect();
    let dataset = Dataset::new(
        format!("mandelbulb_{}", points.len()),
        format!(
            "mandelbulb(power={}, bailout={}, max_iterations={}, resolution={})",
            p.power, p.bailout, p.max_iterations, p.resolution
        ),
        Dims::Three,
        points,
    );
    if dataset.is_empty() {
        return Ok(dataset);
    }
    colorize(&dataset, &Palette::default())
}
