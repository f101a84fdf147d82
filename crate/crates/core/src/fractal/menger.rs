use std::collections::HashSet;

use super::{colorize, Palette};
use crate::dataset::{Dataset, Dims, PointRecord};
use crate::error::{Error, Result};

/// Deepest recursion accepted; depth 6 already yields 64 million cubes.
pub const MAX_MENGER_DEPTH: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MengerParams {
    pub max_iterations: u32,
    pub cube_size: f64,
    /// Minimum corner of the root cube.
    pub origin: [f64; 3],
    /// Drop corner vertices shared by neighbouring cubes (exact bit matches only).
    pub dedup: bool,
}

impl Default for MengerParams {
    fn default() -> Self {
        MengerParams {
            max_iterations: 3,
            cube_size: 1.0,
            origin: [0.0; 3],
            dedup: false,
        }
    }
}

/// An axis-aligned cube given by its minimum corner and edge length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cube {
    pub min: [f64; 3],
    pub size: f64,
}

impl MengerParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations > MAX_MENGER_DEPTH {
            return Err(Error::Capacity(format!(
                "menger depth {} exceeds {MAX_MENGER_DEPTH} ({} cubes)",
                self.max_iterations,
                20u64.pow(self.max_iterations)
            )));
        }
        if !(self.cube_size > 0.0 && self.cube_size.is_finite()) {
            return Err(Error::Validation("cube_size must be positive".into()));
        }
        if self.origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("origin must be finite".into()));
        }
        Ok(())
    }
}

fn keep(i: usize, j: usize, k: usize) -> bool {
    !((i == 1 && j == 1) || (i == 1 && k == 1) || (j == 1 && k == 1))
}

fn subdivide(cube: Cube, depth: u32, max_depth: u32, out: &mut Vec<Cube>) {
    if depth == max_depth {
        out.push(cube);
        return;
    }
    let size = cube.size / 3.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                if keep(i, j, k) {
                    let min = [
                        cube.min[0] + i as f64 * size,
                        cube.min[1] + j as f64 * size,
                        cube.min[2] + k as f64 * size,
                    ];
                    subdivide(Cube { min, size }, depth + 1, max_depth, out);
                }
            }
        }
    }
}

/// Leaf cubes of the sponge in recursion order; there are `20^max_iterations`.
pub fn menger_cubes(p: &MengerParams) -> Result<Vec<Cube>> {
    p.validate()?;
    let mut cubes = Vec::with_capacity(20usize.pow(p.max_iterations));
    subdivide(
        Cube {
            min: p.origin,
            size: p.cube_size,
        },
        0,
        p.max_iterations,
        &mut cubes,
    );
    Ok(cubes)
}

/// The eight corners of every leaf cube (`8 * 20^n` points unless `dedup`).
pub fn menger_points(p: &MengerParams) -> Result<Dataset> {
    let cubes = menger_cubes(p)?;
    let mut points = Vec::with_capacity(cubes.len() * 8);
    let mut seen = HashSet::new();
    for c in &cubes {
        for corner in 0..8 {
            let offset = |bit: usize| {
                if corner & (4 >> bit) != 0 {
                    c.size
                } else {
                    0.0
                }
            };
            let v = [
                c.min[0] + offset(0),
                c.min[1] + offset(1),
                c.min[2] + offset(2),
            ];
            if p.dedup && !seen.insert(v.map(f64::to_bits)) {
                continue;
            }
            points.push(PointRecord::new_3d(v[0], v[1], v[2], [0.0; 3]));
        }
    }
    let dataset = Dataset::new(
        format!("menger_{}", points.len()),
        format!(
            "menger(iterations={}, size={}, origin={:?}, dedup={})",
            p.max_iterations, p.cube_size, p.origin, p.dedup
        ),
        Dims::Three,
        points,
    );
    colorize(&dataset, &Palette::default())
}
