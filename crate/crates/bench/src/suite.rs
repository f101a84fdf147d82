//! The nine 3D benchmark datasets, generated to fixed vertex counts.
//!
//! Each entry is produced by the smallest generator setting that reaches its
//! vertex count, then thinned to exactly that count by an even stride over the
//! generator's output order. `scale` shrinks every count for quick runs.

use dualprec::fractal::{
    colorize, julia_quat_points, mandelbulb_points, menger_cubes, sierpinski_points, JuliaParams,
    MandelbulbParams, MengerParams, Palette, SierpinskiParams, MAX_MENGER_DEPTH,
    MAX_SIERPINSKI_DEPTH,
};
use dualprec::{Dataset, Dims, Error, PointRecord};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteKind {
    Mandelbulb,
    Menger,
    Sierpinski,
    Julia,
}

impl SuiteKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteKind::Mandelbulb => "mandelbulb",
            SuiteKind::Menger => "menger",
            SuiteKind::Sierpinski => "sierpinski",
            SuiteKind::Julia => "julia",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteEntry {
    pub kind: SuiteKind,
    pub vertices: u64,
}

/// Benchmark order, smallest first.
pub const SUITE: [SuiteEntry; 9] = [
    SuiteEntry {
        kind: SuiteKind::Mandelbulb,
        vertices: 200_000,
    },
    SuiteEntry {
        kind: SuiteKind::Menger,
        vertices: 200_000,
    },
    SuiteEntry {
        kind: SuiteKind::Sierpinski,
        vertices: 1_048_576,
    },
    SuiteEntry {
        kind: SuiteKind::Julia,
        vertices: 1_400_000,
    },
    SuiteEntry {
        kind: SuiteKind::Menger,
        vertices: 1_850_000,
    },
    SuiteEntry {
        kind: SuiteKind::Mandelbulb,
        vertices: 2_000_000,
    },
    SuiteEntry {
        kind: SuiteKind::Menger,
        vertices: 5_000_000,
    },
    SuiteEntry {
        kind: SuiteKind::Menger,
        vertices: 11_900_000,
    },
    SuiteEntry {
        kind: SuiteKind::Sierpinski,
        vertices: 16_777_216,
    },
];

impl SuiteEntry {
    /// Vertex count after scaling; never below 8.
    pub fn target(&self, scale: f64) -> usize {
        ((self.vertices as f64 * scale).round() as usize).max(8)
    }
}

/// Index of the `j`-th kept element when keeping `target` of `total`.
fn stride_index(j: usize, total: usize, target: usize) -> usize {
    (j as u128 * total as u128 / target as u128) as usize
}

/// Keeps exactly `target` points spread evenly over `d`.
pub fn thin(d: Dataset, target: usize) -> Dataset {
    let total = d.len();
    if target >= total {
        return d;
    }
    let pick = |j| stride_index(j, total, target);
    let points = (0..target).map(|j| d.points[pick(j)]).collect();
    let counts = d
        .escape_counts
        .as_ref()
        .map(|c| (0..target).map(|j| c[pick(j)]).collect());
    let mut out = Dataset::new(
        d.name.clone(),
        format!("{}, thinned {total} -> {target}", d.source),
        d.dims,
        points,
    );
    out.escape_counts = counts;
    out
}

/// Smallest lattice whose output reaches `target`, assuming output grows with
/// the cube of the resolution.
fn lattice_to_target(
    target: usize,
    mut generate: impl FnMut(usize) -> dualprec::Result<Dataset>,
) -> Result<Dataset> {
    let mut res = 16usize;
    loop {
        let d = generate(res)?;
        if d.len() >= target {
            return Ok(d);
        }
        let growth = if d.is_empty() {
            2.0
        } else {
            (target as f64 / d.len() as f64).cbrt() * 1.02
        };
        res = ((res as f64 * growth.max(1.05)).ceil() as usize).max(res + 1);
        if res > 4096 {
            return Err(CliError::Core(Error::Capacity(format!(
                "no lattice up to 4096^3 yields {target} points"
            ))));
        }
    }
}

fn menger_to_target(target: usize) -> Result<Dataset> {
    let depth = (0..=MAX_MENGER_DEPTH)
        .find(|&d| 8 * 20usize.pow(d) >= target)
        .ok_or_else(|| {
            CliError::Core(Error::Capacity(format!(
                "menger cannot reach {target} points"
            )))
        })?;
    let p = MengerParams {
        max_iterations: depth,
        ..Default::default()
    };
    let cubes = menger_cubes(&p)?;
    let total = cubes.len() * 8;
    // corners in the same order as the full point set, without materializing it
    let points = (0..target.min(total))
        .map(|j| {
            let i = stride_index(j, total, target.min(total));
            let (c, corner) = (&cubes[i / 8], i % 8);
            let offset = |bit: usize| {
                if corner & (4 >> bit) != 0 {
                    c.size
                } else {
                    0.0
                }
            };
            PointRecord::new_3d(
                c.min[0] + offset(0),
                c.min[1] + offset(1),
                c.min[2] + offset(2),
                [0.0; 3],
            )
        })
        .collect();
    let d = Dataset::new(
        "menger",
        format!("menger(iterations={depth}, size=1), thinned {total} -> {target}"),
        Dims::Three,
        points,
    );
    Ok(colorize(&d, &Palette::default())?)
}

fn sierpinski_to_target(target: usize) -> Result<Dataset> {
    let n = (0..=MAX_SIERPINSKI_DEPTH)
        .find(|&n| 4usize.pow(n + 1) >= target)
        .ok_or_else(|| {
            CliError::Core(Error::Capacity(format!(
                "sierpinski cannot reach {target} points"
            )))
        })?;
    Ok(sierpinski_points(&SierpinskiParams {
        n,
        ..Default::default()
    })?)
}

/// Generates one suite dataset at `scale`, named `<kind>_<count>`.
pub fn suite_dataset(entry: &SuiteEntry, scale: f64) -> Result<Dataset> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(CliError::Usage(format!(
            "--scale must lie in (0, 1], got {scale}"
        )));
    }
    let target = entry.target(scale);
    let full = match entry.kind {
        SuiteKind::Menger => menger_to_target(target)?,
        SuiteKind::Sierpinski => sierpinski_to_target(target)?,
        SuiteKind::Mandelbulb => lattice_to_target(target, |resolution| {
            mandelbulb_points(&MandelbulbParams {
                resolution,
                ..Default::default()
            })
        })?,
        SuiteKind::Julia => lattice_to_target(target, |resolution| {
            julia_quat_points(&JuliaParams {
                resolution,
                ..Default::default()
            })
        })?,
    };
    let mut d = thin(full, target);
    d.name = format!("{}_{}", entry.kind.as_str(), d.len());
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_is_even_and_exact() {
        let points = (0..10)
            .map(|i| PointRecord::new_2d(i as f64, 0.0, [0.0; 3]))
            .collect();
        let d = thin(Dataset::new("t", "t", Dims::Two, points), 4);
        let xs: Vec<f64> = d.points.iter().map(|p| p.coords[0]).collect();
        assert_eq!(xs, vec![0.0, 2.0, 5.0, 7.0]);
    }

    #[test]
    fn small_suite_hits_every_count() {
        for e in &SUITE {
            let d = suite_dataset(e, 1e-3).unwrap();
            assert_eq!(d.len(), e.target(1e-3), "{e:?}");
            assert_eq!(d.dims, Dims::Three);
            d.validate().unwrap();
        }
    }

    #[test]
    fn full_scale_sierpinski_needs_no_thinning() {
        assert_eq!(4usize.pow(10), SUITE[2].vertices as usize);
        assert_eq!(4usize.pow(12), SUITE[8].vertices as usize);
    }

    #[test]
    fn menger_corners_match_the_generator() {
        let d = menger_to_target(8 * 20).unwrap();
        let full = dualprec::fractal::menger_points(&MengerParams {
            max_iterations: 1,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(d.points, full.points);
    }

    #[test]
    fn scale_is_checked() {
        assert!(matches!(
            suite_dataset(&SUITE[0], 0.0),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            suite_dataset(&SUITE[0], 2.0),
            Err(CliError::Usage(_))
        ));
    }
}
