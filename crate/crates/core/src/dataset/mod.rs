//! Point datasets: the in-memory model plus CSV and GLB ingestion.

pub mod csv;
pub mod glb;

use std::fmt;

use crate::error::{Error, Result};

pub use self::csv::{read_csv, write_csv};
pub use self::glb::extract_points_from_glb;

/// Number of coordinates per point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dims {
    Two,
    Three,
}

impl Dims {
    pub fn count(self) -> usize {
        match self {
            Dims::Two => 2,
            Dims::Three => 3,
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}d", self.count())
    }
}

/// One point. Two-dimensional points keep `coords[2] == 0.0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointRecord {
    pub coords: [f64; 3],
    pub color: [f64; 3],
}

impl PointRecord {
    pub fn new_2d(x: f64, y: f64, color: [f64; 3]) -> Self {
        PointRecord {
            coords: [x, y, 0.0],
            color,
        }
    }

    pub fn new_3d(x: f64, y: f64, z: f64, color: [f64; 3]) -> Self {
        PointRecord {
            coords: [x, y, z],
            color,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    /// Where the points came from: generator parameters or an input path.
    pub source: String,
    pub dims: Dims,
    pub points: Vec<PointRecord>,
    /// Per-point escape iteration counts, for generators that produce them.
    pub escape_counts: Option<Vec<u32>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        source: impl Into<String>,
        dims: Dims,
        points: Vec<PointRecord>,
    ) -> Self {
        Dataset {
            name: name.into(),
            source: source.into(),
            dims,
            points,
            escape_counts: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks the invariants required of a persisted dataset.
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Validation(format!(
                "dataset '{}' has no points",
                self.name
            )));
        }
        if let Some(counts) = &self.escape_counts {
            if counts.len() != self.points.len() {
                return Err(Error::Validation(format!(
                    "{} escape counts for {} points",
                    counts.len(),
                    self.points.len()
                )));
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            if self.dims == Dims::Two && p.coords[2] != 0.0 {
                return Err(Error::Validation(format!("point {i}: 2d point with z")));
            }
            if p.coords[..self.dims.count()].iter().any(|c| !c.is_finite()) {
                return Err(Error::Validation(format!(
                    "point {i}: non-finite coordinate"
                )));
            }
            if p.color.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(Error::Validation(format!(
                    "point {i}: color outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetStats {
    pub count: usize,
    /// `(min, max)` per axis, `dims` entries.
    pub bbox: Vec<(f64, f64)>,
    /// Order-sensitive FNV-1a hash of every coordinate and color bit pattern.
    pub checksum: u64,
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "count={} checksum={:016x}", self.count, self.checksum)?;
        for ((lo, hi), axis) in self.bbox.iter().zip(["x", "y", "z"]) {
            write!(f, " {axis}=[{lo}, {hi}]")?;
        }
        Ok(())
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Count, bounding box and content checksum. The checksum depends only on the
/// point values and their order, so it is stable across processes.
pub fn dataset_stats(dataset: &Dataset) -> Result<DatasetStats> {
    if dataset.is_empty() {
        return Err(Error::Validation("statistics of an empty dataset".into()));
    }
    let n = dataset.dims.count();
    let mut bbox = vec![(f64::INFINITY, f64::NEG_INFINITY); n];
    let mut hash = fnv1a(FNV_OFFSET, &[n as u8]);
    for p in &dataset.points {
        for (axis, &c) in p.coords[..n].iter().enumerate() {
            bbox[axis].0 = bbox[axis].0.min(c);
            bbox[axis].1 = bbox[axis].1.max(c);
            hash = fnv1a(hash, &c.to_bits().to_le_bytes());
        }
        for c in p.color {
            hash = fnv1a(hash, &c.to_bits().to_le_bytes());
        }
    }
    Ok(DatasetStats {
        count: dataset.len(),
        bbox,
        checksum: hash,
    })
}
