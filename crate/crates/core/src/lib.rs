//! Emulated and native double precision for point-cloud visualization.
//!
//! * [`df64`]: float-float arithmetic (two `f32`s per value) with error-free
//!   transforms, the representation the emulated GPU path uploads.
//! * [`fractal`]: dataset generators (unique random 2D points, Mandelbrot
//!   escape grids, Mandelbulb, quaternion Julia, Menger sponge, Sierpinski
//!   tetrahedron).
//! * [`dataset`]: the point model, bit-exact CSV, GLB vertex extraction.
//! * [`precision`]: ULP metrics, transform-error reports and the Mandelbrot
//!   zoom collapse study.

use std::fmt;
use std::str::FromStr;

pub mod dataset;
pub mod df64;
pub mod error;
pub mod fractal;
pub mod precision;

pub use dataset::{dataset_stats, Dataset, DatasetStats, Dims, PointRecord};
pub use df64::Df64;
pub use error::{Error, Result};

/// Arithmetic used for a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    /// Plain IEEE-754 single precision.
    Binary32,
    /// Emulated double precision, see [`Df64`].
    Df64,
    /// Native IEEE-754 double precision.
    Binary64,
}

impl Precision {
    pub const ALL: [Precision; 3] = [Precision::Binary32, Precision::Df64, Precision::Binary64];

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::Binary32 => "binary32",
            Precision::Df64 => "df64",
            Precision::Binary64 => "binary64",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary32" | "f32" | "single" => Ok(Precision::Binary32),
            "df64" | "emulated" => Ok(Precision::Df64),
            "binary64" | "f64" | "double" => Ok(Precision::Binary64),
            other => Err(Error::Validation(format!(
                "unknown precision '{other}' (expected binary32, df64 or binary64)"
            ))),
        }
    }
}
