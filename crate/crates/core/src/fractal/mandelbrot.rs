use rayon::prelude::*;

use crate::df64::Df64;
use crate::error::{Error, Result};
use crate::Precision;

/// A square window onto the complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MandelbrotView {
    pub center_re: f64,
    pub center_im: f64,
    /// Half-width of the window.
    pub zoom: f64,
    /// Samples per axis.
    pub width: usize,
    pub max_iterations: u32,
}

impl MandelbrotView {
    pub fn new(
        center_re: f64,
        center_im: f64,
        zoom: f64,
        width: usize,
        max_iterations: u32,
    ) -> Result<Self> {
        let view = MandelbrotView {
            center_re,
            center_im,
            zoom,
            width,
            max_iterations,
        };
        view.validate()?;
        Ok(view)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.zoom > 0.0 && self.zoom.is_finite()) {
            return Err(Error::Validation(format!(
                "zoom must be positive, got {}",
                self.zoom
            )));
        }
        if self.width < 2 {
            return Err(Error::Validation("view width must be at least 2".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::Validation(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !self.center_re.is_finite() || !self.center_im.is_finite() {
            return Err(Error::Validation("view center must be finite".into()));
        }
        Ok(())
    }
}

/// Sample coordinates along one axis, kept in the precision they were computed in.
#[derive(Clone, Debug, PartialEq)]
pub enum AxisSamples {
    Binary32(Vec<f32>),
    Df64(Vec<Df64>),
    Binary64(Vec<f64>),
}

impl AxisSamples {
    pub fn len(&self) -> usize {
        match self {
            AxisSamples::Binary32(v) => v.len(),
            AxisSamples::Df64(v) => v.len(),
            AxisSamples::Binary64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn widened(&self) -> Vec<f64> {
        match self {
            AxisSamples::Binary32(v) => v.iter().map(|&x| x as f64).collect(),
            AxisSamples::Df64(v) => v.iter().map(|x| x.to_f64()).collect(),
            AxisSamples::Binary64(v) => v.clone(),
        }
    }

    /// Number of neighbouring samples whose stored bit patterns are identical.
    pub fn identical_neighbours(&self) -> usize {
        match self {
            AxisSamples::Binary32(v) => v
                .windows(2)
                .filter(|w| w[0].to_bits() == w[1].to_bits())
                .count(),
            AxisSamples::Df64(v) => v
                .windows(2)
                .filter(|w| {
                    w[0].high().to_bits() == w[1].high().to_bits()
                        && w[0].low().to_bits() == w[1].low().to_bits()
                })
                .count(),
            AxisSamples::Binary64(v) => v
                .windows(2)
                .filter(|w| w[0].to_bits() == w[1].to_bits())
                .count(),
        }
    }
}

/// Coordinates `center + (i - width/2) * (2 * zoom / width)` for every sample
/// index, with every operation carried out in `precision`.
pub fn axis_samples(
    center: f64,
    zoom: f64,
    width: usize,
    precision: Precision,
) -> Result<AxisSamples> {
    Ok(match precision {
        Precision::Binary32 => {
            let c = center as f32;
            let step = (2.0f32 * zoom as f32) / width as f32;
            let half = width as f32 / 2.0;
            AxisSamples::Binary32((0..width).map(|i| c + (i as f32 - half) * step).collect())
        }
        Precision::Binary64 => {
            let step = 2.0 * zoom / width as f64;
            let half = width as f64 / 2.0;
            AxisSamples::Binary64(
                (0..width)
                    .map(|i| center + (i as f64 - half) * step)
                    .collect(),
            )
        }
        Precision::Df64 => {
            let c = Df64::split(center)?;
            let step = Df64::split(2.0 * zoom)?.checked_div(Df64::split(width as f64)?)?;
            let half = width as f64 / 2.0;
            let samples = (0..width)
                .map(|i| c.checked_add(Df64::split(i as f64 - half)?.checked_mul(step)?))
                .collect::<Result<Vec<_>>>()?;
            AxisSamples::Df64(samples)
        }
    })
}

/// Escape iteration for `c`: `z0 = 0`, `z <- z^2 + c`, tested against
/// `|z|^2 > 4` after every iteration. Returns the 1-based iteration at which
/// `z` escaped, or `None` if it stayed bounded for `max_iterations`.
pub fn escape_time(c_re: f64, c_im: f64, max_iterations: u32) -> Option<u32> {
    let (mut zr, mut zi) = (0.0f64, 0.0f64);
    for n in 0..max_iterations {
        let next_re = zr * zr - zi * zi + c_re;
        zi = 2.0 * zr * zi + c_im;
        zr = next_re;
        if zr * zr + zi * zi > 4.0 {
            return Some(n + 1);
        }
    }
    None
}

/// Escape counts on a `width x width` grid, row-major with rows along the
/// imaginary axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterationGrid {
    pub width: usize,
    pub max_iterations: u32,
    /// Escape iteration, or `max_iterations` for bounded samples.
    pub counts: Vec<u32>,
    /// Whether the sample escaped; needed because an escape at the final
    /// iteration and a bounded orbit share the same count.
    pub escaped: Vec<bool>,
}

impl IterationGrid {
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.counts[row * self.width + col]
    }

    pub fn has_escaped(&self, row: usize, col: usize) -> bool {
        self.escaped[row * self.width + col]
    }
}

/// Computes the escape grid of `view`. Sample coordinates are computed in
/// `precision` (this is where binary32 coordinates collapse at deep zoom) and
/// then iterated in binary64, so differences between precisions come from
/// coordinate resolution alone.
pub fn mandelbrot_grid(view: &MandelbrotView, precision: Precision) -> Result<IterationGrid> {
    view.validate()?;
    let re = axis_samples(view.center_re, view.zoom, view.width, precision)?.widened();
    let im = axis_samples(view.center_im, view.zoom, view.width, precision)?.widened();
    let cells: Vec<Option<u32>> = im
        .par_iter()
        .flat_map_iter(|&ci| re.iter().map(move |&cr| (cr, ci)))
        .map(|(cr, ci)| escape_time(cr, ci, view.max_iterations))
        .collect();
    Ok(IterationGrid {
        width: view.width,
        max_iterations: view.max_iterations,
        counts: cells
            .iter()
            .map(|c| c.unwrap_or(view.max_iterations))
            .collect(),
        escaped: cells.iter().map(Option::is_some).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_in_the_set() {
        // with an even width, index width/2 lands exactly on the center
        let view = MandelbrotView::new(0.0, 0.0, 2.0, 64, 100).unwrap();
        for p in Precision::ALL {
            let g = mandelbrot_grid(&view, p).unwrap();
            assert_eq!(g.get(32, 32), 100, "{p}");
            assert!(!g.has_escaped(32, 32));
        }
    }

    #[test]
    fn far_point_escapes_immediately() {
        assert_eq!(escape_time(3.0, 0.0, 50), Some(1));
        assert_eq!(escape_time(3.0, 0.0, 1), Some(1));
        assert_eq!(escape_time(0.0, 0.0, 50), None);
        assert_eq!(escape_time(-2.0, 0.0, 50), None);
    }

    #[test]
    fn invalid_views() {
        assert!(MandelbrotView::new(0.0, 0.0, 0.0, 8, 1).is_err());
        assert!(MandelbrotView::new(0.0, 0.0, 1.0, 1, 1).is_err());
        assert!(MandelbrotView::new(0.0, 0.0, 1.0, 8, 0).is_err());
    }

    #[test]
    fn axis_center_sample_is_exact() {
        for p in Precision::ALL {
            let s = axis_samples(-0.743645, 1e-3, 512, p).unwrap().widened();
            assert_eq!(s.len(), 512);
            let expect = match p {
                Precision::Binary32 => -0.743645f32 as f64,
                Precision::Df64 => Df64::split(-0.743645).unwrap().to_f64(),
                Precision::Binary64 => -0.743645,
            };
            assert_eq!(s[256], expect, "{p}");
        }
    }

    #[test]
    fn df64_axis_tracks_binary64() {
        let a = axis_samples(-0.7436450, 1e-6, 512, Precision::Df64)
            .unwrap()
            .widened();
        let b = axis_samples(-0.7436450, 1e-6, 512, Precision::Binary64)
            .unwrap()
            .widened();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
