use std::io::{BufWriter, Write};

use crate::error::Result;
use crate::fractal::{axis_samples, mandelbrot_grid, IterationGrid, MandelbrotView, Palette};
use crate::Precision;

pub const ZOOM_STUDY_CENTER: (f64, f64) = (-0.7436450, 0.13182590);
pub const ZOOM_STUDY_ZOOMS: [f64; 3] = [1e-1, 1e-4, 1e-6];
pub const ZOOM_STUDY_WIDTH: usize = 512;
/// Iteration budget at zoom 1e-1; it doubles with every further decade.
pub const ZOOM_STUDY_BASE_ITERATIONS: u32 = 32;

/// Iteration budget for a zoom level: deeper windows need longer orbits
/// before structure separates from the interior.
pub fn zoom_iterations(zoom: f64) -> u32 {
    let decades = (0.1 / zoom).log10().round().clamp(0.0, 16.0) as u32;
    ZOOM_STUDY_BASE_ITERATIONS << decades
}

/// The three zoom levels of the deep-zoom comparison, shallowest first.
pub fn zoom_study_views() -> Vec<MandelbrotView> {
    ZOOM_STUDY_ZOOMS
        .iter()
        .map(|&zoom| MandelbrotView {
            center_re: ZOOM_STUDY_CENTER.0,
            center_im: ZOOM_STUDY_CENTER.1,
            zoom,
            width: ZOOM_STUDY_WIDTH,
            max_iterations: zoom_iterations(zoom),
        })
        .collect()
}

/// Fraction of horizontally adjacent samples whose real coordinates are
/// bit-identical when computed in `precision`.
pub fn collapse_ratio(view: &MandelbrotView, precision: Precision) -> Result<f64> {
    view.validate()?;
    let samples = axis_samples(view.center_re, view.zoom, view.width, precision)?;
    Ok(samples.identical_neighbours() as f64 / (view.width - 1) as f64)
}

fn ramp() -> Palette {
    // every channel is nondecreasing: black, through grey, to warm white
    Palette::new(vec![
        [0.0, 0.0, 0.0],
        [0.35, 0.35, 0.35],
        [1.0, 0.6, 0.35],
        [1.0, 1.0, 0.8],
    ])
    .expect("static ramp is valid")
}

/// RGB bytes for every cell of the grid: bounded samples are black, escaped
/// samples follow the ramp by `count / max_iterations`.
pub fn grid_rgb(grid: &IterationGrid) -> Vec<u8> {
    let palette = ramp();
    let max = grid.max_iterations as f64;
    let mut rgb = Vec::with_capacity(grid.counts.len() * 3);
    for (&n, &escaped) in grid.counts.iter().zip(&grid.escaped) {
        let c = if escaped {
            palette.sample(n as f64 / max)
        } else {
            [0.0; 3]
        };
        rgb.extend(c.map(|v| (v * 255.0).round() as u8));
    }
    rgb
}

/// Writes the view as a binary PPM (P6, 8-bit). The top row is the largest
/// imaginary coordinate.
pub fn render_mandelbrot_image<W: Write>(
    view: &MandelbrotView,
    precision: Precision,
    sink: W,
) -> Result<()> {
    let grid = mandelbrot_grid(view, precision)?;
    let rgb = grid_rgb(&grid);
    let row_bytes = grid.width * 3;
    let mut out = BufWriter::new(sink);
    write!(out, "P6\n{} {}\n255\n", grid.width, grid.width)?;
    for row in rgb.chunks(row_bytes).rev() {
        out.write_all(row)?;
    }
    out.flush()?;
    Ok(())
}
