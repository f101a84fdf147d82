//! The zoom study: PPM images per precision and the fraction of neighbouring
//! sample coordinates that collapse onto the same value.
//!
//! ```text
//! cargo run --release -p dualprec --example mandelbrot_zoom [out_dir]
//! ```

use std::fs::File;
use std::path::PathBuf;

use dualprec::precision::{collapse_ratio, render_mandelbrot_image, zoom_study_views};
use dualprec::Precision;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("mandelbrot_zoom"));
    std::fs::create_dir_all(&dir)?;
    println!(
        "{:<10} {:>8} {:>10} {:>9}",
        "precision", "zoom", "iterations", "collapse"
    );
    for view in zoom_study_views() {
        for precision in Precision::ALL {
            let path = dir.join(format!("{precision}_{:e}.ppm", view.zoom));
            render_mandelbrot_image(&view, precision, File::create(&path)?)?;
            let c = collapse_ratio(&view, precision)?;
            println!(
                "{precision:<10} {:>8.0e} {:>10} {c:>9.4}",
                view.zoom, view.max_iterations
            );
        }
    }
    println!("images in {}", dir.display());
    Ok(())
}
