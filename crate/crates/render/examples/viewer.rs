//! Interactive window: drag to orbit, scroll to zoom, FPS in the title bar.
//!
//! ```text
//! cargo run --release -p dualprec-render --example viewer [native64|emulated64]
//! ```

use dualprec::fractal::{menger_points, MengerParams};
use dualprec_render::viewer::{run_viewer, ViewerOptions};
use dualprec_render::{PipelineVariant, VariantKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kind: VariantKind = std::env::args()
        .nth(1)
        .as_deref()
        .unwrap_or("emulated64")
        .parse()?;
    let data = menger_points(&MengerParams {
        max_iterations: 4,
        ..Default::default()
    })?;
    let summary = run_viewer(
        &data,
        ViewerOptions::new(PipelineVariant::new(kind, data.dims)),
    )?;
    println!("{} frames", summary.frames);
    if let Some(m) = summary.last {
        println!("last: {m}");
    }
    Ok(())
}
