//! Renders a Sierpinski tetrahedron offscreen and saves it as PNG.
//!
//! ```text
//! cargo run --release -p dualprec-render --example render_capture [out.png]
//! ```

use std::path::PathBuf;

use dualprec::dataset_stats;
use dualprec::fractal::{sierpinski_points, SierpinskiParams};
use dualprec_render::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("sierpinski.png"));
    let data = sierpinski_points(&SierpinskiParams {
        n: 7,
        ..Default::default()
    })?;
    let mut ctx = init_context(&ContextOptions::default())?;
    println!("device: {}", ctx.info());
    if let Some(why) = ctx.fallback_reason() {
        println!("  ({why})");
    }
    let variant = PipelineVariant::emulated(data.dims);
    let pipeline = build_pipeline(&mut ctx, &variant)?;
    let buffer = upload_dataset(&mut ctx, &data, &variant)?;
    let camera = CameraState::framing(&dataset_stats(&data)?);
    let image = offscreen_capture(&mut ctx, &pipeline, &buffer, &camera, (800, 800))?;
    image.save(&out)?;
    let lit = image.rgba.chunks(4).filter(|p| p[..3] != [0, 0, 0]).count();
    println!(
        "{} points, {lit} lit pixels -> {}",
        data.len(),
        out.display()
    );
    Ok(())
}
