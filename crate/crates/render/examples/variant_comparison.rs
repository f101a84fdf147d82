//! Native and emulated pipelines on the same data: timing and a pixel diff.
//!
//! ```text
//! cargo run --release -p dualprec-render --example variant_comparison [depth]
//! ```

use dualprec::dataset_stats;
use dualprec::fractal::{sierpinski_points, SierpinskiParams};
use dualprec_render::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(8);
    let data = sierpinski_points(&SierpinskiParams {
        n,
        ..Default::default()
    })?;
    let camera = CameraState::framing(&dataset_stats(&data)?);
    let mut ctx = init_context(&ContextOptions {
        resolution: (512, 512),
        ..Default::default()
    })?;
    println!("{} points on {}", data.len(), ctx.info());

    let mut images = Vec::new();
    for kind in VariantKind::ALL {
        let variant = PipelineVariant::new(kind, data.dims);
        let pipeline = match build_pipeline(&mut ctx, &variant) {
            Ok(p) => p,
            Err(e @ RenderError::Feature { .. }) => {
                println!("{kind}: {e}");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let buffer = upload_dataset(&mut ctx, &data, &variant)?;
        let m = render_and_measure(&mut ctx, &pipeline, &buffer, &camera, 10)?;
        println!("{kind:<10} {} bytes/vertex  {m}", variant.stride);
        images.push(offscreen_capture(
            &mut ctx,
            &pipeline,
            &buffer,
            &camera,
            (512, 512),
        )?);
        release_buffer(&mut ctx, buffer);
    }
    if let [a, b] = &images[..] {
        let d = a.diff(b)?;
        println!(
            "images agree on {:.4}% of pixels, max channel difference {}",
            100.0 * d.matching_fraction(),
            d.max_channel_difference
        );
    }
    Ok(())
}
