//! A dataset placed far from the origin: the emulated shader recombines
//! high + low in binary32 before the matrix product, the pairwise variant keeps
//! float-float through it. Lit-pixel overlap with the native image shows which
//! one holds on to the detail.
//!
//! ```text
//! cargo run --release -p dualprec-render --example pairwise_precision [offset]
//! ```

use dualprec::fractal::{sierpinski_points, SierpinskiParams};
use dualprec::{dataset_stats, Dataset};
use dualprec_render::*;

fn lit(img: &Image) -> Vec<bool> {
    img.rgba.chunks(4).map(|p| p[..3] != [0, 0, 0]).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let offset: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(1e6);
    let mut data: Dataset = sierpinski_points(&SierpinskiParams {
        n: 6,
        ..Default::default()
    })?;
    for p in &mut data.points {
        p.coords[0] += offset;
        p.coords[1] += offset;
    }
    let camera = CameraState::framing(&dataset_stats(&data)?);
    let mut ctx = init_context(&ContextOptions::default())?;
    let res = (512, 512);

    let variants = [
        PipelineVariant::native(data.dims),
        PipelineVariant::emulated(data.dims),
        PipelineVariant::emulated(data.dims).with_pairwise_product()?,
    ];
    let mut masks = Vec::new();
    for v in &variants {
        let pipeline = build_pipeline(&mut ctx, v)?;
        let buffer = upload_dataset(&mut ctx, &data, v)?;
        masks.push(lit(&offscreen_capture(
            &mut ctx, &pipeline, &buffer, &camera, res,
        )?));
        release_buffer(&mut ctx, buffer);
    }
    let reference = &masks[0];
    let total = reference.iter().filter(|&&l| l).count();
    println!("offset {offset:e}: native lights {total} pixels");
    for (v, m) in variants.iter().zip(&masks).skip(1) {
        let shared = m.iter().zip(reference).filter(|(a, b)| **a && **b).count();
        let own = m.iter().filter(|&&l| l).count();
        println!(
            "{:<20} lights {own:>6}, {shared:>6} shared with native",
            v.label()
        );
    }
    Ok(())
}
