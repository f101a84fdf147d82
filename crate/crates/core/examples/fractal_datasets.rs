//! Every generator once, with its point count and bounding box.
//!
//! ```text
//! cargo run --release -p dualprec --example fractal_datasets
//! ```

use dualprec::fractal::*;
use dualprec::{dataset_stats, Dataset};

fn show(d: &Dataset) -> dualprec::Result<()> {
    println!("{:<20} {}", d.name, dataset_stats(d)?);
    println!("{:<20} {}", "", d.source);
    Ok(())
}

fn main() -> dualprec::Result<()> {
    show(&gen_random_2d(10_000, 7)?)?;
    for n in 0..=3 {
        let cubes = menger_cubes(&MengerParams {
            max_iterations: n,
            ..Default::default()
        })?;
        println!("menger depth {n}: {} cubes", cubes.len());
    }
    show(&menger_points(&MengerParams {
        max_iterations: 2,
        ..Default::default()
    })?)?;
    show(&sierpinski_points(&SierpinskiParams {
        n: 5,
        ..Default::default()
    })?)?;
    show(&mandelbulb_points(&MandelbulbParams {
        resolution: 48,
        ..Default::default()
    })?)?;
    let julia = julia_quat_points(&JuliaParams {
        resolution: 32,
        ..Default::default()
    })?;
    show(&julia)?;
    let counts = julia.escape_counts.as_deref().unwrap_or_default();
    println!(
        "julia escape counts span {:?}..={:?}",
        counts.iter().min(),
        counts.iter().max()
    );
    Ok(())
}
