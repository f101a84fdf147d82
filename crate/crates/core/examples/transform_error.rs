//! Screen-space error of binary32 and df64 as the scene moves away from the origin.
//!
//! ```text
//! cargo run --release -p dualprec --example transform_error
//! ```

use dualprec::fractal::gen_random_2d;
use dualprec::precision::{error_report, TransformStack};
use dualprec::Precision;

fn main() -> dualprec::Result<()> {
    let points = gen_random_2d(10_000, 1)?;
    let viewport = (1024, 1024);
    println!(
        "{:>8}  {:>14}  {:>14}  {:>10}",
        "offset", "binary32 px", "df64 px", "ratio"
    );
    for exp in 0..=7 {
        let offset = 10f64.powi(exp);
        let stack = TransformStack::far_translated(offset, viewport)?;
        let b32 = error_report(&points, &stack, Precision::Binary32)?;
        let df = error_report(&points, &stack, Precision::Df64)?;
        let ratio = if df.max_pixel_error > 0.0 {
            format!("{:.1e}", b32.max_pixel_error / df.max_pixel_error)
        } else {
            "-".into()
        };
        println!(
            "{offset:>8.0e}  {:>14.3e}  {:>14.3e}  {ratio:>10}",
            b32.max_pixel_error, df.max_pixel_error
        );
    }
    Ok(())
}
