//! Writes a random 2D dataset to CSV, reads it back and compares bit patterns.
//!
//! ```text
//! cargo run --release -p dualprec --example csv_roundtrip [count]
//! ```

use std::time::Instant;

use dualprec::dataset::csv::{read_csv_file, write_csv_file};
use dualprec::dataset_stats;
use dualprec::fractal::gen_random_2d;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(100_000);
    let path = std::env::temp_dir().join(format!("random2d_{count}.csv"));

    let t = Instant::now();
    let d = gen_random_2d(count, 42)?;
    println!("generated {count} points in {:?}", t.elapsed());
    let t = Instant::now();
    write_csv_file(&d, &path)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!(
        "wrote {} ({bytes} bytes) in {:?}",
        path.display(),
        t.elapsed()
    );
    let t = Instant::now();
    let back = read_csv_file(&path)?;
    println!("read back in {:?}", t.elapsed());

    let (a, b) = (dataset_stats(&d)?, dataset_stats(&back)?);
    println!("before: {a}\nafter:  {b}");
    println!(
        "bit-exact: {}",
        a.checksum == b.checksum && d.points == back.points
    );
    Ok(())
}
