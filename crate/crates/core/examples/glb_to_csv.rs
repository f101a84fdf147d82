//! Extracts the POSITION (and COLOR_0) accessors of a GLB file into CSV.
//!
//! ```text
//! cargo run -p dualprec --example glb_to_csv -- [model.glb] [out.csv]
//! ```

use std::path::PathBuf;

use dualprec::dataset::csv::write_csv_file;
use dualprec::dataset::glb::extract_points_from_glb_file;
use dualprec::dataset_stats;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let input = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/two_primitives.glb")
    });
    let output = args.next().map(PathBuf::from).unwrap_or_else(|| {
        let stem = input.file_stem().unwrap_or_default();
        std::env::temp_dir().join(stem).with_extension("csv")
    });
    let d = extract_points_from_glb_file(&input)?;
    write_csv_file(&d, &output)?;
    println!("{} -> {}", input.display(), output.display());
    println!("{}", dataset_stats(&d)?);
    for p in d.points.iter().take(5) {
        println!("  {:?} {:?}", p.coords, p.color);
    }
    Ok(())
}
