//! Drives the benchmark from code and reads the resulting report back.
//!
//! ```text
//! cargo run --release -p dualprec-bench --example bench_report [scale]
//! ```

use dualprec_bench::cli::{Cli, Command};
use dualprec_bench::commands::bench;
use dualprec_bench::BenchReport;

use clap::Parser;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scale = std::env::args().nth(1).unwrap_or_else(|| "0.01".into());
    let out = std::env::temp_dir().join("bench_report.csv");
    let cli = Cli::try_parse_from([
        "dpbench",
        "bench",
        "--suite",
        "--scale",
        &scale,
        "--frames",
        "5",
        "--width",
        "256",
        "--height",
        "256",
        "--out",
        out.to_str().unwrap(),
    ])?;
    let Command::Bench(args) = cli.command else {
        unreachable!()
    };
    let report = bench(&args, &mut std::io::sink())?;

    let reread = BenchReport::parse_csv(&std::fs::read_to_string(&out)?)?;
    assert_eq!(reread.rows.len(), report.rows.len());
    println!(
        "{} rows from {} ({})",
        report.rows.len(),
        report.device,
        report.aggregation()
    );
    for r in &report.rows {
        println!(
            "{:<10} {:<22} {:>9} {:>9.3} ms",
            r.variant,
            r.dataset,
            r.vertices,
            r.gpu_render_ms.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
