//! The `dpbench` command line as a library: argument grammar, config files,
//! the subcommands and benchmark reports.
//!
//! ```no_run
//! let code = dualprec_bench::run(["dpbench", "generate", "menger", "--iterations", "2"]);
//! assert_eq!(code, 0);
//! ```

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use cli::Cli;
pub use error::{CliError, Result};
pub use report::{BenchReport, BenchRow, RowStatus};

/// Parses `args` (program name first), applying any `--config` file.
///
/// `Ok(Err(e))` carries clap's own outcome, which includes `--help` and `--version`.
pub fn parse(args: Vec<OsString>) -> Result<std::result::Result<Cli, clap::Error>> {
    let args = match config::config_path(&args) {
        Some(path) => config::expand(args, &config::load(&path)?)?,
        None => args,
    };
    Ok(Cli::try_parse_from(args))
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(args) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = commands::execute(&cli.command, &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
