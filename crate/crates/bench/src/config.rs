//! Config files pre-set flags.
//!
//! ```toml
//! [bench]
//! frames = 10
//! variants = ["emulated64"]
//! suite = true
//! ```
//!
//! Each key of a `[subcommand]` table becomes `--key=value` inserted right after
//! the subcommand name, so anything given on the command line overrides it.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::cli::Command;
use crate::error::{CliError, Result};

/// The `--config` path, if present in `args`.
pub fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            return None;
        }
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn scalar(key: &str, v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Integer(i) => Ok(i.to_string()),
        Value::Float(f) => Ok(format!("{f:e}")),
        other => Err(CliError::Usage(format!(
            "config key '{key}': unsupported value {other}"
        ))),
    }
}

/// Flag tokens for one table.
pub fn flags(section: &Table) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (key, v) in section {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Boolean(true) => out.push(flag),
            Value::Boolean(false) => {}
            Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(|i| scalar(key, i))
                    .collect::<Result<Vec<_>>>()?;
                out.push(format!("{flag}={}", parts.join(",")));
            }
            v => out.push(format!("{flag}={}", scalar(key, v)?)),
        }
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    text.parse::<Table>()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// `args` with the config table of the invoked subcommand spliced in.
pub fn expand(args: Vec<OsString>, config: &Table) -> Result<Vec<OsString>> {
    for key in config.keys() {
        if !Command::NAMES.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config table '{key}' is not a subcommand (expected one of {})",
                Command::NAMES.join(", ")
            )));
        }
    }
    let Some(pos) = args
        .iter()
        .skip(1)
        .position(|a| Command::NAMES.iter().any(|n| a == n))
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    let name = args[pos].to_string_lossy().into_owned();
    let section = match config.get(&name) {
        None => return Ok(args),
        Some(Value::Table(t)) => t,
        Some(_) => {
            return Err(CliError::Usage(format!(
                "config entry '{name}' must be a table"
            )))
        }
    };
    let mut out = args[..=pos].to_vec();
    out.extend(flags(section)?.into_iter().map(OsString::from));
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn splices_after_the_subcommand() {
        let cfg: Table =
            "[bench]\nframes = 5\nvariants = [\"native64\"]\nsuite = true\nheadless = false\n"
                .parse()
                .unwrap();
        let got = expand(
            os(&["dpbench", "--config", "c.toml", "bench", "--frames", "9"]),
            &cfg,
        )
        .unwrap();
        assert_eq!(
            got,
            os(&[
                "dpbench",
                "--config",
                "c.toml",
                "bench",
                "--frames=5",
                "--suite",
                "--variants=native64",
                "--frames",
                "9"
            ])
        );
    }

    #[test]
    fn finds_the_path_and_rejects_unknown_tables() {
        assert_eq!(
            config_path(&os(&["x", "bench", "--config=a.toml"])),
            Some("a.toml".into())
        );
        assert_eq!(config_path(&os(&["x", "bench"])), None);
        let cfg: Table = "[bogus]\na = 1\n".parse().unwrap();
        assert!(matches!(
            expand(os(&["x", "bench"]), &cfg),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn floats_keep_their_value() {
        let cfg: Table = "[mandelbrot]\ncenter_re = -0.743645\nzooms = [1e-1, 1e-6]\n"
            .parse()
            .unwrap();
        let f = flags(cfg["mandelbrot"].as_table().unwrap()).unwrap();
        assert_eq!(f, vec!["--center-re=-7.43645e-1", "--zooms=1e-1,1e-6"]);
    }
}
