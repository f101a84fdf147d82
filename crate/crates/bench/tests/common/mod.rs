#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

/// Runs `dpbench` in `dir` on the software backend.
pub fn dpbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpbench"))
        .current_dir(dir)
        .args(args)
        .env_remove("DPBENCH_DEVICE_INDEX")
        .env_remove("DUALPREC_SHADER_DIR")
        .output()
        .expect("spawn dpbench")
}

pub fn ok(dir: &Path, args: &[&str]) -> String {
    let o = dpbench(dir, args);
    assert!(
        o.status.success(),
        "dpbench {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Data rows of a CSV file, skipping `#` metadata and the header.
pub fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}
