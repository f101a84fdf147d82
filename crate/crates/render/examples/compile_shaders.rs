//! Rebuilds `shaders/spv/*.spv` and their checksum file from the GLSL sources.
//!
//! ```text
//! cargo run -p dualprec-render --example compile_shaders
//! ```

#[path = "../tests/common/glsl.rs"]
mod glsl;

use std::fs;
use std::path::Path;

use dualprec_render::shaders::{sha256_hex, CHECKSUM_FILE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("shaders");
    let out = dir.join("spv");
    fs::create_dir_all(&out)?;
    let mut names: Vec<String> = fs::read_dir(&dir)?
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| glsl::stage_of(n).is_some())
        .collect();
    names.sort();
    let mut sums = String::new();
    for name in &names {
        let source = fs::read_to_string(dir.join(name))?;
        let words = glsl::compile(&source, glsl::stage_of(name).unwrap())
            .map_err(|e| format!("{name}: {e}"))?;
        let bytes = glsl::to_bytes(&words);
        let spv_name = format!("{name}.spv");
        fs::write(out.join(&spv_name), &bytes)?;
        sums.push_str(&format!("{}  {spv_name}\n", sha256_hex(&bytes)));
        println!("{spv_name}: {} bytes", bytes.len());
    }
    fs::write(out.join(CHECKSUM_FILE), sums)?;
    Ok(())
}
