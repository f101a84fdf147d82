//! Compiled shader modules: lookup, checksum verification and interface checks.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{RenderError, Result};
use crate::spirv::{self, ShaderInterface};
use crate::variant::PipelineVariant;

/// Checksum manifest next to the binaries, `sha256sum` format.
pub const CHECKSUM_FILE: &str = "SHA256SUMS";

/// Overrides the shader directory.
pub const SHADER_DIR_ENV: &str = "DUALPREC_SHADER_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShaderModuleId {
    EmulatedVert,
    Emulated2dVert,
    EmulatedPairwiseVert,
    EmulatedFrag,
    NativeVert,
    Native2dVert,
    NativeFrag,
}

impl ShaderModuleId {
    pub const ALL: [ShaderModuleId; 7] = [
        ShaderModuleId::EmulatedVert,
        ShaderModuleId::Emulated2dVert,
        ShaderModuleId::EmulatedPairwiseVert,
        ShaderModuleId::EmulatedFrag,
        ShaderModuleId::NativeVert,
        ShaderModuleId::Native2dVert,
        ShaderModuleId::NativeFrag,
    ];

    /// GLSL source file name; the binary is this plus `.spv`.
    pub fn source_name(self) -> &'static str {
        match self {
            ShaderModuleId::EmulatedVert => "emulated.vert",
            ShaderModuleId::Emulated2dVert => "emulated_2d.vert",
            ShaderModuleId::EmulatedPairwiseVert => "emulated_pairwise.vert",
            ShaderModuleId::EmulatedFrag => "emulated.frag",
            ShaderModuleId::NativeVert => "native.vert",
            ShaderModuleId::Native2dVert => "native_2d.vert",
            ShaderModuleId::NativeFrag => "native.frag",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.spv", self.source_name())
    }
}

impl fmt::Display for ShaderModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.source_name())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `$DUALPREC_SHADER_DIR`, else the binaries committed with this crate.
pub fn default_shader_dir() -> PathBuf {
    std::env::var_os(SHADER_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("shaders")
                .join("spv")
        })
}

/// One loaded, checksum-verified and reflected module.
#[derive(Clone, Debug)]
pub struct ShaderModule {
    pub id: ShaderModuleId,
    pub bytes: Vec<u8>,
    pub interface: ShaderInterface,
}

impl ShaderModule {
    pub fn words(&self) -> Vec<u32> {
        self.bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect()
    }
}

/// Shader binaries from one directory.
#[derive(Clone, Debug)]
pub struct ShaderSet {
    dir: PathBuf,
    sums: HashMap<String, String>,
}

impl ShaderSet {
    /// Reads the checksum manifest; the binaries are loaded on demand.
    pub fn open(dir: impl Into<PathBuf>) -> Result<ShaderSet> {
        let dir = dir.into();
        let manifest = dir.join(CHECKSUM_FILE);
        let text = fs::read_to_string(&manifest).map_err(|e| {
            RenderError::shader(
                CHECKSUM_FILE,
                format!("cannot read {}: {e}", manifest.display()),
            )
        })?;
        let mut sums = HashMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let Some((sum, name)) = line.split_once("  ") else {
                return Err(RenderError::shader(
                    CHECKSUM_FILE,
                    format!("malformed line '{line}'"),
                ));
            };
            sums.insert(name.trim().to_string(), sum.trim().to_string());
        }
        Ok(ShaderSet { dir, sums })
    }

    pub fn open_default() -> Result<ShaderSet> {
        ShaderSet::open(default_shader_dir())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn load(&self, id: ShaderModuleId) -> Result<ShaderModule> {
        let name = id.file_name();
        let path = self.dir.join(&name);
        let bytes = fs::read(&path).map_err(|e| {
            RenderError::shader(
                id.source_name(),
                format!("cannot read {}: {e}", path.display()),
            )
        })?;
        let want = self.sums.get(&name).ok_or_else(|| {
            RenderError::shader(
                id.source_name(),
                format!("{name} is missing from {CHECKSUM_FILE}"),
            )
        })?;
        let got = sha256_hex(&bytes);
        if &got != want {
            return Err(RenderError::shader(
                id.source_name(),
                format!("checksum mismatch: manifest {want}, file {got}"),
            ));
        }
        let interface = spirv::reflect(id.source_name(), &bytes)?;
        Ok(ShaderModule {
            id,
            bytes,
            interface,
        })
    }

    /// Loads both stages of `variant` and checks them against its layout and
    /// against each other.
    pub fn load_variant(&self, variant: &PipelineVariant) -> Result<(ShaderModule, ShaderModule)> {
        let vs = self.load(variant.vertex_shader())?;
        let fs = self.load(variant.fragment_shader())?;
        spirv::check_vertex_interface(vs.id.source_name(), &vs.interface, variant)?;
        spirv::check_stage_link(&vs.interface, &fs.interface)?;
        Ok((vs, fs))
    }
}
