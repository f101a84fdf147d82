//! Pipeline variants and the vertex interface each one expects.

use std::fmt;
use std::str::FromStr;

use dualprec::Dims;

use crate::error::{RenderError, Result};
use crate::shaders::ShaderModuleId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VariantKind {
    /// Binary64 attributes and a `dmat4` push constant.
    Native64,
    /// High/low binary32 pairs recombined before a `mat4` product.
    Emulated64,
}

impl VariantKind {
    pub const ALL: [VariantKind; 2] = [VariantKind::Emulated64, VariantKind::Native64];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Native64 => "native64",
            VariantKind::Emulated64 => "emulated64",
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for VariantKind {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "native64" | "native" => Ok(VariantKind::Native64),
            "emulated64" | "emulated" => Ok(VariantKind::Emulated64),
            other => Err(RenderError::Validation(format!(
                "unknown variant '{other}' (expected native64 or emulated64)"
            ))),
        }
    }
}

/// Vertex attribute formats used by the pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AttributeFormat {
    Vec2F32,
    Vec3F32,
    Vec2F64,
    Vec3F64,
}

impl AttributeFormat {
    pub fn components(self) -> u32 {
        match self {
            AttributeFormat::Vec2F32 | AttributeFormat::Vec2F64 => 2,
            AttributeFormat::Vec3F32 | AttributeFormat::Vec3F64 => 3,
        }
    }

    pub fn component_bits(self) -> u32 {
        match self {
            AttributeFormat::Vec2F32 | AttributeFormat::Vec3F32 => 32,
            AttributeFormat::Vec2F64 | AttributeFormat::Vec3F64 => 64,
        }
    }

    pub fn size(self) -> u32 {
        self.components() * self.component_bits() / 8
    }

    /// Input locations consumed; 64-bit three and four component vectors take two.
    pub fn locations(self) -> u32 {
        if self.component_bits() == 64 && self.components() > 2 {
            2
        } else {
            1
        }
    }

    pub fn vk_format(self) -> ash::vk::Format {
        use ash::vk::Format;
        match self {
            AttributeFormat::Vec2F32 => Format::R32G32_SFLOAT,
            AttributeFormat::Vec3F32 => Format::R32G32B32_SFLOAT,
            AttributeFormat::Vec2F64 => Format::R64G64_SFLOAT,
            AttributeFormat::Vec3F64 => Format::R64G64B64_SFLOAT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexAttribute {
    pub name: &'static str,
    pub location: u32,
    pub format: AttributeFormat,
    /// Byte offset inside one vertex.
    pub offset: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DeviceFeature {
    /// `shaderFloat64`.
    ShaderFloat64,
    /// Vertex-buffer support for `R64G64*_SFLOAT` formats.
    VertexFormat64,
}

impl fmt::Display for DeviceFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeviceFeature::ShaderFloat64 => "64-bit shader floats (shaderFloat64)",
            DeviceFeature::VertexFormat64 => "64-bit vertex attribute formats",
        })
    }
}

/// Everything a backend needs to build and feed one pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineVariant {
    pub kind: VariantKind,
    pub dims: Dims,
    /// Emulated only: multiply in float-float arithmetic before narrowing
    /// (the plain emulated shader narrows first).
    pub pairwise: bool,
    pub vertex_layout: Vec<VertexAttribute>,
    pub stride: u32,
    pub push_constant_size: u32,
    pub required_features: Vec<DeviceFeature>,
}

fn layout(parts: &[(&'static str, AttributeFormat)]) -> (Vec<VertexAttribute>, u32) {
    let (mut location, mut offset) = (0, 0);
    let attrs = parts
        .iter()
        .map(|&(name, format)| {
            let a = VertexAttribute {
                name,
                location,
                format,
                offset,
            };
            location += format.locations();
            offset += format.size();
            a
        })
        .collect();
    (attrs, offset)
}

impl PipelineVariant {
    pub fn new(kind: VariantKind, dims: Dims) -> PipelineVariant {
        use AttributeFormat::*;
        let (pos32, pos64) = match dims {
            Dims::Two => (Vec2F32, Vec2F64),
            Dims::Three => (Vec3F32, Vec3F64),
        };
        let (vertex_layout, stride) = match kind {
            VariantKind::Emulated64 => layout(&[
                ("highPos", pos32),
                ("lowPos", pos32),
                ("highColor", Vec3F32),
                ("lowColor", Vec3F32),
            ]),
            VariantKind::Native64 => layout(&[("pos", pos64), ("color", Vec3F64)]),
        };
        let (push_constant_size, required_features) = match kind {
            VariantKind::Emulated64 => (64, Vec::new()),
            VariantKind::Native64 => (
                128,
                vec![DeviceFeature::ShaderFloat64, DeviceFeature::VertexFormat64],
            ),
        };
        PipelineVariant {
            kind,
            dims,
            pairwise: false,
            vertex_layout,
            stride,
            push_constant_size,
            required_features,
        }
    }

    pub fn emulated(dims: Dims) -> PipelineVariant {
        PipelineVariant::new(VariantKind::Emulated64, dims)
    }

    pub fn native(dims: Dims) -> PipelineVariant {
        PipelineVariant::new(VariantKind::Native64, dims)
    }

    /// Switches an emulated 3D variant to the float-float matrix product,
    /// which needs the matrix as high and low halves (128 bytes).
    pub fn with_pairwise_product(mut self) -> Result<PipelineVariant> {
        if self.kind != VariantKind::Emulated64 || self.dims != Dims::Three {
            return Err(RenderError::Validation(
                "the pairwise product exists only for the emulated 3D variant".into(),
            ));
        }
        self.pairwise = true;
        self.push_constant_size = 128;
        Ok(self)
    }

    pub fn vertex_shader(&self) -> ShaderModuleId {
        match (self.kind, self.dims, self.pairwise) {
            (VariantKind::Emulated64, Dims::Three, true) => ShaderModuleId::EmulatedPairwiseVert,
            (VariantKind::Emulated64, Dims::Three, false) => ShaderModuleId::EmulatedVert,
            (VariantKind::Emulated64, Dims::Two, _) => ShaderModuleId::Emulated2dVert,
            (VariantKind::Native64, Dims::Three, _) => ShaderModuleId::NativeVert,
            (VariantKind::Native64, Dims::Two, _) => ShaderModuleId::Native2dVert,
        }
    }

    pub fn fragment_shader(&self) -> ShaderModuleId {
        match self.kind {
            VariantKind::Emulated64 => ShaderModuleId::EmulatedFrag,
            VariantKind::Native64 => ShaderModuleId::NativeFrag,
        }
    }

    /// Depth testing is on for 3D datasets only.
    pub fn depth_test(&self) -> bool {
        self.dims == Dims::Three
    }

    pub fn label(&self) -> String {
        if self.pairwise {
            format!("{}-pairwise", self.kind)
        } else {
            self.kind.to_string()
        }
    }
}
