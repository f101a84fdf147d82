//! Vertex-buffer packing for both variants.

use dualprec::{Dataset, Df64};

use crate::error::{RenderError, Result};
use crate::variant::{PipelineVariant, VariantKind};

/// Largest vertex buffer the packer will allocate on the host.
pub const MAX_VERTEX_BYTES: u64 = 1 << 34;

/// Interleaved vertex data ready for upload.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexBuffer {
    pub bytes: Vec<u8>,
    pub stride: u32,
    pub count: u32,
}

impl VertexBuffer {
    pub fn size(&self) -> u64 {
        self.bytes.len() as u64
    }

    /// The `index`th vertex as raw bytes.
    pub fn vertex(&self, index: usize) -> &[u8] {
        let s = self.stride as usize;
        &self.bytes[index * s..(index + 1) * s]
    }
}

/// How the trailing df64 components are filled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LowPart {
    /// The residual from the split.
    #[default]
    Residual,
    /// Forced to zero, which turns the emulated path into plain binary32.
    Zero,
}

fn split_all(values: &[f64], low: LowPart) -> Result<(Vec<f32>, Vec<f32>)> {
    let mut hi = Vec::with_capacity(values.len());
    let mut lo = Vec::with_capacity(values.len());
    for &v in values {
        let d = Df64::split(v)?;
        hi.push(d.high());
        lo.push(match low {
            LowPart::Residual => d.low(),
            LowPart::Zero => 0.0,
        });
    }
    Ok((hi, lo))
}

fn put_f32(out: &mut Vec<u8>, vs: &[f32]) {
    for v in vs {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn put_f64(out: &mut Vec<u8>, vs: &[f64]) {
    for v in vs {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Packs `dataset` in the attribute order of `variant`.
///
/// Emulated: every coordinate and color channel is split into `(high, low)`
/// and laid out as `highPos, lowPos, highColor, lowColor`. Native: binary64
/// values verbatim as `pos, color`.
pub fn pack_vertices(dataset: &Dataset, variant: &PipelineVariant) -> Result<VertexBuffer> {
    pack_vertices_with(dataset, variant, LowPart::Residual)
}

pub fn pack_vertices_with(
    dataset: &Dataset,
    variant: &PipelineVariant,
    low: LowPart,
) -> Result<VertexBuffer> {
    if dataset.is_empty() {
        return Err(RenderError::Validation(format!(
            "dataset '{}' is empty",
            dataset.name
        )));
    }
    if dataset.dims != variant.dims {
        return Err(RenderError::Validation(format!(
            "dataset '{}' is {}D but the pipeline expects {}D",
            dataset.name,
            dataset.dims.count(),
            variant.dims.count()
        )));
    }
    let requested = dataset.len() as u64 * variant.stride as u64;
    if requested > MAX_VERTEX_BYTES || dataset.len() > u32::MAX as usize {
        return Err(RenderError::Capacity {
            requested_bytes: requested,
            message: format!("vertex buffers are limited to {MAX_VERTEX_BYTES} bytes"),
        });
    }
    let mut bytes = Vec::new();
    bytes
        .try_reserve_exact(requested as usize)
        .map_err(|e| RenderError::Capacity {
            requested_bytes: requested,
            message: e.to_string(),
        })?;
    let n = dataset.dims.count();
    for p in &dataset.points {
        let pos = &p.coords[..n];
        match variant.kind {
            VariantKind::Emulated64 => {
                let (ph, pl) = split_all(pos, low)?;
                let (ch, cl) = split_all(&p.color, low)?;
                put_f32(&mut bytes, &ph);
                put_f32(&mut bytes, &pl);
                put_f32(&mut bytes, &ch);
                put_f32(&mut bytes, &cl);
            }
            VariantKind::Native64 => {
                put_f64(&mut bytes, pos);
                put_f64(&mut bytes, &p.color);
            }
        }
    }
    debug_assert_eq!(bytes.len() as u64, requested);
    Ok(VertexBuffer {
        bytes,
        stride: variant.stride,
        count: dataset.len() as u32,
    })
}

/// One vertex decoded from a packed buffer, widened to binary64 per component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecodedVertex {
    Emulated {
        high_pos: [f32; 3],
        low_pos: [f32; 3],
        high_color: [f32; 3],
        low_color: [f32; 3],
    },
    Native {
        pos: [f64; 3],
        color: [f64; 3],
    },
}

impl DecodedVertex {
    /// Position as the sum of its stored parts, evaluated in binary64.
    pub fn position(&self) -> [f64; 3] {
        match *self {
            DecodedVertex::Emulated {
                high_pos, low_pos, ..
            } => std::array::from_fn(|k| high_pos[k] as f64 + low_pos[k] as f64),
            DecodedVertex::Native { pos, .. } => pos,
        }
    }

    pub fn color(&self) -> [f64; 3] {
        match *self {
            DecodedVertex::Emulated {
                high_color,
                low_color,
                ..
            } => std::array::from_fn(|k| high_color[k] as f64 + low_color[k] as f64),
            DecodedVertex::Native { color, .. } => color,
        }
    }
}

fn f32_at(b: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

/// Reads vertex `index` back. 2D positions come back with `z = 0`.
pub fn decode_vertex(
    buffer: &VertexBuffer,
    variant: &PipelineVariant,
    index: usize,
) -> DecodedVertex {
    let v = buffer.vertex(index);
    let n = variant.dims.count();
    match variant.kind {
        VariantKind::Emulated64 => {
            let mut parts = [[0f32; 3]; 4];
            let mut at = 0;
            for (k, part) in parts.iter_mut().enumerate() {
                let len = if k < 2 { n } else { 3 };
                for c in part.iter_mut().take(len) {
                    *c = f32_at(v, at);
                    at += 4;
                }
            }
            DecodedVertex::Emulated {
                high_pos: parts[0],
                low_pos: parts[1],
                high_color: parts[2],
                low_color: parts[3],
            }
        }
        VariantKind::Native64 => {
            let mut pos = [0.0; 3];
            for (k, c) in pos.iter_mut().take(n).enumerate() {
                *c = f64_at(v, 8 * k);
            }
            let color = std::array::from_fn(|k| f64_at(v, 8 * (n + k)));
            DecodedVertex::Native { pos, color }
        }
    }
}
