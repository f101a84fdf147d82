//! CPU rasterizer that executes the shader programs' arithmetic exactly as
//! written: the emulated shader recombines `highPos + lowPos` in binary32
//! before a binary32 product, the native one multiplies in binary64 and
//! narrows the clip position, and the pairwise extension runs float-float products. Points are
//! one pixel, depth-tested (LESS) for 3D and drawn in order for 2D.

use std::time::Instant;

use dualprec::Dims;
use rayon::prelude::*;

use crate::device::{
    Backend, BackendKind, DeviceInfo, FrameSample, GpuBuffer, Pipeline, BACKGROUND,
};
use crate::error::{RenderError, Result};
use crate::image::Image;
use crate::packing::VertexBuffer;
use crate::shaders::ShaderModule;
use crate::variant::{PipelineVariant, VariantKind};

/// Render pass id shared by every software pipeline.
const RENDER_PASS: u64 = 1;
const CHUNK: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct SoftwareConfig {
    pub shader_float64: bool,
    pub vertex_format64: bool,
    pub max_push_constants_size: u32,
}

impl Default for SoftwareConfig {
    fn default() -> Self {
        SoftwareConfig {
            shader_float64: true,
            vertex_format64: true,
            max_push_constants_size: 128,
        }
    }
}

pub(crate) struct SoftwareDevice {
    info: DeviceInfo,
    pipelines: Vec<PipelineVariant>,
    buffers: Vec<Option<VertexBuffer>>,
}

impl SoftwareDevice {
    pub fn new(config: SoftwareConfig) -> Self {
        SoftwareDevice {
            info: DeviceInfo {
                name: "dualprec software rasterizer".into(),
                backend: BackendKind::Software,
                device_type: "cpu".into(),
                driver: env!("CARGO_PKG_VERSION").into(),
                shader_float64: config.shader_float64,
                vertex_format64: config.vertex_format64,
                max_push_constants_size: config.max_push_constants_size,
                timestamps: false,
                timestamp_period_ns: 1.0,
            },
            pipelines: Vec::new(),
            buffers: Vec::new(),
        }
    }

    fn lookup(
        &self,
        pipeline: &Pipeline,
        buffer: &GpuBuffer,
    ) -> Result<(&PipelineVariant, &VertexBuffer)> {
        let p = self.pipelines.get(pipeline.id);
        let b = self.buffers.get(buffer.id).and_then(Option::as_ref);
        match (p, b) {
            (Some(p), Some(b)) => Ok((p, b)),
            _ => Err(RenderError::Validation(
                "pipeline or buffer belongs to another context, or was released".into(),
            )),
        }
    }
}

impl Backend for SoftwareDevice {
    fn info(&self) -> &DeviceInfo {
        &self.info
    }

    fn create_pipeline(
        &mut self,
        variant: &PipelineVariant,
        _vs: &ShaderModule,
        _fs: &ShaderModule,
    ) -> Result<(usize, u64)> {
        self.pipelines.push(variant.clone());
        Ok((self.pipelines.len() - 1, RENDER_PASS))
    }

    fn create_buffer(&mut self, data: VertexBuffer) -> Result<usize> {
        self.buffers.push(Some(data));
        Ok(self.buffers.len() - 1)
    }

    fn release_buffer(&mut self, id: usize) {
        if let Some(slot) = self.buffers.get_mut(id) {
            *slot = None;
        }
    }

    fn draw(
        &mut self,
        pipeline: &Pipeline,
        buffer: &GpuBuffer,
        push: &[u8],
        extent: (u32, u32),
        frames: u32,
    ) -> Result<Vec<FrameSample>> {
        let (variant, data) = self.lookup(pipeline, buffer)?;
        let mut target = Target::new(extent);
        let mut out = Vec::with_capacity(frames as usize);
        for _ in 0..frames {
            let start = Instant::now();
            target.clear();
            rasterize(variant, data, push, &mut target);
            out.push(FrameSample {
                gpu_ms: None,
                wall: start.elapsed(),
            });
        }
        Ok(out)
    }

    fn capture(
        &mut self,
        pipeline: &Pipeline,
        buffer: &GpuBuffer,
        push: &[u8],
        extent: (u32, u32),
    ) -> Result<Image> {
        let (variant, data) = self.lookup(pipeline, buffer)?;
        let mut target = Target::new(extent);
        rasterize(variant, data, push, &mut target);
        Ok(Image {
            width: extent.0,
            height: extent.1,
            rgba: target.color,
        })
    }
}

struct Target {
    width: u32,
    height: u32,
    color: Vec<u8>,
    depth: Vec<f32>,
}

impl Target {
    fn new((width, height): (u32, u32)) -> Target {
        let n = width as usize * height as usize;
        Target {
            width,
            height,
            color: BACKGROUND.repeat(n),
            depth: vec![1.0; n],
        }
    }

    fn clear(&mut self) {
        for p in self.color.chunks_exact_mut(4) {
            p.copy_from_slice(&BACKGROUND);
        }
        self.depth.fill(1.0);
    }
}

fn f32_at(b: &[u8], at: usize) -> f32 {
    f32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

/// Shader-side float-float helpers, mirroring the GLSL of the pairwise variant.
fn two_sum(a: f32, b: f32) -> (f32, f32) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn fast_two_sum(a: f32, b: f32) -> (f32, f32) {
    let s = a + b;
    (s, b - (s - a))
}

fn split(a: f32) -> (f32, f32) {
    let t = 4097.0 * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

fn two_prod(a: f32, b: f32) -> (f32, f32) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

fn df_add(a: (f32, f32), b: (f32, f32)) -> (f32, f32) {
    let s = two_sum(a.0, b.0);
    let t = two_sum(a.1, b.1);
    let s = fast_two_sum(s.0, s.1 + t.0);
    fast_two_sum(s.0, s.1 + t.1)
}

fn df_mul(a: (f32, f32), b: (f32, f32)) -> (f32, f32) {
    let p = two_prod(a.0, b.0);
    fast_two_sum(p.0, p.1 + (a.0 * b.1 + a.1 * b.0))
}

/// Vertex stage: clip position in binary32 and the fragment color.
type Shaded = ([f32; 4], [f32; 3]);

enum Program {
    Emulated([f32; 16]),
    Pairwise([f32; 16], [f32; 16]),
    Native([f64; 16]),
}

impl Program {
    fn new(variant: &PipelineVariant, push: &[u8]) -> Program {
        let f32s =
            |from: usize| -> [f32; 16] { std::array::from_fn(|k| f32_at(push, from + 4 * k)) };
        match (variant.kind, variant.pairwise) {
            (VariantKind::Emulated64, false) => Program::Emulated(f32s(0)),
            (VariantKind::Emulated64, true) => Program::Pairwise(f32s(0), f32s(64)),
            (VariantKind::Native64, _) => {
                Program::Native(std::array::from_fn(|k| f64_at(push, 8 * k)))
            }
        }
    }

    fn shade(&self, v: &[u8], dims: Dims) -> Shaded {
        let n = dims.count();
        match self {
            Program::Emulated(m) => {
                let mut pos = [0f32; 3];
                for (k, p) in pos.iter_mut().take(n).enumerate() {
                    *p = f32_at(v, 4 * k) + f32_at(v, 4 * (n + k));
                }
                let clip = std::array::from_fn(|r| {
                    m[r] * pos[0] + m[4 + r] * pos[1] + m[8 + r] * pos[2] + m[12 + r]
                });
                (clip, emulated_color(v, n))
            }
            Program::Pairwise(hi, lo) => {
                let mut parts = [(0f32, 0f32); 4];
                for (k, p) in parts.iter_mut().take(n).enumerate() {
                    *p = (f32_at(v, 4 * k), f32_at(v, 4 * (n + k)));
                }
                parts[3] = (1.0, 0.0);
                let clip = std::array::from_fn(|r| {
                    let mut acc = df_mul((hi[r], lo[r]), parts[0]);
                    for c in 1..4 {
                        acc = df_add(acc, df_mul((hi[4 * c + r], lo[4 * c + r]), parts[c]));
                    }
                    acc.0 + acc.1
                });
                (clip, emulated_color(v, n))
            }
            Program::Native(m) => {
                let mut pos = [0f64; 3];
                for (k, p) in pos.iter_mut().take(n).enumerate() {
                    *p = f64_at(v, 8 * k);
                }
                let clip = std::array::from_fn(|r| {
                    (m[r] * pos[0] + m[4 + r] * pos[1] + m[8 + r] * pos[2] + m[12 + r]) as f32
                });
                let color = std::array::from_fn(|k| f64_at(v, 8 * (n + k)) as f32);
                (clip, color)
            }
        }
    }
}

fn emulated_color(v: &[u8], n: usize) -> [f32; 3] {
    let base = 4 * 2 * n;
    std::array::from_fn(|k| f32_at(v, base + 4 * k) + f32_at(v, base + 12 + 4 * k))
}

fn unorm8(c: f32) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Clip test, perspective divide and viewport transform. Returns the pixel
/// index and depth of a point that survives.
fn place(clip: [f32; 4], width: u32, height: u32) -> Option<(usize, f32)> {
    let [x, y, z, w] = clip;
    if w.is_nan() || w <= 0.0 || x < -w || x > w || y < -w || y > w || z < 0.0 || z > w {
        return None;
    }
    let (nx, ny, nz) = (x / w, y / w, z / w);
    let fx = (nx * 0.5 + 0.5) * width as f32;
    let fy = (ny * 0.5 + 0.5) * height as f32;
    // pixel whose center lies in [f - 0.5, f + 0.5)
    let px = fx.ceil() as i64 - 1;
    let py = fy.ceil() as i64 - 1;
    if px < 0 || py < 0 || px >= width as i64 || py >= height as i64 {
        return None;
    }
    Some((py as usize * width as usize + px as usize, nz))
}

fn rasterize(variant: &PipelineVariant, data: &VertexBuffer, push: &[u8], target: &mut Target) {
    let program = Program::new(variant, push);
    let stride = data.stride as usize;
    let (w, h) = (target.width, target.height);
    let depth_test = variant.depth_test();
    for block in data.bytes.chunks(stride * CHUNK * 16) {
        let fragments: Vec<Option<(usize, f32, [u8; 4])>> = block
            .par_chunks(stride * CHUNK)
            .flat_map_iter(|chunk| {
                chunk.chunks_exact(stride).map(|v| {
                    let (clip, color) = program.shade(v, variant.dims);
                    place(clip, w, h).map(|(i, d)| {
                        (
                            i,
                            d,
                            [unorm8(color[0]), unorm8(color[1]), unorm8(color[2]), 255],
                        )
                    })
                })
            })
            .collect();
        for (i, d, rgba) in fragments.into_iter().flatten() {
            if depth_test {
                if d.is_nan() || d >= target.depth[i] {
                    continue;
                }
                target.depth[i] = d;
            }
            target.color[4 * i..4 * i + 4].copy_from_slice(&rgba);
        }
    }
}
