//! Backend-neutral context and the render operations.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use dualprec::precision::Mat4;
use dualprec::{Dataset, Df64, Dims};

use crate::camera::CameraState;
use crate::error::{RenderError, Result};
use crate::image::Image;
use crate::metrics::{median, FrameMetrics, TimingSource};
use crate::packing::{pack_vertices_with, LowPart, VertexBuffer};
use crate::shaders::{ShaderModule, ShaderSet};
use crate::software::{SoftwareConfig, SoftwareDevice};
use crate::spirv::ShaderInterface;
use crate::variant::{DeviceFeature, PipelineVariant, VariantKind};

/// Offscreen size used by [`render_and_measure`] unless overridden.
pub const DEFAULT_RESOLUTION: (u32, u32) = (1024, 1024);
/// Cleared color of every frame.
pub const BACKGROUND: [u8; 4] = [0, 0, 0, 255];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Vulkan,
    Software,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BackendPreference {
    /// Vulkan when a loader and a device are present, else software.
    #[default]
    Auto,
    Vulkan,
    Software,
}

impl FromStr for BackendPreference {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(BackendPreference::Auto),
            "vulkan" => Ok(BackendPreference::Vulkan),
            "software" | "cpu" => Ok(BackendPreference::Software),
            other => Err(RenderError::Validation(format!(
                "unknown backend '{other}' (expected auto, vulkan or software)"
            ))),
        }
    }
}

/// What the selected device can do.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceInfo {
    pub name: String,
    pub backend: BackendKind,
    pub device_type: String,
    pub driver: String,
    pub shader_float64: bool,
    pub vertex_format64: bool,
    pub max_push_constants_size: u32,
    pub timestamps: bool,
    pub timestamp_period_ns: f64,
}

impl DeviceInfo {
    pub fn supports(&self, feature: DeviceFeature) -> bool {
        match feature {
            DeviceFeature::ShaderFloat64 => self.shader_float64,
            DeviceFeature::VertexFormat64 => self.vertex_format64,
        }
    }

    /// One-line identification for report headers.
    pub fn descriptor(&self) -> String {
        format!(
            "{} ({}, {}, {})",
            self.name,
            self.device_type,
            self.driver,
            match self.backend {
                BackendKind::Vulkan => "vulkan",
                BackendKind::Software => "software",
            }
        )
    }
}

impl fmt::Display for DeviceInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

#[derive(Clone, Debug)]
pub struct ContextOptions {
    /// Offscreen rendering only. Windowed contexts are created by the viewer.
    pub headless: bool,
    pub backend: BackendPreference,
    /// Index into the enumerated physical devices, bypassing the preference order.
    pub device_index: Option<usize>,
    /// Shader binaries; `None` uses [`crate::shaders::default_shader_dir`].
    pub shader_dir: Option<PathBuf>,
    /// Target size for [`render_and_measure`].
    pub resolution: (u32, u32),
    pub software: SoftwareConfig,
    /// Enables the Khronos validation layer when it is installed.
    pub validation: bool,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            headless: true,
            backend: BackendPreference::Auto,
            device_index: None,
            shader_dir: None,
            resolution: DEFAULT_RESOLUTION,
            software: SoftwareConfig::default(),
            validation: false,
        }
    }
}

/// A built pipeline. Handles are only valid on the context that made them.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub(crate) id: usize,
    pub variant: PipelineVariant,
    /// Identifies the render pass; pipelines sharing it can draw into the same target.
    pub render_pass: u64,
    pub vertex: ShaderInterface,
    pub fragment: ShaderInterface,
}

/// An uploaded vertex buffer.
#[derive(Clone, Debug)]
pub struct GpuBuffer {
    pub(crate) id: usize,
    pub kind: VariantKind,
    pub dims: Dims,
    pub count: u32,
    pub stride: u32,
    pub size: u64,
}

/// Timing of one submitted frame.
#[derive(Clone, Copy, Debug)]
pub(crate) struct FrameSample {
    pub gpu_ms: Option<f64>,
    pub wall: Duration,
}

pub(crate) trait Backend {
    fn info(&self) -> &DeviceInfo;
    /// Returns the pipeline slot and the render pass id.
    fn create_pipeline(
        &mut self,
        variant: &PipelineVariant,
        vs: &ShaderModule,
        fs: &ShaderModule,
    ) -> Result<(usize, u64)>;
    fn create_buffer(&mut self, data: VertexBuffer) -> Result<usize>;
    fn release_buffer(&mut self, id: usize);
    fn draw(
        &mut self,
        pipeline: &Pipeline,
        buffer: &GpuBuffer,
        push: &[u8],
        extent: (u32, u32),
        frames: u32,
    ) -> Result<Vec<FrameSample>>;
    fn capture(
        &mut self,
        pipeline: &Pipeline,
        buffer: &GpuBuffer,
        push: &[u8],
        extent: (u32, u32),
    ) -> Result<Image>;
}

/// An initialized device plus the shader binaries it builds pipelines from.
pub struct Context {
    backend: Box<dyn Backend>,
    shaders: ShaderSet,
    resolution: (u32, u32),
    frames_rendered: u64,
    last_draw_vertices: Option<u32>,
    fallback: Option<String>,
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Context")
            .field("device", self.backend.info())
            .field("shaders", &self.shaders.dir())
            .field("resolution", &self.resolution)
            .finish()
    }
}

impl Context {
    pub fn info(&self) -> &DeviceInfo {
        self.backend.info()
    }

    pub fn resolution(&self) -> (u32, u32) {
        self.resolution
    }

    /// Why `Auto` fell back to the software backend, if it did.
    pub fn fallback_reason(&self) -> Option<&str> {
        self.fallback.as_deref()
    }

    /// Vertex count of the most recent draw.
    pub fn last_draw_vertex_count(&self) -> Option<u32> {
        self.last_draw_vertices
    }

    pub(crate) fn from_backend(
        backend: Box<dyn Backend>,
        shaders: ShaderSet,
        resolution: (u32, u32),
    ) -> Context {
        Context {
            backend,
            shaders,
            resolution,
            frames_rendered: 0,
            last_draw_vertices: None,
            fallback: None,
        }
    }
}

/// Creates a headless context.
///
/// Fails with [`RenderError::Device`] when no usable device exists (or when a
/// windowed context is asked for; the viewer owns those).
pub fn init_context(options: &ContextOptions) -> Result<Context> {
    if !options.headless {
        return Err(RenderError::Device(
            "a windowed context needs a window; use the viewer, or a headless context for offscreen work".into(),
        ));
    }
    if options.resolution.0 == 0 || options.resolution.1 == 0 {
        return Err(RenderError::Validation(
            "resolution must be positive".into(),
        ));
    }
    let shaders = match &options.shader_dir {
        Some(dir) => ShaderSet::open(dir.clone())?,
        None => ShaderSet::open_default()?,
    };
    let software =
        || -> Box<dyn Backend> { Box::new(SoftwareDevice::new(options.software.clone())) };
    match options.backend {
        BackendPreference::Software => Ok(Context::from_backend(
            software(),
            shaders,
            options.resolution,
        )),
        BackendPreference::Vulkan => {
            let dev = crate::vulkan::VulkanDevice::headless(options)?;
            Ok(Context::from_backend(
                Box::new(dev),
                shaders,
                options.resolution,
            ))
        }
        BackendPreference::Auto => match crate::vulkan::VulkanDevice::headless(options) {
            Ok(dev) => Ok(Context::from_backend(
                Box::new(dev),
                shaders,
                options.resolution,
            )),
            Err(RenderError::Device(reason)) => {
                let mut ctx = Context::from_backend(software(), shaders, options.resolution);
                ctx.fallback = Some(reason);
                Ok(ctx)
            }
            Err(e) => Err(e),
        },
    }
}

/// Fails with a feature error when `info` cannot run `variant`.
pub(crate) fn check_support(info: &DeviceInfo, variant: &PipelineVariant) -> Result<()> {
    for &f in &variant.required_features {
        if !info.supports(f) {
            return Err(RenderError::Feature {
                feature: f.to_string(),
                device: info.name.clone(),
                remediation: format!(
                    "the {} variant cannot run here; use the emulated64 variant or pick another device",
                    variant.label()
                ),
            });
        }
    }
    if variant.push_constant_size > info.max_push_constants_size {
        return Err(RenderError::Feature {
            feature: format!("{} bytes of push constants", variant.push_constant_size),
            device: info.name.clone(),
            remediation: format!("the device allows {} bytes", info.max_push_constants_size),
        });
    }
    Ok(())
}

/// Checks device features and limits, loads and checks the shaders, and
/// builds the pipeline.
pub fn build_pipeline(ctx: &mut Context, variant: &PipelineVariant) -> Result<Pipeline> {
    check_support(ctx.backend.info(), variant)?;
    let (vs, fs) = ctx.shaders.load_variant(variant)?;
    let (id, render_pass) = ctx.backend.create_pipeline(variant, &vs, &fs)?;
    Ok(Pipeline {
        id,
        variant: variant.clone(),
        render_pass,
        vertex: vs.interface,
        fragment: fs.interface,
    })
}

/// Packs and uploads `dataset` for `variant`.
pub fn upload_dataset(
    ctx: &mut Context,
    dataset: &Dataset,
    variant: &PipelineVariant,
) -> Result<GpuBuffer> {
    upload_dataset_with(ctx, dataset, variant, LowPart::Residual)
}

pub fn upload_dataset_with(
    ctx: &mut Context,
    dataset: &Dataset,
    variant: &PipelineVariant,
    low: LowPart,
) -> Result<GpuBuffer> {
    let data = pack_vertices_with(dataset, variant, low)?;
    let (count, stride, size) = (data.count, data.stride, data.size());
    let id = ctx.backend.create_buffer(data)?;
    Ok(GpuBuffer {
        id,
        kind: variant.kind,
        dims: variant.dims,
        count,
        stride,
        size,
    })
}

/// Frees the buffer's memory. Draws with any copy of the handle fail afterwards.
pub fn release_buffer(ctx: &mut Context, buffer: GpuBuffer) {
    ctx.backend.release_buffer(buffer.id);
}

/// Push-constant bytes for `variant`: column-major `mat4` (64 bytes),
/// `dmat4` (128 bytes), or high and low `mat4` halves for the pairwise product.
pub fn push_constants(variant: &PipelineVariant, mvp: &Mat4) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(variant.push_constant_size as usize);
    match (variant.kind, variant.pairwise) {
        (VariantKind::Native64, _) => {
            for v in mvp.to_cols_f64() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        (VariantKind::Emulated64, false) => {
            for v in mvp.to_cols_f32() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        (VariantKind::Emulated64, true) => {
            let split = mvp.to_cols_f64().map(Df64::split);
            let mut lows = Vec::with_capacity(64);
            for d in split {
                let d = d?;
                out.extend_from_slice(&d.high().to_le_bytes());
                lows.extend_from_slice(&d.low().to_le_bytes());
            }
            out.extend(lows);
        }
    }
    debug_assert_eq!(out.len() as u32, variant.push_constant_size);
    Ok(out)
}

fn check_pair(pipeline: &Pipeline, buffer: &GpuBuffer) -> Result<()> {
    if pipeline.variant.kind != buffer.kind || pipeline.variant.dims != buffer.dims {
        return Err(RenderError::Validation(format!(
            "a {} {}D buffer cannot feed the {} {}D pipeline",
            buffer.kind,
            buffer.dims.count(),
            pipeline.variant.label(),
            pipeline.variant.dims.count()
        )));
    }
    Ok(())
}

fn aspect(extent: (u32, u32)) -> f64 {
    extent.0 as f64 / extent.1 as f64
}

/// Draws the whole buffer `frames` times at the context resolution.
///
/// `gpu_render_ms` is the median of per-frame timestamp deltas; where the
/// device has no timestamps it is the median wall-clock frame time and
/// `timing` says so. `fps` is frames over the wall time of the whole window.
pub fn render_and_measure(
    ctx: &mut Context,
    pipeline: &Pipeline,
    buffer: &GpuBuffer,
    camera: &CameraState,
    frames: u32,
) -> Result<FrameMetrics> {
    if frames == 0 {
        return Err(RenderError::Validation("frames must be at least 1".into()));
    }
    check_pair(pipeline, buffer)?;
    let extent = ctx.resolution;
    let push = push_constants(&pipeline.variant, &camera.mvp(aspect(extent)))?;
    let start = Instant::now();
    let samples = ctx.backend.draw(pipeline, buffer, &push, extent, frames)?;
    let wall = start.elapsed().as_secs_f64();
    ctx.frames_rendered += frames as u64;
    ctx.last_draw_vertices = Some(buffer.count);
    let gpu: Option<Vec<f64>> = samples.iter().map(|s| s.gpu_ms).collect();
    let (ms, timing) = match gpu {
        Some(g) => {
            // one timestamp tick is the resolution floor
            let tick = ctx.backend.info().timestamp_period_ns * 1e-6;
            (
                median(&g).unwrap_or(0.0).max(tick),
                TimingSource::GpuTimestamp,
            )
        }
        None => {
            let w: Vec<f64> = samples.iter().map(|s| s.wall.as_secs_f64() * 1e3).collect();
            (median(&w).unwrap_or(0.0).max(1e-6), TimingSource::WallClock)
        }
    };
    Ok(FrameMetrics {
        gpu_render_ms: ms,
        fps: frames as f64 / wall.max(1e-9),
        frame_index: ctx.frames_rendered,
        timing,
    })
}

/// Renders one frame offscreen at `resolution` and reads it back as RGBA.
pub fn offscreen_capture(
    ctx: &mut Context,
    pipeline: &Pipeline,
    buffer: &GpuBuffer,
    camera: &CameraState,
    resolution: (u32, u32),
) -> Result<Image> {
    if resolution.0 == 0 || resolution.1 == 0 {
        return Err(RenderError::Validation(
            "capture resolution must be positive".into(),
        ));
    }
    check_pair(pipeline, buffer)?;
    let push = push_constants(&pipeline.variant, &camera.mvp(aspect(resolution)))?;
    let img = ctx.backend.capture(pipeline, buffer, &push, resolution)?;
    ctx.frames_rendered += 1;
    ctx.last_draw_vertices = Some(buffer.count);
    Ok(img)
}
