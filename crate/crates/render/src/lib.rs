//! Point-cloud rendering through two interchangeable pipelines: native
//! binary64 (`dvec3` attributes, `dmat4` push constants) and emulated double
//! precision (high/low binary32 pairs).
//!
//! A [`Context`] wraps either a Vulkan device or the software rasterizer,
//! which executes the same shader arithmetic on the CPU. Shader binaries are
//! checksum-verified and reflected against the [`PipelineVariant`] layout
//! before a pipeline is built.
//!
//! ```no_run
//! use dualprec::fractal::{sierpinski_points, SierpinskiParams};
//! use dualprec_render::*;
//!
//! let data = sierpinski_points(&SierpinskiParams::default())?;
//! let mut ctx = init_context(&ContextOptions::default())?;
//! let variant = PipelineVariant::emulated(data.dims);
//! let pipeline = build_pipeline(&mut ctx, &variant)?;
//! let buffer = upload_dataset(&mut ctx, &data, &variant)?;
//! let camera = CameraState::framing(&dualprec::dataset_stats(&data)?);
//! let m = render_and_measure(&mut ctx, &pipeline, &buffer, &camera, 30)?;
//! println!("{m}");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod camera;
pub mod device;
pub mod error;
pub mod image;
pub mod metrics;
pub mod packing;
pub mod shaders;
pub mod software;
pub mod spirv;
pub mod variant;
#[cfg(feature = "window")]
pub mod viewer;
mod vulkan;

pub use camera::{camera_update, CameraState, InputEvent};
pub use device::{
    build_pipeline, init_context, offscreen_capture, push_constants, release_buffer,
    render_and_measure, upload_dataset, upload_dataset_with, BackendKind, BackendPreference,
    Context, ContextOptions, DeviceInfo, GpuBuffer, Pipeline,
};
pub use error::{RenderError, Result};
pub use image::{Image, ImageDiff, ImageFormat};
pub use metrics::{CameraMailbox, FpsCounter, FrameMetrics, MetricsSnapshot, TimingSource};
pub use packing::{pack_vertices, LowPart, VertexBuffer};
pub use software::SoftwareConfig;
pub use variant::{AttributeFormat, DeviceFeature, PipelineVariant, VariantKind, VertexAttribute};
