//! Interactive window: orbit with the left mouse button, zoom with the wheel.
//! The title shows the variant, the last GPU frame time and the FPS.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use ash::vk;
use dualprec::Dataset;
use raw_window_handle::{HasDisplayHandle, HasWindowHandle};
use winit::application::ApplicationHandler;
use winit::dpi::{LogicalSize, PhysicalPosition};
use winit::event::{ElementState, MouseButton, MouseScrollDelta, WindowEvent};
use winit::event_loop::{ActiveEventLoop, EventLoop};
use winit::window::{Window, WindowId};

use crate::camera::{camera_update, CameraState, InputEvent};
use crate::device::{check_support, push_constants};
use crate::error::{RenderError, Result, VkResultExt};
use crate::metrics::{CameraMailbox, FpsCounter, FrameMetrics, TimingSource};
use crate::packing::pack_vertices;
use crate::shaders::ShaderSet;
use crate::variant::PipelineVariant;
use crate::vulkan::{create_pipeline, create_render_pass, record_draw, DrawCall, Gpu, GpuRequest};

/// Radians of orbit per pixel of drag.
pub const DRAG_SENSITIVITY: f64 = 0.01;
/// Pixels of trackpad scroll per wheel step.
const PIXELS_PER_STEP: f64 = 50.0;

#[derive(Clone, Debug)]
pub struct ViewerOptions {
    pub variant: PipelineVariant,
    pub size: (u32, u32),
    pub device_index: Option<usize>,
    pub shader_dir: Option<PathBuf>,
    pub validation: bool,
    /// Close after this many frames; `None` runs until the window closes.
    pub max_frames: Option<u64>,
}

impl ViewerOptions {
    pub fn new(variant: PipelineVariant) -> Self {
        ViewerOptions {
            variant,
            size: (1024, 1024),
            device_index: None,
            shader_dir: None,
            validation: false,
            max_frames: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ViewerSummary {
    pub frames: u64,
    pub last: Option<FrameMetrics>,
}

fn no_display(e: impl std::fmt::Display) -> RenderError {
    RenderError::Device(format!(
        "no window system available ({e}); run `dpbench bench --headless` instead"
    ))
}

/// Opens a window and renders `dataset` until it is closed.
pub fn run_viewer(dataset: &Dataset, options: ViewerOptions) -> Result<ViewerSummary> {
    let event_loop = EventLoop::new().map_err(no_display)?;
    let camera = CameraState::framing(&dualprec::dataset_stats(dataset)?);
    let mut app = App {
        dataset,
        options,
        camera,
        mailbox: CameraMailbox::new(),
        fps: FpsCounter::new(Duration::from_secs(1)),
        drag: None,
        cursor: None,
        running: None,
        error: None,
        summary: ViewerSummary::default(),
    };
    event_loop.run_app(&mut app).map_err(no_display)?;
    match app.error {
        Some(e) => Err(e),
        None => Ok(app.summary),
    }
}

struct App<'a> {
    dataset: &'a Dataset,
    options: ViewerOptions,
    camera: CameraState,
    mailbox: CameraMailbox,
    fps: FpsCounter,
    drag: Option<PhysicalPosition<f64>>,
    cursor: Option<PhysicalPosition<f64>>,
    running: Option<(Window, WindowRenderer)>,
    error: Option<RenderError>,
    summary: ViewerSummary,
}

impl App<'_> {
    fn input(&mut self, event: InputEvent) {
        self.camera = camera_update(self.camera, event);
        self.mailbox.post(self.camera);
    }

    fn fail(&mut self, event_loop: &ActiveEventLoop, e: RenderError) {
        self.error = Some(e);
        self.running = None;
        event_loop.exit();
    }

    fn redraw(&mut self, event_loop: &ActiveEventLoop) {
        let Some((window, renderer)) = self.running.as_mut() else {
            return;
        };
        if let Some(c) = self.mailbox.take() {
            renderer.camera = c;
        }
        match renderer.draw() {
            Ok(Some(ms)) => {
                self.summary.frames += 1;
                let fps = self.fps.tick(Instant::now());
                let (ms, timing) = match ms {
                    (Some(g), _) => (g, TimingSource::GpuTimestamp),
                    (None, w) => (w, TimingSource::WallClock),
                };
                self.summary.last = Some(FrameMetrics {
                    gpu_render_ms: ms,
                    fps,
                    frame_index: self.summary.frames,
                    timing,
                });
                window.set_title(&format!(
                    "dualprec | {} | {} points | {ms:.3} ms ({timing}) | {fps:.1} fps",
                    self.options.variant.label(),
                    self.dataset.len()
                ));
                if self
                    .options
                    .max_frames
                    .is_some_and(|m| self.summary.frames >= m)
                {
                    self.running = None;
                    event_loop.exit();
                    return;
                }
            }
            Ok(None) => {}
            Err(e) => return self.fail(event_loop, e),
        }
        if let Some((window, _)) = &self.running {
            window.request_redraw();
        }
    }
}

impl ApplicationHandler for App<'_> {
    fn resumed(&mut self, event_loop: &ActiveEventLoop) {
        if self.running.is_some() {
            return;
        }
        let attrs = Window::default_attributes()
            .with_title(format!("dualprec | {}", self.options.variant.label()))
            .with_inner_size(LogicalSize::new(self.options.size.0, self.options.size.1));
        let window = match event_loop.create_window(attrs) {
            Ok(w) => w,
            Err(e) => return self.fail(event_loop, no_display(e)),
        };
        match WindowRenderer::new(&window, self.dataset, &self.options, self.camera) {
            Ok(r) => {
                window.request_redraw();
                self.running = Some((window, r));
            }
            Err(e) => self.fail(event_loop, e),
        }
    }

    fn window_event(&mut self, event_loop: &ActiveEventLoop, _id: WindowId, event: WindowEvent) {
        match event {
            WindowEvent::CloseRequested => {
                self.running = None;
                event_loop.exit();
            }
            WindowEvent::Resized(size) => {
                if let Some((_, r)) = self.running.as_mut() {
                    r.wanted = vk::Extent2D {
                        width: size.width,
                        height: size.height,
                    };
                    r.stale = true;
                }
            }
            WindowEvent::MouseInput {
                state,
                button: MouseButton::Left,
                ..
            } => {
                self.drag = (state == ElementState::Pressed)
                    .then_some(self.cursor)
                    .flatten();
            }
            WindowEvent::CursorMoved { position, .. } => {
                self.cursor = Some(position);
                if let Some(from) = self.drag {
                    self.drag = Some(position);
                    self.input(InputEvent::Drag {
                        dx: (position.x - from.x) * DRAG_SENSITIVITY,
                        dy: (position.y - from.y) * DRAG_SENSITIVITY,
                    });
                }
            }
            WindowEvent::MouseWheel { delta, .. } => {
                let steps = match delta {
                    MouseScrollDelta::LineDelta(_, y) => y as f64,
                    MouseScrollDelta::PixelDelta(p) => p.y / PIXELS_PER_STEP,
                };
                self.input(InputEvent::Scroll { steps });
            }
            WindowEvent::RedrawRequested => self.redraw(event_loop),
            _ => {}
        }
    }
}

struct Swapchain {
    handle: vk::SwapchainKHR,
    extent: vk::Extent2D,
    views: Vec<vk::ImageView>,
    depth: (vk::Image, vk::DeviceMemory, vk::ImageView),
    framebuffers: Vec<vk::Framebuffer>,
    rendered: Vec<vk::Semaphore>,
}

struct WindowRenderer {
    camera: CameraState,
    wanted: vk::Extent2D,
    stale: bool,
    variant: PipelineVariant,
    loader: ash::khr::swapchain::Device,
    format: vk::SurfaceFormatKHR,
    render_pass: vk::RenderPass,
    pipeline: (vk::Pipeline, vk::PipelineLayout),
    vertices: (vk::Buffer, vk::DeviceMemory),
    count: u32,
    acquired: vk::Semaphore,
    chain: Option<Swapchain>,
    // dropped last
    gpu: Gpu,
}

impl WindowRenderer {
    fn new(
        window: &Window,
        dataset: &Dataset,
        options: &ViewerOptions,
        camera: CameraState,
    ) -> Result<Self> {
        let display = window.display_handle().map_err(no_display)?.as_raw();
        let handle = window.window_handle().map_err(no_display)?.as_raw();
        let extensions = ash_window::enumerate_required_extensions(display)
            .map_err(|r| no_display(format!("no Vulkan surface support: {r}")))?
            .to_vec();
        let make = move |entry: &ash::Entry, instance: &ash::Instance| unsafe {
            ash_window::create_surface(entry, instance, display, handle, None)
        };
        let gpu = Gpu::new(&GpuRequest {
            device_index: options.device_index,
            validation: options.validation,
            instance_extensions: extensions,
            surface: Some(&make),
        })?;
        check_support(&gpu.info, &options.variant)?;
        let shaders = match &options.shader_dir {
            Some(d) => ShaderSet::open(d)?,
            None => ShaderSet::open_default()?,
        };
        let (vs, fs) = shaders.load_variant(&options.variant)?;
        let (surface_loader, surface) = gpu.inst.surface.as_ref().expect("surface requested");
        let formats =
            unsafe { surface_loader.get_physical_device_surface_formats(gpu.physical, *surface) }
                .call("vkGetPhysicalDeviceSurfaceFormatsKHR")?;
        let format = formats
            .iter()
            .copied()
            .find(|f| {
                matches!(
                    f.format,
                    vk::Format::B8G8R8A8_UNORM | vk::Format::R8G8B8A8_UNORM
                ) && f.color_space == vk::ColorSpaceKHR::SRGB_NONLINEAR
            })
            .or_else(|| formats.first().copied())
            .ok_or_else(|| RenderError::Device("the surface reports no formats".into()))?;
        let packed = pack_vertices(dataset, &options.variant)?;
        let count = packed.count;
        let loader = ash::khr::swapchain::Device::new(&gpu.inst.instance, &gpu.device);
        let acquired = unsafe {
            gpu.device
                .create_semaphore(&vk::SemaphoreCreateInfo::default(), None)
        }
        .call("vkCreateSemaphore")?;
        // partially built state is released by Drop from here on
        let size = window.inner_size();
        let mut r = WindowRenderer {
            camera,
            wanted: vk::Extent2D {
                width: size.width,
                height: size.height,
            },
            stale: true,
            variant: options.variant.clone(),
            loader,
            format,
            render_pass: vk::RenderPass::null(),
            pipeline: (vk::Pipeline::null(), vk::PipelineLayout::null()),
            vertices: (vk::Buffer::null(), vk::DeviceMemory::null()),
            count,
            acquired,
            chain: None,
            gpu,
        };
        r.render_pass =
            create_render_pass(&r.gpu, format.format, vk::ImageLayout::PRESENT_SRC_KHR)?;
        r.pipeline = create_pipeline(&r.gpu, r.render_pass, &r.variant, &vs, &fs)?;
        r.vertices = r.gpu.upload_vertices(&packed.bytes)?;
        Ok(r)
    }

    fn destroy_chain(&mut self) {
        let Some(c) = self.chain.take() else {
            return;
        };
        let d = &self.gpu.device;
        unsafe {
            let _ = d.device_wait_idle();
            for fb in c.framebuffers {
                d.destroy_framebuffer(fb, None);
            }
            for v in c.views {
                d.destroy_image_view(v, None);
            }
            for s in c.rendered {
                d.destroy_semaphore(s, None);
            }
            d.destroy_image_view(c.depth.2, None);
            d.destroy_image(c.depth.0, None);
            d.free_memory(c.depth.1, None);
            self.loader.destroy_swapchain(c.handle, None);
        }
    }

    fn rebuild(&mut self) -> Result<bool> {
        let (surface_loader, surface) = self.gpu.inst.surface.as_ref().expect("surface requested");
        let surface = *surface;
        let caps = unsafe {
            surface_loader.get_physical_device_surface_capabilities(self.gpu.physical, surface)
        }
        .call("vkGetPhysicalDeviceSurfaceCapabilitiesKHR")?;
        let extent = if caps.current_extent.width != u32::MAX {
            caps.current_extent
        } else {
            vk::Extent2D {
                width: self
                    .wanted
                    .width
                    .clamp(caps.min_image_extent.width, caps.max_image_extent.width),
                height: self
                    .wanted
                    .height
                    .clamp(caps.min_image_extent.height, caps.max_image_extent.height),
            }
        };
        self.destroy_chain();
        if extent.width == 0 || extent.height == 0 {
            // minimized
            return Ok(false);
        }
        let mut images = (caps.min_image_count + 1).max(2);
        if caps.max_image_count > 0 {
            images = images.min(caps.max_image_count);
        }
        let info = vk::SwapchainCreateInfoKHR::default()
            .surface(surface)
            .min_image_count(images)
            .image_format(self.format.format)
            .image_color_space(self.format.color_space)
            .image_extent(extent)
            .image_array_layers(1)
            .image_usage(vk::ImageUsageFlags::COLOR_ATTACHMENT)
            .image_sharing_mode(vk::SharingMode::EXCLUSIVE)
            .pre_transform(caps.current_transform)
            .composite_alpha(vk::CompositeAlphaFlagsKHR::OPAQUE)
            .present_mode(vk::PresentModeKHR::FIFO)
            .clipped(true);
        let handle =
            unsafe { self.loader.create_swapchain(&info, None) }.call("vkCreateSwapchainKHR")?;
        let g = &self.gpu;
        let depth = g.create_image(
            extent,
            g.depth_format,
            vk::ImageUsageFlags::DEPTH_STENCIL_ATTACHMENT,
            vk::ImageAspectFlags::DEPTH,
        )?;
        let mut chain = Swapchain {
            handle,
            extent,
            views: Vec::new(),
            depth,
            framebuffers: Vec::new(),
            rendered: Vec::new(),
        };
        let result = (|| -> Result<()> {
            for image in unsafe { self.loader.get_swapchain_images(handle) }
                .call("vkGetSwapchainImagesKHR")?
            {
                let view = g.create_view(image, self.format.format, vk::ImageAspectFlags::COLOR)?;
                chain.views.push(view);
                let attachments = [view, chain.depth.2];
                let fb = vk::FramebufferCreateInfo::default()
                    .render_pass(self.render_pass)
                    .attachments(&attachments)
                    .width(extent.width)
                    .height(extent.height)
                    .layers(1);
                chain.framebuffers.push(
                    unsafe { g.device.create_framebuffer(&fb, None) }
                        .call("vkCreateFramebuffer")?,
                );
                chain.rendered.push(
                    unsafe {
                        g.device
                            .create_semaphore(&vk::SemaphoreCreateInfo::default(), None)
                    }
                    .call("vkCreateSemaphore")?,
                );
            }
            Ok(())
        })();
        self.chain = Some(chain);
        result?;
        self.stale = false;
        Ok(true)
    }

    /// Renders and presents one frame. Returns the timestamp and wall-clock
    /// milliseconds, or `None` when no frame could be presented.
    fn draw(&mut self) -> Result<Option<(Option<f64>, f64)>> {
        if (self.stale || self.chain.is_none()) && !self.rebuild()? {
            return Ok(None);
        }
        let chain = self.chain.as_ref().unwrap();
        let index = match unsafe {
            self.loader
                .acquire_next_image(chain.handle, u64::MAX, self.acquired, vk::Fence::null())
        } {
            Ok((i, _)) => i,
            Err(vk::Result::ERROR_OUT_OF_DATE_KHR) => {
                self.stale = true;
                return Ok(None);
            }
            Err(r) => {
                return Err(RenderError::Vulkan {
                    call: "vkAcquireNextImageKHR",
                    result: r,
                })
            }
        };
        let extent = chain.extent;
        let push = push_constants(
            &self.variant,
            &self.camera.mvp(extent.width as f64 / extent.height as f64),
        )?;
        let call = DrawCall {
            render_pass: self.render_pass,
            framebuffer: chain.framebuffers[index as usize],
            extent,
            pipeline: self.pipeline.0,
            layout: self.pipeline.1,
            buffer: self.vertices.0,
            count: self.count,
            push: &push,
        };
        let rendered = chain.rendered[index as usize];
        let start = Instant::now();
        self.gpu.submit_with(
            |d, cmd| record_draw(d, cmd, self.gpu.queries, &call),
            &[self.acquired],
            &[vk::PipelineStageFlags::COLOR_ATTACHMENT_OUTPUT],
            &[rendered],
        )?;
        let wall = start.elapsed().as_secs_f64() * 1e3;
        let gpu_ms = self.gpu.read_timestamps()?;
        let swapchains = [chain.handle];
        let indices = [index];
        let waits = [rendered];
        let present = vk::PresentInfoKHR::default()
            .wait_semaphores(&waits)
            .swapchains(&swapchains)
            .image_indices(&indices);
        match unsafe { self.loader.queue_present(self.gpu.queue, &present) } {
            Ok(suboptimal) => self.stale |= suboptimal,
            Err(vk::Result::ERROR_OUT_OF_DATE_KHR) => self.stale = true,
            Err(r) => {
                return Err(RenderError::Vulkan {
                    call: "vkQueuePresentKHR",
                    result: r,
                })
            }
        }
        Ok(Some((gpu_ms, wall)))
    }
}

impl Drop for WindowRenderer {
    fn drop(&mut self) {
        self.destroy_chain();
        let d = &self.gpu.device;
        unsafe {
            let _ = d.device_wait_idle();
            d.destroy_buffer(self.vertices.0, None);
            d.free_memory(self.vertices.1, None);
            d.destroy_pipeline(self.pipeline.0, None);
            d.destroy_pipeline_layout(self.pipeline.1, None);
            d.destroy_render_pass(self.render_pass, None);
            d.destroy_semaphore(self.acquired, None);
        }
    }
}
