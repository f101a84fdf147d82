//! Vulkan backend: device selection, pipelines, uploads, timestamped draws
//! and offscreen readback.

use std::cmp::Reverse;
use std::ffi::{c_char, c_void, CStr};
use std::time::Instant;

use ash::{vk, Entry};

use crate::device::{
    Backend, BackendKind, ContextOptions, DeviceInfo, FrameSample, GpuBuffer, Pipeline, BACKGROUND,
};
use crate::error::{RenderError, Result, VkResultExt};
use crate::image::Image;
use crate::packing::VertexBuffer;
use crate::shaders::ShaderModule;
use crate::variant::{AttributeFormat, PipelineVariant};

const VALIDATION_LAYER: &CStr = c"VK_LAYER_KHRONOS_validation";
const STAGING_CHUNK: u64 = 64 << 20;
const OFFSCREEN_FORMAT: vk::Format = vk::Format::R8G8B8A8_UNORM;

unsafe extern "system" fn debug_callback(
    severity: vk::DebugUtilsMessageSeverityFlagsEXT,
    _kind: vk::DebugUtilsMessageTypeFlagsEXT,
    data: *const vk::DebugUtilsMessengerCallbackDataEXT<'_>,
    _user: *mut c_void,
) -> vk::Bool32 {
    if !data.is_null() {
        let msg = unsafe { (*data).message_as_c_str() }.unwrap_or(c"<no message>");
        eprintln!("[vulkan {severity:?}] {}", msg.to_string_lossy());
    }
    vk::FALSE
}

fn device_error(what: impl std::fmt::Display) -> RenderError {
    RenderError::Device(what.to_string())
}

fn oom(requested_bytes: u64) -> impl Fn(vk::Result) -> RenderError {
    move |r| match r {
        vk::Result::ERROR_OUT_OF_DEVICE_MEMORY | vk::Result::ERROR_OUT_OF_HOST_MEMORY => {
            RenderError::Capacity {
                requested_bytes,
                message: r.to_string(),
            }
        }
        other => RenderError::Vulkan {
            call: "allocation",
            result: other,
        },
    }
}

/// Instance-level handles, destroyed last.
pub(crate) struct InstanceHandles {
    pub entry: Entry,
    pub instance: ash::Instance,
    debug: Option<(ash::ext::debug_utils::Instance, vk::DebugUtilsMessengerEXT)>,
    pub surface: Option<(ash::khr::surface::Instance, vk::SurfaceKHR)>,
}

impl Drop for InstanceHandles {
    fn drop(&mut self) {
        unsafe {
            if let Some((loader, surface)) = self.surface.take() {
                loader.destroy_surface(surface, None);
            }
            if let Some((loader, messenger)) = self.debug.take() {
                loader.destroy_debug_utils_messenger(messenger, None);
            }
            self.instance.destroy_instance(None);
        }
    }
}

/// Creates the surface for a freshly made instance.
pub(crate) type SurfaceFactory<'a> =
    &'a dyn Fn(&Entry, &ash::Instance) -> ash::prelude::VkResult<vk::SurfaceKHR>;

pub(crate) struct GpuRequest<'a> {
    pub device_index: Option<usize>,
    pub validation: bool,
    pub instance_extensions: Vec<*const c_char>,
    pub surface: Option<SurfaceFactory<'a>>,
}

/// A logical device with one graphics queue, one reusable command buffer and
/// an optional two-slot timestamp query pool.
pub(crate) struct Gpu {
    pub physical: vk::PhysicalDevice,
    pub device: ash::Device,
    pub queue: vk::Queue,
    memory: vk::PhysicalDeviceMemoryProperties,
    pub pool: vk::CommandPool,
    pub cmd: vk::CommandBuffer,
    pub fence: vk::Fence,
    pub queries: Option<vk::QueryPool>,
    timestamp_mask: u64,
    pub depth_format: vk::Format,
    pub info: DeviceInfo,
    // dropped after the device
    pub inst: InstanceHandles,
}

impl Drop for Gpu {
    fn drop(&mut self) {
        unsafe {
            let _ = self.device.device_wait_idle();
            if let Some(q) = self.queries.take() {
                self.device.destroy_query_pool(q, None);
            }
            self.device.destroy_fence(self.fence, None);
            self.device.destroy_command_pool(self.pool, None);
            self.device.destroy_device(None);
        }
    }
}

struct Candidate {
    index: usize,
    physical: vk::PhysicalDevice,
    family: u32,
    props: vk::PhysicalDeviceProperties,
    fp64: bool,
}

fn type_name(t: vk::PhysicalDeviceType) -> &'static str {
    match t {
        vk::PhysicalDeviceType::DISCRETE_GPU => "discrete",
        vk::PhysicalDeviceType::INTEGRATED_GPU => "integrated",
        vk::PhysicalDeviceType::VIRTUAL_GPU => "virtual",
        vk::PhysicalDeviceType::CPU => "cpu",
        _ => "other",
    }
}

fn type_rank(t: vk::PhysicalDeviceType) -> u8 {
    match t {
        vk::PhysicalDeviceType::DISCRETE_GPU => 4,
        vk::PhysicalDeviceType::INTEGRATED_GPU => 3,
        vk::PhysicalDeviceType::VIRTUAL_GPU => 2,
        vk::PhysicalDeviceType::CPU => 1,
        _ => 0,
    }
}

impl Gpu {
    pub fn new(req: &GpuRequest<'_>) -> Result<Gpu> {
        let entry = unsafe { Entry::load() }
            .map_err(|e| device_error(format!("Vulkan loader not available: {e}")))?;
        let version = unsafe { entry.try_enumerate_instance_version() }
            .call("vkEnumerateInstanceVersion")?
            .unwrap_or(vk::API_VERSION_1_0);
        if version < vk::API_VERSION_1_3 {
            return Err(device_error(format!(
                "the Vulkan loader offers {}.{}, SPIR-V 1.6 shaders need Vulkan 1.3",
                vk::api_version_major(version),
                vk::api_version_minor(version)
            )));
        }
        let available_ext = unsafe { entry.enumerate_instance_extension_properties(None) }
            .call("vkEnumerateInstanceExtensionProperties")?;
        let has_ext = |name: &CStr| {
            available_ext
                .iter()
                .any(|e| e.extension_name_as_c_str() == Ok(name))
        };
        let layers = unsafe { entry.enumerate_instance_layer_properties() }
            .call("vkEnumerateInstanceLayerProperties")?;
        let validation = req.validation
            && layers
                .iter()
                .any(|l| l.layer_name_as_c_str() == Ok(VALIDATION_LAYER));
        let debug = validation && has_ext(ash::ext::debug_utils::NAME);
        let mut extensions = req.instance_extensions.clone();
        if debug {
            extensions.push(ash::ext::debug_utils::NAME.as_ptr());
        }
        let layer_names = if validation {
            vec![VALIDATION_LAYER.as_ptr()]
        } else {
            Vec::new()
        };
        let app = vk::ApplicationInfo::default()
            .application_name(c"dualprec")
            .application_version(1)
            .engine_name(c"dualprec-render")
            .api_version(vk::API_VERSION_1_3);
        let create = vk::InstanceCreateInfo::default()
            .application_info(&app)
            .enabled_extension_names(&extensions)
            .enabled_layer_names(&layer_names);
        let instance = unsafe { entry.create_instance(&create, None) }
            .map_err(|r| device_error(format!("vkCreateInstance failed: {r}")))?;
        let mut inst = InstanceHandles {
            entry,
            instance,
            debug: None,
            surface: None,
        };
        if debug {
            let loader = ash::ext::debug_utils::Instance::new(&inst.entry, &inst.instance);
            let info = vk::DebugUtilsMessengerCreateInfoEXT::default()
                .message_severity(
                    vk::DebugUtilsMessageSeverityFlagsEXT::WARNING
                        | vk::DebugUtilsMessageSeverityFlagsEXT::ERROR,
                )
                .message_type(
                    vk::DebugUtilsMessageTypeFlagsEXT::GENERAL
                        | vk::DebugUtilsMessageTypeFlagsEXT::VALIDATION
                        | vk::DebugUtilsMessageTypeFlagsEXT::PERFORMANCE,
                )
                .pfn_user_callback(Some(debug_callback));
            let messenger = unsafe { loader.create_debug_utils_messenger(&info, None) }
                .call("vkCreateDebugUtilsMessengerEXT")?;
            inst.debug = Some((loader, messenger));
        }
        if let Some(make) = req.surface {
            let loader = ash::khr::surface::Instance::new(&inst.entry, &inst.instance);
            let surface = make(&inst.entry, &inst.instance)
                .map_err(|r| device_error(format!("cannot create a surface: {r}")))?;
            inst.surface = Some((loader, surface));
        }
        Gpu::with_instance(inst, req)
    }

    fn with_instance(inst: InstanceHandles, req: &GpuRequest<'_>) -> Result<Gpu> {
        let instance = &inst.instance;
        let physicals =
            unsafe { instance.enumerate_physical_devices() }.call("vkEnumeratePhysicalDevices")?;
        if physicals.is_empty() {
            return Err(device_error("no Vulkan physical device is present"));
        }
        let mut candidates = Vec::new();
        let mut rejected = Vec::new();
        for (index, &physical) in physicals.iter().enumerate() {
            let props = unsafe { instance.get_physical_device_properties(physical) };
            let name = props
                .device_name_as_c_str()
                .map(|c| c.to_string_lossy().into_owned())
                .unwrap_or_default();
            if props.api_version < vk::API_VERSION_1_3 {
                rejected.push(format!("#{index} {name}: Vulkan 1.3 is required"));
                continue;
            }
            let families =
                unsafe { instance.get_physical_device_queue_family_properties(physical) };
            let family = families.iter().enumerate().position(|(i, f)| {
                let graphics = f.queue_flags.contains(vk::QueueFlags::GRAPHICS);
                let present = match &inst.surface {
                    Some((loader, surface)) => unsafe {
                        loader
                            .get_physical_device_surface_support(physical, i as u32, *surface)
                            .unwrap_or(false)
                    },
                    None => true,
                };
                graphics && present
            });
            let Some(family) = family else {
                rejected.push(format!(
                    "#{index} {name}: no graphics queue that can present"
                ));
                continue;
            };
            let features = unsafe { instance.get_physical_device_features(physical) };
            candidates.push(Candidate {
                index,
                physical,
                family: family as u32,
                props,
                fp64: features.shader_float64 == vk::TRUE,
            });
        }
        let chosen = match req.device_index {
            Some(i) => candidates
                .into_iter()
                .find(|c| c.index == i)
                .ok_or_else(|| {
                    device_error(format!(
                        "device index {i} is not usable ({} devices; {})",
                        physicals.len(),
                        if rejected.is_empty() {
                            "index out of range".to_string()
                        } else {
                            rejected.join("; ")
                        }
                    ))
                })?,
            None => candidates
                .into_iter()
                .max_by_key(|c| {
                    let discrete = c.props.device_type == vk::PhysicalDeviceType::DISCRETE_GPU;
                    (
                        discrete && c.fp64,
                        discrete,
                        c.fp64,
                        type_rank(c.props.device_type),
                        Reverse(c.index),
                    )
                })
                .ok_or_else(|| {
                    device_error(format!("no usable Vulkan device: {}", rejected.join("; ")))
                })?,
        };

        let fmt_ok = |f: vk::Format| unsafe {
            instance
                .get_physical_device_format_properties(chosen.physical, f)
                .buffer_features
                .contains(vk::FormatFeatureFlags::VERTEX_BUFFER)
        };
        let vertex_format64 =
            fmt_ok(vk::Format::R64G64B64_SFLOAT) && fmt_ok(vk::Format::R64G64_SFLOAT);
        let depth_format = [
            vk::Format::D32_SFLOAT,
            vk::Format::X8_D24_UNORM_PACK32,
            vk::Format::D16_UNORM,
        ]
        .into_iter()
        .find(|&f| unsafe {
            instance
                .get_physical_device_format_properties(chosen.physical, f)
                .optimal_tiling_features
                .contains(vk::FormatFeatureFlags::DEPTH_STENCIL_ATTACHMENT)
        })
        .ok_or_else(|| device_error("no depth attachment format"))?;

        let priorities = [1.0f32];
        let queue_info = [vk::DeviceQueueCreateInfo::default()
            .queue_family_index(chosen.family)
            .queue_priorities(&priorities)];
        let features = vk::PhysicalDeviceFeatures::default().shader_float64(chosen.fp64);
        let mut dev_ext = Vec::new();
        if inst.surface.is_some() {
            dev_ext.push(ash::khr::swapchain::NAME.as_ptr());
        }
        let create = vk::DeviceCreateInfo::default()
            .queue_create_infos(&queue_info)
            .enabled_features(&features)
            .enabled_extension_names(&dev_ext);
        let device = unsafe { instance.create_device(chosen.physical, &create, None) }
            .map_err(|r| device_error(format!("vkCreateDevice failed: {r}")))?;
        let queue = unsafe { device.get_device_queue(chosen.family, 0) };
        let memory = unsafe { instance.get_physical_device_memory_properties(chosen.physical) };

        let family_props =
            unsafe { instance.get_physical_device_queue_family_properties(chosen.physical) };
        let bits = family_props[chosen.family as usize].timestamp_valid_bits;
        let limits = chosen.props.limits;
        let timestamps = bits > 0 && limits.timestamp_period > 0.0;

        // from here on the device must be destroyed on failure
        let mut gpu = Gpu {
            physical: chosen.physical,
            device,
            queue,
            memory,
            pool: vk::CommandPool::null(),
            cmd: vk::CommandBuffer::null(),
            fence: vk::Fence::null(),
            queries: None,
            timestamp_mask: if bits >= 64 {
                u64::MAX
            } else {
                (1u64 << bits) - 1
            },
            depth_format,
            info: DeviceInfo {
                name: chosen
                    .props
                    .device_name_as_c_str()
                    .map(|c| c.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                backend: BackendKind::Vulkan,
                device_type: type_name(chosen.props.device_type).into(),
                driver: format!(
                    "Vulkan {}.{}.{}, driver {:#x}",
                    vk::api_version_major(chosen.props.api_version),
                    vk::api_version_minor(chosen.props.api_version),
                    vk::api_version_patch(chosen.props.api_version),
                    chosen.props.driver_version
                ),
                shader_float64: chosen.fp64,
                vertex_format64,
                max_push_constants_size: limits.max_push_constants_size,
                timestamps,
                timestamp_period_ns: limits.timestamp_period as f64,
            },
            inst,
        };
        let pool_info = vk::CommandPoolCreateInfo::default()
            .queue_family_index(chosen.family)
            .flags(vk::CommandPoolCreateFlags::RESET_COMMAND_BUFFER);
        gpu.pool = unsafe { gpu.device.create_command_pool(&pool_info, None) }
            .call("vkCreateCommandPool")?;
        let alloc = vk::CommandBufferAllocateInfo::default()
            .command_pool(gpu.pool)
            .level(vk::CommandBufferLevel::PRIMARY)
            .command_buffer_count(1);
        gpu.cmd = unsafe { gpu.device.allocate_command_buffers(&alloc) }
            .call("vkAllocateCommandBuffers")?[0];
        gpu.fence = unsafe {
            gpu.device
                .create_fence(&vk::FenceCreateInfo::default(), None)
        }
        .call("vkCreateFence")?;
        if timestamps {
            let q = vk::QueryPoolCreateInfo::default()
                .query_type(vk::QueryType::TIMESTAMP)
                .query_count(2);
            gpu.queries =
                Some(unsafe { gpu.device.create_query_pool(&q, None) }.call("vkCreateQueryPool")?);
        }
        Ok(gpu)
    }

    fn memory_type(&self, bits: u32, flags: vk::MemoryPropertyFlags) -> Option<u32> {
        (0..self.memory.memory_type_count).find(|&i| {
            bits & (1 << i) != 0
                && self.memory.memory_types[i as usize]
                    .property_flags
                    .contains(flags)
        })
    }

    fn allocate(
        &self,
        req: vk::MemoryRequirements,
        flags: vk::MemoryPropertyFlags,
        bytes: u64,
    ) -> Result<vk::DeviceMemory> {
        let ty = self
            .memory_type(req.memory_type_bits, flags)
            .ok_or_else(|| RenderError::Capacity {
                requested_bytes: bytes,
                message: format!("no memory type with {flags:?}"),
            })?;
        let info = vk::MemoryAllocateInfo::default()
            .allocation_size(req.size)
            .memory_type_index(ty);
        unsafe { self.device.allocate_memory(&info, None) }.map_err(oom(bytes))
    }

    pub fn create_buffer(
        &self,
        size: u64,
        usage: vk::BufferUsageFlags,
        flags: vk::MemoryPropertyFlags,
    ) -> Result<(vk::Buffer, vk::DeviceMemory)> {
        let info = vk::BufferCreateInfo::default()
            .size(size)
            .usage(usage)
            .sharing_mode(vk::SharingMode::EXCLUSIVE);
        let buffer = unsafe { self.device.create_buffer(&info, None) }.map_err(oom(size))?;
        let req = unsafe { self.device.get_buffer_memory_requirements(buffer) };
        let memory = match self.allocate(req, flags, size) {
            Ok(m) => m,
            Err(e) => {
                unsafe { self.device.destroy_buffer(buffer, None) };
                return Err(e);
            }
        };
        unsafe { self.device.bind_buffer_memory(buffer, memory, 0) }.call("vkBindBufferMemory")?;
        Ok((buffer, memory))
    }

    pub fn create_image(
        &self,
        extent: vk::Extent2D,
        format: vk::Format,
        usage: vk::ImageUsageFlags,
        aspect: vk::ImageAspectFlags,
    ) -> Result<(vk::Image, vk::DeviceMemory, vk::ImageView)> {
        let info = vk::ImageCreateInfo::default()
            .image_type(vk::ImageType::TYPE_2D)
            .format(format)
            .extent(vk::Extent3D {
                width: extent.width,
                height: extent.height,
                depth: 1,
            })
            .mip_levels(1)
            .array_layers(1)
            .samples(vk::SampleCountFlags::TYPE_1)
            .tiling(vk::ImageTiling::OPTIMAL)
            .usage(usage)
            .initial_layout(vk::ImageLayout::UNDEFINED);
        let bytes = extent.width as u64 * extent.height as u64 * 4;
        let image = unsafe { self.device.create_image(&info, None) }.map_err(oom(bytes))?;
        let req = unsafe { self.device.get_image_memory_requirements(image) };
        let memory = match self.allocate(req, vk::MemoryPropertyFlags::DEVICE_LOCAL, bytes) {
            Ok(m) => m,
            Err(e) => {
                unsafe { self.device.destroy_image(image, None) };
                return Err(e);
            }
        };
        unsafe { self.device.bind_image_memory(image, memory, 0) }.call("vkBindImageMemory")?;
        let view = self.create_view(image, format, aspect)?;
        Ok((image, memory, view))
    }

    pub fn create_view(
        &self,
        image: vk::Image,
        format: vk::Format,
        aspect: vk::ImageAspectFlags,
    ) -> Result<vk::ImageView> {
        let info = vk::ImageViewCreateInfo::default()
            .image(image)
            .view_type(vk::ImageViewType::TYPE_2D)
            .format(format)
            .subresource_range(vk::ImageSubresourceRange {
                aspect_mask: aspect,
                base_mip_level: 0,
                level_count: 1,
                base_array_layer: 0,
                layer_count: 1,
            });
        unsafe { self.device.create_image_view(&info, None) }.call("vkCreateImageView")
    }

    /// Records with `record`, submits, and waits.
    pub fn submit_and_wait(
        &self,
        record: impl FnOnce(&ash::Device, vk::CommandBuffer),
    ) -> Result<()> {
        self.submit_with(record, &[], &[], &[])
    }

    pub fn submit_with(
        &self,
        record: impl FnOnce(&ash::Device, vk::CommandBuffer),
        wait: &[vk::Semaphore],
        wait_stages: &[vk::PipelineStageFlags],
        signal: &[vk::Semaphore],
    ) -> Result<()> {
        let d = &self.device;
        unsafe {
            d.reset_command_buffer(self.cmd, vk::CommandBufferResetFlags::empty())
                .call("vkResetCommandBuffer")?;
            let begin = vk::CommandBufferBeginInfo::default()
                .flags(vk::CommandBufferUsageFlags::ONE_TIME_SUBMIT);
            d.begin_command_buffer(self.cmd, &begin)
                .call("vkBeginCommandBuffer")?;
            record(d, self.cmd);
            d.end_command_buffer(self.cmd).call("vkEndCommandBuffer")?;
            let cmds = [self.cmd];
            let submit = vk::SubmitInfo::default()
                .command_buffers(&cmds)
                .wait_semaphores(wait)
                .wait_dst_stage_mask(wait_stages)
                .signal_semaphores(signal);
            d.queue_submit(self.queue, &[submit], self.fence)
                .call("vkQueueSubmit")?;
            d.wait_for_fences(&[self.fence], true, u64::MAX)
                .call("vkWaitForFences")?;
            d.reset_fences(&[self.fence]).call("vkResetFences")?;
        }
        Ok(())
    }

    /// Copies `bytes` into a new device-local vertex buffer through a staging buffer.
    pub fn upload_vertices(&self, bytes: &[u8]) -> Result<(vk::Buffer, vk::DeviceMemory)> {
        let size = bytes.len() as u64;
        let (dst, dst_mem) = self.create_buffer(
            size,
            vk::BufferUsageFlags::VERTEX_BUFFER | vk::BufferUsageFlags::TRANSFER_DST,
            vk::MemoryPropertyFlags::DEVICE_LOCAL,
        )?;
        let chunk = size.min(STAGING_CHUNK);
        let staged = self.create_buffer(
            chunk,
            vk::BufferUsageFlags::TRANSFER_SRC,
            vk::MemoryPropertyFlags::HOST_VISIBLE | vk::MemoryPropertyFlags::HOST_COHERENT,
        );
        let (src, src_mem) = match staged {
            Ok(s) => s,
            Err(e) => {
                unsafe {
                    self.device.destroy_buffer(dst, None);
                    self.device.free_memory(dst_mem, None);
                }
                return Err(e);
            }
        };
        let result = (|| -> Result<()> {
            let ptr = unsafe {
                self.device
                    .map_memory(src_mem, 0, chunk, vk::MemoryMapFlags::empty())
            }
            .call("vkMapMemory")? as *mut u8;
            for (k, part) in bytes.chunks(chunk as usize).enumerate() {
                unsafe { std::ptr::copy_nonoverlapping(part.as_ptr(), ptr, part.len()) };
                let region = vk::BufferCopy {
                    src_offset: 0,
                    dst_offset: k as u64 * chunk,
                    size: part.len() as u64,
                };
                self.submit_and_wait(|d, cmd| unsafe {
                    d.cmd_copy_buffer(cmd, src, dst, &[region])
                })?;
            }
            unsafe { self.device.unmap_memory(src_mem) };
            Ok(())
        })();
        unsafe {
            self.device.destroy_buffer(src, None);
            self.device.free_memory(src_mem, None);
        }
        match result {
            Ok(()) => Ok((dst, dst_mem)),
            Err(e) => {
                unsafe {
                    self.device.destroy_buffer(dst, None);
                    self.device.free_memory(dst_mem, None);
                }
                Err(e)
            }
        }
    }

    /// Reads the two timestamps of the last submission, in milliseconds.
    pub fn read_timestamps(&self) -> Result<Option<f64>> {
        let Some(pool) = self.queries else {
            return Ok(None);
        };
        let mut t = [0u64; 2];
        unsafe {
            self.device.get_query_pool_results(
                pool,
                0,
                &mut t,
                vk::QueryResultFlags::TYPE_64 | vk::QueryResultFlags::WAIT,
            )
        }
        .call("vkGetQueryPoolResults")?;
        let ticks = t[1].wrapping_sub(t[0]) & self.timestamp_mask;
        Ok(Some(ticks as f64 * self.info.timestamp_period_ns * 1e-6))
    }
}

/// A single-subpass pass with one color and one depth attachment.
pub(crate) fn create_render_pass(
    gpu: &Gpu,
    color: vk::Format,
    final_layout: vk::ImageLayout,
) -> Result<vk::RenderPass> {
    let attachments = [
        vk::AttachmentDescription::default()
            .format(color)
            .samples(vk::SampleCountFlags::TYPE_1)
            .load_op(vk::AttachmentLoadOp::CLEAR)
            .store_op(vk::AttachmentStoreOp::STORE)
            .stencil_load_op(vk::AttachmentLoadOp::DONT_CARE)
            .stencil_store_op(vk::AttachmentStoreOp::DONT_CARE)
            .initial_layout(vk::ImageLayout::UNDEFINED)
            .final_layout(final_layout),
        vk::AttachmentDescription::default()
            .format(gpu.depth_format)
            .samples(vk::SampleCountFlags::TYPE_1)
            .load_op(vk::AttachmentLoadOp::CLEAR)
            .store_op(vk::AttachmentStoreOp::DONT_CARE)
            .stencil_load_op(vk::AttachmentLoadOp::DONT_CARE)
            .stencil_store_op(vk::AttachmentStoreOp::DONT_CARE)
            .initial_layout(vk::ImageLayout::UNDEFINED)
            .final_layout(vk::ImageLayout::DEPTH_STENCIL_ATTACHMENT_OPTIMAL),
    ];
    let color_ref = [vk::AttachmentReference {
        attachment: 0,
        layout: vk::ImageLayout::COLOR_ATTACHMENT_OPTIMAL,
    }];
    let depth_ref = vk::AttachmentReference {
        attachment: 1,
        layout: vk::ImageLayout::DEPTH_STENCIL_ATTACHMENT_OPTIMAL,
    };
    let subpass = [vk::SubpassDescription::default()
        .pipeline_bind_point(vk::PipelineBindPoint::GRAPHICS)
        .color_attachments(&color_ref)
        .depth_stencil_attachment(&depth_ref)];
    let attachment_stages = vk::PipelineStageFlags::COLOR_ATTACHMENT_OUTPUT
        | vk::PipelineStageFlags::EARLY_FRAGMENT_TESTS;
    let (after_stage, after_access) = if final_layout == vk::ImageLayout::TRANSFER_SRC_OPTIMAL {
        (
            vk::PipelineStageFlags::TRANSFER,
            vk::AccessFlags::TRANSFER_READ,
        )
    } else {
        (
            vk::PipelineStageFlags::BOTTOM_OF_PIPE,
            vk::AccessFlags::empty(),
        )
    };
    let deps = [
        vk::SubpassDependency::default()
            .src_subpass(vk::SUBPASS_EXTERNAL)
            .dst_subpass(0)
            .src_stage_mask(attachment_stages | vk::PipelineStageFlags::TRANSFER)
            .dst_stage_mask(attachment_stages)
            .src_access_mask(vk::AccessFlags::TRANSFER_READ)
            .dst_access_mask(
                vk::AccessFlags::COLOR_ATTACHMENT_WRITE
                    | vk::AccessFlags::DEPTH_STENCIL_ATTACHMENT_WRITE,
            ),
        vk::SubpassDependency::default()
            .src_subpass(0)
            .dst_subpass(vk::SUBPASS_EXTERNAL)
            .src_stage_mask(vk::PipelineStageFlags::COLOR_ATTACHMENT_OUTPUT)
            .dst_stage_mask(after_stage)
            .src_access_mask(vk::AccessFlags::COLOR_ATTACHMENT_WRITE)
            .dst_access_mask(after_access),
    ];
    let info = vk::RenderPassCreateInfo::default()
        .attachments(&attachments)
        .subpasses(&subpass)
        .dependencies(&deps);
    unsafe { gpu.device.create_render_pass(&info, None) }.call("vkCreateRenderPass")
}

fn attribute_format(f: AttributeFormat) -> vk::Format {
    f.vk_format()
}

/// Point-list pipeline for `variant` with dynamic viewport and scissor.
pub(crate) fn create_pipeline(
    gpu: &Gpu,
    render_pass: vk::RenderPass,
    variant: &PipelineVariant,
    vs: &ShaderModule,
    fs: &ShaderModule,
) -> Result<(vk::Pipeline, vk::PipelineLayout)> {
    let d = &gpu.device;
    let module = |m: &ShaderModule| -> Result<vk::ShaderModule> {
        let words = m.words();
        let info = vk::ShaderModuleCreateInfo::default().code(&words);
        unsafe { d.create_shader_module(&info, None) }.map_err(|r| {
            RenderError::shader(m.id.source_name(), format!("vkCreateShaderModule: {r}"))
        })
    };
    let vsm = module(vs)?;
    let fsm = match module(fs) {
        Ok(m) => m,
        Err(e) => {
            unsafe { d.destroy_shader_module(vsm, None) };
            return Err(e);
        }
    };
    let stages = [
        vk::PipelineShaderStageCreateInfo::default()
            .stage(vk::ShaderStageFlags::VERTEX)
            .module(vsm)
            .name(c"main"),
        vk::PipelineShaderStageCreateInfo::default()
            .stage(vk::ShaderStageFlags::FRAGMENT)
            .module(fsm)
            .name(c"main"),
    ];
    let bindings = [vk::VertexInputBindingDescription {
        binding: 0,
        stride: variant.stride,
        input_rate: vk::VertexInputRate::VERTEX,
    }];
    let attributes: Vec<_> = variant
        .vertex_layout
        .iter()
        .map(|a| vk::VertexInputAttributeDescription {
            location: a.location,
            binding: 0,
            format: attribute_format(a.format),
            offset: a.offset,
        })
        .collect();
    let vertex_input = vk::PipelineVertexInputStateCreateInfo::default()
        .vertex_binding_descriptions(&bindings)
        .vertex_attribute_descriptions(&attributes);
    let assembly = vk::PipelineInputAssemblyStateCreateInfo::default()
        .topology(vk::PrimitiveTopology::POINT_LIST);
    let viewport = vk::PipelineViewportStateCreateInfo::default()
        .viewport_count(1)
        .scissor_count(1);
    let raster = vk::PipelineRasterizationStateCreateInfo::default()
        .polygon_mode(vk::PolygonMode::FILL)
        .cull_mode(vk::CullModeFlags::NONE)
        .front_face(vk::FrontFace::COUNTER_CLOCKWISE)
        .line_width(1.0);
    let multisample = vk::PipelineMultisampleStateCreateInfo::default()
        .rasterization_samples(vk::SampleCountFlags::TYPE_1);
    let depth = vk::PipelineDepthStencilStateCreateInfo::default()
        .depth_test_enable(variant.depth_test())
        .depth_write_enable(variant.depth_test())
        .depth_compare_op(vk::CompareOp::LESS);
    let blend_attachment = [vk::PipelineColorBlendAttachmentState::default()
        .color_write_mask(vk::ColorComponentFlags::RGBA)];
    let blend = vk::PipelineColorBlendStateCreateInfo::default().attachments(&blend_attachment);
    let dynamic_states = [vk::DynamicState::VIEWPORT, vk::DynamicState::SCISSOR];
    let dynamic = vk::PipelineDynamicStateCreateInfo::default().dynamic_states(&dynamic_states);
    let ranges = [vk::PushConstantRange {
        stage_flags: vk::ShaderStageFlags::VERTEX,
        offset: 0,
        size: variant.push_constant_size,
    }];
    let layout_info = vk::PipelineLayoutCreateInfo::default().push_constant_ranges(&ranges);
    let result = (|| {
        let layout = unsafe { d.create_pipeline_layout(&layout_info, None) }
            .call("vkCreatePipelineLayout")?;
        let info = vk::GraphicsPipelineCreateInfo::default()
            .stages(&stages)
            .vertex_input_state(&vertex_input)
            .input_assembly_state(&assembly)
            .viewport_state(&viewport)
            .rasterization_state(&raster)
            .multisample_state(&multisample)
            .depth_stencil_state(&depth)
            .color_blend_state(&blend)
            .dynamic_state(&dynamic)
            .layout(layout)
            .render_pass(render_pass)
            .subpass(0);
        match unsafe { d.create_graphics_pipelines(vk::PipelineCache::null(), &[info], None) } {
            Ok(p) => Ok((p[0], layout)),
            Err((_, r)) => {
                unsafe { d.destroy_pipeline_layout(layout, None) };
                Err(RenderError::shader(
                    format!("{}+{}", vs.id, fs.id),
                    format!("vkCreateGraphicsPipelines: {r}"),
                ))
            }
        }
    })();
    unsafe {
        d.destroy_shader_module(vsm, None);
        d.destroy_shader_module(fsm, None);
    }
    result
}

/// Everything recorded for one frame: clear, timestamped draw.
pub(crate) struct DrawCall<'a> {
    pub render_pass: vk::RenderPass,
    pub framebuffer: vk::Framebuffer,
    pub extent: vk::Extent2D,
    pub pipeline: vk::Pipeline,
    pub layout: vk::PipelineLayout,
    pub buffer: vk::Buffer,
    pub count: u32,
    pub push: &'a [u8],
}

pub(crate) fn record_draw(
    d: &ash::Device,
    cmd: vk::CommandBuffer,
    queries: Option<vk::QueryPool>,
    call: &DrawCall<'_>,
) {
    let bg = BACKGROUND.map(|c| c as f32 / 255.0);
    let clears = [
        vk::ClearValue {
            color: vk::ClearColorValue { float32: bg },
        },
        vk::ClearValue {
            depth_stencil: vk::ClearDepthStencilValue {
                depth: 1.0,
                stencil: 0,
            },
        },
    ];
    let area = vk::Rect2D {
        offset: vk::Offset2D { x: 0, y: 0 },
        extent: call.extent,
    };
    unsafe {
        if let Some(q) = queries {
            d.cmd_reset_query_pool(cmd, q, 0, 2);
        }
        let begin = vk::RenderPassBeginInfo::default()
            .render_pass(call.render_pass)
            .framebuffer(call.framebuffer)
            .render_area(area)
            .clear_values(&clears);
        d.cmd_begin_render_pass(cmd, &begin, vk::SubpassContents::INLINE);
        if let Some(q) = queries {
            d.cmd_write_timestamp(cmd, vk::PipelineStageFlags::TOP_OF_PIPE, q, 0);
        }
        d.cmd_bind_pipeline(cmd, vk::PipelineBindPoint::GRAPHICS, call.pipeline);
        let vp = vk::Viewport {
            x: 0.0,
            y: 0.0,
            width: call.extent.width as f32,
            height: call.extent.height as f32,
            min_depth: 0.0,
            max_depth: 1.0,
        };
        d.cmd_set_viewport(cmd, 0, &[vp]);
        d.cmd_set_scissor(cmd, 0, &[area]);
        d.cmd_push_constants(cmd, call.layout, vk::ShaderStageFlags::VERTEX, 0, call.push);
        d.cmd_bind_vertex_buffers(cmd, 0, &[call.buffer], &[0]);
        d.cmd_draw(cmd, call.count, 1, 0, 0);
        if let Some(q) = queries {
            d.cmd_write_timestamp(cmd, vk::PipelineStageFlags::BOTTOM_OF_PIPE, q, 1);
        }
        d.cmd_end_render_pass(cmd);
    }
}

/// Offscreen color and depth images with a framebuffer and a readback buffer.
struct Target {
    extent: vk::Extent2D,
    color: (vk::Image, vk::DeviceMemory, vk::ImageView),
    depth: (vk::Image, vk::DeviceMemory, vk::ImageView),
    framebuffer: vk::Framebuffer,
    readback: (vk::Buffer, vk::DeviceMemory),
}

impl Target {
    fn destroy(self, d: &ash::Device) {
        unsafe {
            d.destroy_framebuffer(self.framebuffer, None);
            for (image, memory, view) in [self.color, self.depth] {
                d.destroy_image_view(view, None);
                d.destroy_image(image, None);
                d.free_memory(memory, None);
            }
            d.destroy_buffer(self.readback.0, None);
            d.free_memory(self.readback.1, None);
        }
    }
}

/// Headless backend rendering into offscreen images.
pub(crate) struct VulkanDevice {
    render_pass: vk::RenderPass,
    target: Option<Target>,
    pipelines: Vec<(vk::Pipeline, vk::PipelineLayout)>,
    buffers: Vec<Option<(vk::Buffer, vk::DeviceMemory)>>,
    // dropped last
    gpu: Gpu,
}

impl VulkanDevice {
    pub fn headless(options: &ContextOptions) -> Result<VulkanDevice> {
        let gpu = Gpu::new(&GpuRequest {
            device_index: options.device_index,
            validation: options.validation,
            instance_extensions: Vec::new(),
            surface: None,
        })?;
        let render_pass = create_render_pass(
            &gpu,
            OFFSCREEN_FORMAT,
            vk::ImageLayout::TRANSFER_SRC_OPTIMAL,
        )?;
        Ok(VulkanDevice {
            render_pass,
            target: None,
            pipelines: Vec::new(),
            buffers: Vec::new(),
            gpu,
        })
    }

    fn target(&mut self, extent: (u32, u32)) -> Result<&Target> {
        let want = vk::Extent2D {
            width: extent.0,
            height: extent.1,
        };
        if self.target.as_ref().map(|t| t.extent) != Some(want) {
            if let Some(old) = self.target.take() {
                unsafe { self.gpu.device.device_wait_idle() }.call("vkDeviceWaitIdle")?;
                old.destroy(&self.gpu.device);
            }
            let g = &self.gpu;
            let color = g.create_image(
                want,
                OFFSCREEN_FORMAT,
                vk::ImageUsageFlags::COLOR_ATTACHMENT | vk::ImageUsageFlags::TRANSFER_SRC,
                vk::ImageAspectFlags::COLOR,
            )?;
            let depth = g.create_image(
                want,
                g.depth_format,
                vk::ImageUsageFlags::DEPTH_STENCIL_ATTACHMENT,
                vk::ImageAspectFlags::DEPTH,
            )?;
            let views = [color.2, depth.2];
            let fb = vk::FramebufferCreateInfo::default()
                .render_pass(self.render_pass)
                .attachments(&views)
                .width(want.width)
                .height(want.height)
                .layers(1);
            let framebuffer =
                unsafe { g.device.create_framebuffer(&fb, None) }.call("vkCreateFramebuffer")?;
            let bytes = want.width as u64 * want.height as u64 * 4;
            let readback = g.create_buffer(
                bytes,
                vk::BufferUsageFlags::TRANSFER_DST,
                vk::MemoryPropertyFlags::HOST_VISIBLE | vk::MemoryPropertyFlags::HOST_COHERENT,
            )?;
            self.target = Some(Target {
                extent: want,
                color,
                depth,
                framebuffer,
                readback,
            });
        }
        Ok(self.target.as_ref().unwrap())
    }

    fn call<'a>(
        &self,
        pipeline: &Pipeline,
        buffer: &GpuBuffer,
        push: &'a [u8],
        t: &Target,
    ) -> Result<DrawCall<'a>> {
        let (p, layout) = *self
            .pipelines
            .get(pipeline.id)
            .ok_or_else(|| RenderError::Validation("pipeline belongs to another context".into()))?;
        let (b, _) = self
            .buffers
            .get(buffer.id)
            .copied()
            .flatten()
            .ok_or_else(|| {
                RenderError::Validation("buffer belongs to another context, or was released".into())
            })?;
        Ok(DrawCall {
            render_pass: self.render_pass,
            framebuffer: t.framebuffer,
            extent: t.extent,
            pipeline: p,
            layout,
            buffer: b,
            count: buffer.count,
            push,
        })
    }
}

impl Drop for VulkanDevice {
    fn drop(&mut self) {
        let d = &self.gpu.device;
        unsafe {
            let _ = d.device_wait_idle();
            if let Some(t) = self.target.take() {
                t.destroy(d);
            }
            for (p, l) in self.pipelines.drain(..) {
                d.destroy_pipeline(p, None);
                d.destroy_pipeline_layout(l, None);
            }
            for (b, m) in self.buffers.drain(..).flatten() {
                d.destroy_buffer(b, None);
                d.free_memory(m, None);
            }
            d.destroy_render_pass(self.render_pass, None);
        }
    }
}

impl Backend for VulkanDevice {
    fn info(&self) -> &DeviceInfo {
        &self.gpu.info
    }

    fn create_pipeline(
        &mut self,
        variant: &PipelineVariant,
        vs: &ShaderModule,
        fs: &ShaderModule,
    ) -> Result<(usize, u64)> {
        let p = create_pipeline(&self.gpu, self.render_pass, variant, vs, fs)?;
        self.pipelines.push(p);
        Ok((
            self.pipelines.len() - 1,
            ash::vk::Handle::as_raw(self.render_pass),
        ))
    }

    fn create_buffer(&mut self, data: VertexBuffer) -> Result<usize> {
        let b = self.gpu.upload_vertices(&data.bytes)?;
        self.buffers.push(Some(b));
        Ok(self.buffers.len() - 1)
    }

    fn release_buffer(&mut self, id: usize) {
        if let Some((b, m)) = self.buffers.get_mut(id).and_then(Option::take) {
            unsafe {
                let _ = self.gpu.device.device_wait_idle();
                self.gpu.device.destroy_buffer(b, None);
                self.gpu.device.free_memory(m, None);
            }
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
        self.target(extent)?;
        let t = self.target.as_ref().unwrap();
        let call = self.call(pipeline, buffer, push, t)?;
        let mut out = Vec::with_capacity(frames as usize);
        for _ in 0..frames {
            let start = Instant::now();
            self.gpu
                .submit_and_wait(|d, cmd| record_draw(d, cmd, self.gpu.queries, &call))?;
            let wall = start.elapsed();
            out.push(FrameSample {
                gpu_ms: self.gpu.read_timestamps()?,
                wall,
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
        self.target(extent)?;
        let t = self.target.as_ref().unwrap();
        let call = self.call(pipeline, buffer, push, t)?;
        let (image, readback) = (t.color.0, t.readback);
        let ext = t.extent;
        self.gpu.submit_and_wait(|d, cmd| {
            record_draw(d, cmd, None, &call);
            let region = vk::BufferImageCopy {
                buffer_offset: 0,
                buffer_row_length: 0,
                buffer_image_height: 0,
                image_subresource: vk::ImageSubresourceLayers {
                    aspect_mask: vk::ImageAspectFlags::COLOR,
                    mip_level: 0,
                    base_array_layer: 0,
                    layer_count: 1,
                },
                image_offset: vk::Offset3D { x: 0, y: 0, z: 0 },
                image_extent: vk::Extent3D {
                    width: ext.width,
                    height: ext.height,
                    depth: 1,
                },
            };
            let to_host = vk::MemoryBarrier::default()
                .src_access_mask(vk::AccessFlags::TRANSFER_WRITE)
                .dst_access_mask(vk::AccessFlags::HOST_READ);
            unsafe {
                d.cmd_copy_image_to_buffer(
                    cmd,
                    image,
                    vk::ImageLayout::TRANSFER_SRC_OPTIMAL,
                    readback.0,
                    &[region],
                );
                d.cmd_pipeline_barrier(
                    cmd,
                    vk::PipelineStageFlags::TRANSFER,
                    vk::PipelineStageFlags::HOST,
                    vk::DependencyFlags::empty(),
                    &[to_host],
                    &[],
                    &[],
                );
            }
        })?;
        let bytes = ext.width as usize * ext.height as usize * 4;
        let mut rgba = vec![0u8; bytes];
        unsafe {
            let ptr = self
                .gpu
                .device
                .map_memory(readback.1, 0, bytes as u64, vk::MemoryMapFlags::empty())
                .map_err(|r| {
                    RenderError::Io(std::io::Error::other(format!("readback map failed: {r}")))
                })?;
            std::ptr::copy_nonoverlapping(ptr as *const u8, rgba.as_mut_ptr(), bytes);
            self.gpu.device.unmap_memory(readback.1);
        }
        Ok(Image {
            width: ext.width,
            height: ext.height,
            rgba,
        })
    }
}
