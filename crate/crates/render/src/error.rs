use std::io;

use thiserror::Error;

pub type Result<T, E = RenderError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum RenderError {
    /// No usable device, loader or window system.
    #[error("device error: {0}")]
    Device(String),
    /// The device lacks something the requested variant needs.
    #[error("{feature} is not supported by {device}: {remediation}")]
    Feature {
        feature: String,
        device: String,
        remediation: String,
    },
    #[error("shader '{module}': {message}")]
    Shader { module: String, message: String },
    #[error("cannot allocate {requested_bytes} bytes: {message}")]
    Capacity {
        requested_bytes: u64,
        message: String,
    },
    #[error("{0}")]
    Validation(String),
    #[error("Vulkan call {call} failed: {result}")]
    Vulkan {
        call: &'static str,
        result: ash::vk::Result,
    },
    #[error(transparent)]
    Core(#[from] dualprec::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl RenderError {
    pub(crate) fn shader(module: impl Into<String>, message: impl Into<String>) -> Self {
        RenderError::Shader {
            module: module.into(),
            message: message.into(),
        }
    }
}

pub(crate) trait VkResultExt<T> {
    fn call(self, name: &'static str) -> Result<T>;
}

impl<T> VkResultExt<T> for std::result::Result<T, ash::vk::Result> {
    fn call(self, name: &'static str) -> Result<T> {
        self.map_err(|result| RenderError::Vulkan { call: name, result })
    }
}
