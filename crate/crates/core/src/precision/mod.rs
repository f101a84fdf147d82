//! Measuring the gap between binary32, df64 and binary64.
//!
//! [`error_report`] pushes a dataset through an MVP matrix in each precision
//! and compares the screen positions after the perspective divide;
//! [`collapse_ratio`] and [`render_mandelbrot_image`] cover the Mandelbrot
//! zoom study, where binary32 sample coordinates stop being distinct.

mod report;
mod transform;
mod ulp;
mod zoom;

pub use report::{error_report, ErrorReport, DEGENERATE_W};
pub use transform::{transform_point, Mat4, TransformStack};
pub use ulp::ulp_distance;
pub use zoom::{
    collapse_ratio, grid_rgb, render_mandelbrot_image, zoom_iterations, zoom_study_views,
    ZOOM_STUDY_BASE_ITERATIONS, ZOOM_STUDY_CENTER, ZOOM_STUDY_WIDTH, ZOOM_STUDY_ZOOMS,
};
