//! Dataset generators.
//!
//! Every generator is a pure function of its parameters (and seed): repeated
//! calls return bit-identical datasets, and lattice generators that run in
//! parallel reassemble their output in lattice order.

mod julia;
mod mandelbrot;
mod mandelbulb;
mod menger;
mod palette;
mod random;
mod sierpinski;

pub use julia::{julia_escape, julia_quat_points, quat_mul, JuliaParams, Quat};
pub use mandelbrot::{
    axis_samples, escape_time, mandelbrot_grid, AxisSamples, IterationGrid, MandelbrotView,
};
pub use mandelbulb::{mandelbulb_iterations, mandelbulb_points, Bounds3, MandelbulbParams};
pub use menger::{menger_cubes, menger_points, Cube, MengerParams, MAX_MENGER_DEPTH};
pub use palette::{colorize, Palette};
pub use random::gen_random_2d;
pub use sierpinski::{
    sierpinski_points, sierpinski_tetrahedra, SierpinskiParams, Tetrahedron, MAX_SIERPINSKI_DEPTH,
};

/// `n` samples spanning `[min, max]` inclusively; a single sample sits at `min`.
pub(crate) fn lattice_axis(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let step = (max - min) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        max
                    } else {
                        (min + step * i as f64).min(max)
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::lattice_axis;

    #[test]
    fn lattice_endpoints_are_exact() {
        let a = lattice_axis(-1.2, 1.2, 64);
        assert_eq!(a.len(), 64);
        assert_eq!(a[0], -1.2);
        assert_eq!(a[63], 1.2);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(lattice_axis(0.5, 2.0, 1), vec![0.5]);
    }
}
