//! Orbit camera and its MVP matrix.

use std::f64::consts::FRAC_PI_2;

use dualprec::precision::Mat4;
use dualprec::DatasetStats;

/// Distance factor per scroll step.
pub const ZOOM_BASE: f64 = 1.1;
/// Vertical field of view, radians.
pub const FOVY: f64 = std::f64::consts::FRAC_PI_4;

/// Largest elevation magnitude; the open bound `pi/2` itself is excluded.
pub fn max_elevation() -> f64 {
    FRAC_PI_2.next_down()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraState {
    pub azimuth: f64,
    pub elevation: f64,
    pub distance: f64,
    pub target: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InputEvent {
    /// Orbit by the given azimuth and elevation deltas, radians.
    Drag { dx: f64, dy: f64 },
    /// Positive steps move closer, negative ones further away.
    Scroll { steps: f64 },
}

impl Default for CameraState {
    fn default() -> Self {
        CameraState {
            azimuth: 0.0,
            elevation: 0.0,
            distance: 3.0,
            target: [0.0; 3],
        }
    }
}

impl CameraState {
    /// Looks at the centre of a bounding box from far enough to see all of it.
    pub fn framing(stats: &DatasetStats) -> CameraState {
        let mut target = [0.0; 3];
        let mut radius = 0.0f64;
        for (k, &(lo, hi)) in stats.bbox.iter().enumerate().take(3) {
            target[k] = lo + (hi - lo) / 2.0;
            radius = radius.max((hi - lo) / 2.0);
        }
        let radius = if radius > 0.0 { radius } else { 1.0 };
        let (azimuth, elevation) = if stats.bbox.len() == 2 {
            (0.0, 0.0)
        } else {
            (0.6, 0.4)
        };
        CameraState {
            azimuth,
            elevation,
            distance: radius * 1.8 / (FOVY / 2.0).tan(),
            target,
        }
    }

    pub fn eye(&self) -> [f64; 3] {
        let (se, ce) = self.elevation.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        [
            self.target[0] + self.distance * ce * sa,
            self.target[1] + self.distance * se,
            self.target[2] + self.distance * ce * ca,
        ]
    }

    /// Projection times view, computed in binary64.
    pub fn mvp(&self, aspect: f64) -> Mat4 {
        let view = Mat4::look_at(self.eye(), self.target, [0.0, 1.0, 0.0]);
        let proj = Mat4::perspective(FOVY, aspect, self.distance * 0.01, self.distance * 100.0);
        proj * view
    }
}

/// Applies one input event. Pure; elevation stays inside `(-pi/2, pi/2)`.
pub fn camera_update(state: CameraState, event: InputEvent) -> CameraState {
    let mut s = state;
    match event {
        InputEvent::Drag { dx, dy } => {
            s.azimuth += dx;
            let e = max_elevation();
            s.elevation = (s.elevation + dy).clamp(-e, e);
        }
        InputEvent::Scroll { steps } => {
            // dividing on the way in and multiplying on the way out keeps an
            // in/out pair within one rounding of the start
            let factor = ZOOM_BASE.powf(steps.abs());
            if steps > 0.0 {
                s.distance /= factor;
            } else if steps < 0.0 {
                s.distance *= factor;
            }
            if !(s.distance > 0.0 && s.distance.is_finite()) {
                s.distance = state.distance;
            }
        }
    }
    s
}
