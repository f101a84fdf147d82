//! Frame timing, FPS counting and the cross-thread handoffs.

use std::collections::VecDeque;
use std::fmt;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crate::camera::CameraState;

/// Where a render time came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimingSource {
    /// Timestamp-query deltas scaled by the device timestamp period.
    GpuTimestamp,
    /// Host wall clock around submission; used when timestamps are unavailable.
    WallClock,
}

impl TimingSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TimingSource::GpuTimestamp => "gpu-timestamp",
            TimingSource::WallClock => "wall-clock",
        }
    }
}

impl fmt::Display for TimingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameMetrics {
    /// Median per-frame render time, milliseconds.
    pub gpu_render_ms: f64,
    /// Frames over wall time across the measurement window.
    pub fps: f64,
    /// Frames rendered so far, counting from 1.
    pub frame_index: u64,
    pub timing: TimingSource,
}

impl fmt::Display for FrameMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.3} ms ({}), {:.1} fps, frame {}",
            self.gpu_render_ms, self.timing, self.fps, self.frame_index
        )
    }
}

/// Median of the samples; the mean of the middle pair for even counts.
pub fn median(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    })
}

/// Frames per second averaged over a sliding time window.
#[derive(Debug)]
pub struct FpsCounter {
    window: Duration,
    stamps: VecDeque<Instant>,
}

impl FpsCounter {
    pub fn new(window: Duration) -> Self {
        FpsCounter {
            window,
            stamps: VecDeque::new(),
        }
    }

    /// Records a presented frame and returns the current average.
    pub fn tick(&mut self, now: Instant) -> f64 {
        self.stamps.push_back(now);
        while let Some(&front) = self.stamps.front() {
            if now.duration_since(front) > self.window && self.stamps.len() > 2 {
                self.stamps.pop_front();
            } else {
                break;
            }
        }
        self.fps()
    }

    pub fn fps(&self) -> f64 {
        match (self.stamps.front(), self.stamps.back()) {
            (Some(&a), Some(&b)) if self.stamps.len() >= 2 && b > a => {
                (self.stamps.len() - 1) as f64 / b.duration_since(a).as_secs_f64()
            }
            _ => 0.0,
        }
    }
}

/// Latest-value-wins handoff of camera state from an input thread to the
/// render thread.
#[derive(Clone, Debug, Default)]
pub struct CameraMailbox {
    slot: Arc<Mutex<Option<CameraState>>>,
}

impl CameraMailbox {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces any state not yet taken.
    pub fn post(&self, state: CameraState) {
        *self.slot.lock().unwrap_or_else(|p| p.into_inner()) = Some(state);
    }

    pub fn take(&self) -> Option<CameraState> {
        self.slot.lock().unwrap_or_else(|p| p.into_inner()).take()
    }
}

/// Single-producer snapshot of the most recent metrics.
#[derive(Clone, Debug, Default)]
pub struct MetricsSnapshot {
    slot: Arc<Mutex<Option<FrameMetrics>>>,
}

impl MetricsSnapshot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn publish(&self, m: FrameMetrics) {
        *self.slot.lock().unwrap_or_else(|p| p.into_inner()) = Some(m);
    }

    pub fn latest(&self) -> Option<FrameMetrics> {
        *self.slot.lock().unwrap_or_else(|p| p.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_even_empty() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn fps_over_a_window() {
        let mut c = FpsCounter::new(Duration::from_secs(1));
        let t0 = Instant::now();
        assert_eq!(c.tick(t0), 0.0);
        let mut fps = 0.0;
        for k in 1..=20 {
            fps = c.tick(t0 + Duration::from_millis(50 * k));
        }
        assert!((fps - 20.0).abs() < 1e-9, "{fps}");
    }

    #[test]
    fn mailbox_keeps_only_the_latest() {
        let m = CameraMailbox::new();
        assert!(m.take().is_none());
        let mut s = CameraState::default();
        m.post(s);
        s.distance = 9.0;
        let writer = m.clone();
        std::thread::spawn(move || writer.post(s)).join().unwrap();
        assert_eq!(m.take().unwrap().distance, 9.0);
        assert!(m.take().is_none());
    }
}
