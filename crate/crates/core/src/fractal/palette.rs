use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Piecewise-linear color ramp through a list of RGB stops.
#[derive(Clone, Debug, PartialEq)]
pub struct Palette {
    stops: Vec<[f64; 3]>,
}

impl Default for Palette {
    /// Fully saturated hue ramp from red (0°) to magenta (300°).
    fn default() -> Self {
        Palette {
            stops: vec![
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 1.0, 1.0],
                [0.0, 0.0, 1.0],
                [1.0, 0.0, 1.0],
            ],
        }
    }
}

impl Palette {
    pub fn new(stops: Vec<[f64; 3]>) -> Result<Self> {
        if stops.is_empty() {
            return Err(Error::Validation("palette needs at least one stop".into()));
        }
        if stops.iter().flatten().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::Validation("palette stops must lie in [0, 1]".into()));
        }
        Ok(Palette { stops })
    }

    pub fn start(&self) -> [f64; 3] {
        self.stops[0]
    }

    /// Color at `t` in `[0, 1]`; values outside are clamped.
    pub fn sample(&self, t: f64) -> [f64; 3] {
        let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
        let segments = self.stops.len() - 1;
        if segments == 0 {
            return self.stops[0];
        }
        let pos = t * segments as f64;
        let i = (pos.floor() as usize).min(segments - 1);
        let f = pos - i as f64;
        let (a, b) = (self.stops[i], self.stops[i + 1]);
        std::array::from_fn(|k| (a[k] + (b[k] - a[k]) * f).clamp(0.0, 1.0))
    }
}

/// Assigns every point a color from its normalized position in the bounding
/// box, or from its escape count when the dataset carries counts. A degenerate
/// range (single point, constant axis) normalizes to 0.
pub fn colorize(dataset: &Dataset, palette: &Palette) -> Result<Dataset> {
    if dataset.is_empty() {
        return Err(Error::Validation("cannot colorize an empty dataset".into()));
    }
    let mut out = dataset.clone();
    match &dataset.escape_counts {
        Some(counts) => {
            let lo = counts.iter().copied().min().unwrap_or(0) as f64;
            let hi = counts.iter().copied().max().unwrap_or(0) as f64;
            for (p, &n) in out.points.iter_mut().zip(counts) {
                p.color = palette.sample(normalize(n as f64, lo, hi));
            }
        }
        None => {
            let dims = dataset.dims.count();
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for p in &dataset.points {
                for k in 0..dims {
                    lo[k] = lo[k].min(p.coords[k]);
                    hi[k] = hi[k].max(p.coords[k]);
                }
            }
            for p in &mut out.points {
                let t = (0..dims)
                    .map(|k| normalize(p.coords[k], lo[k], hi[k]))
                    .sum::<f64>()
                    / dims as f64;
                p.color = palette.sample(t);
            }
        }
    }
    Ok(out)
}

fn normalize(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}
