use std::fmt;

use rayon::prelude::*;

use super::transform::{transform_point, TransformStack};
use super::ulp::ulp_distance;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::Precision;

/// Points whose clip `w` is smaller than this in magnitude are not divided.
pub const DEGENERATE_W: f64 = 1e-300;

/// Screen-space error of one precision against the binary64 reference.
///
/// NDC errors are Chebyshev distances over `x` and `y`; the pixel error scales
/// each axis by half the viewport extent. The ulp distance is taken between
/// the binary32 roundings of the two NDC coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub precision: Precision,
    pub max_abs_ndc_error: f64,
    pub rms_ndc_error: f64,
    pub max_pixel_error: f64,
    pub max_ulp_distance: u64,
    pub sample_count: usize,
    pub skipped_count: usize,
}

impl ErrorReport {
    pub const CSV_HEADER: &'static str =
        "precision,max_abs_ndc_error,rms_ndc_error,max_pixel_error,max_ulp_distance,sample_count,skipped_count";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{},{},{}",
            self.precision,
            self.max_abs_ndc_error,
            self.rms_ndc_error,
            self.max_pixel_error,
            self.max_ulp_distance,
            self.sample_count,
            self.skipped_count
        )
    }
}

impl fmt::Display for ErrorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<8} max ndc {:.3e}  rms ndc {:.3e}  max px {:.3e}  max ulp {}  ({} points, {} skipped)",
            self.precision,
            self.max_abs_ndc_error,
            self.rms_ndc_error,
            self.max_pixel_error,
            self.max_ulp_distance,
            self.sample_count,
            self.skipped_count
        )
    }
}

/// Running sum with a Neumaier compensation term, so that the total does not
/// depend on how the points were partitioned across threads.
#[derive(Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(mut self, o: CompensatedSum) -> CompensatedSum {
        self.add(o.sum);
        self.add(o.carry);
        self
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Clone, Copy, Default)]
struct Accum {
    max_ndc: f64,
    sum_sq: CompensatedSum,
    max_px: f64,
    max_ulp: u64,
    count: usize,
    skipped: usize,
}

impl Accum {
    fn merge(self, o: Accum) -> Accum {
        Accum {
            max_ndc: self.max_ndc.max(o.max_ndc),
            sum_sq: self.sum_sq.merge(o.sum_sq),
            max_px: self.max_px.max(o.max_px),
            max_ulp: self.max_ulp.max(o.max_ulp),
            count: self.count + o.count,
            skipped: self.skipped + o.skipped,
        }
    }
}

const CHUNK: usize = 4096;

fn ndc(clip: [f64; 4]) -> Option<[f64; 2]> {
    if clip[3].abs() < DEGENERATE_W {
        return None;
    }
    let v = [clip[0] / clip[3], clip[1] / clip[3]];
    v.iter().all(|c| c.is_finite()).then_some(v)
}

fn narrow(v: f64) -> f32 {
    (v as f32).clamp(f32::MIN, f32::MAX)
}

/// Compares `precision` against the binary64 path point by point.
pub fn error_report(
    dataset: &Dataset,
    t: &TransformStack,
    precision: Precision,
) -> Result<ErrorReport> {
    if dataset.is_empty() {
        return Err(Error::Validation(
            "error report needs a nonempty dataset".into(),
        ));
    }
    let (w, h) = t.viewport();
    let (half_w, half_h) = (w as f64 / 2.0, h as f64 / 2.0);
    let chunks = dataset
        .points
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Accum::default();
            for p in chunk {
                let reference = transform_point(p, t, Precision::Binary64)?;
                let test = transform_point(p, t, precision)?;
                let (Some(r), Some(c)) = (ndc(reference), ndc(test)) else {
                    acc.skipped += 1;
                    continue;
                };
                let (dx, dy) = ((c[0] - r[0]).abs(), (c[1] - r[1]).abs());
                let e = dx.max(dy);
                let ulp = ulp_distance(narrow(c[0]), narrow(r[0]))?
                    .max(ulp_distance(narrow(c[1]), narrow(r[1]))?);
                acc.max_ndc = acc.max_ndc.max(e);
                acc.sum_sq.add(e * e);
                acc.max_px = acc.max_px.max((dx * half_w).max(dy * half_h));
                acc.max_ulp = acc.max_ulp.max(ulp);
                acc.count += 1;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<Accum>>>()?;
    // chunks are merged in order, so the result does not depend on scheduling
    let acc = chunks.into_iter().fold(Accum::default(), Accum::merge);
    let rms = if acc.count == 0 {
        0.0
    } else {
        // the sum can round above count * max^2 by a few ulps
        (acc.sum_sq.value() / acc.count as f64)
            .sqrt()
            .min(acc.max_ndc)
    };
    Ok(ErrorReport {
        precision,
        max_abs_ndc_error: acc.max_ndc,
        rms_ndc_error: rms,
        max_pixel_error: acc.max_px,
        max_ulp_distance: acc.max_ulp,
        sample_count: acc.count,
        skipped_count: acc.skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dims, PointRecord};
    use crate::precision::Mat4;

    fn cloud(points: Vec<PointRecord>) -> Dataset {
        Dataset::new("t", "test", Dims::Three, points)
    }

    #[test]
    fn identity_on_binary32_lattice_is_exact() {
        let d = cloud(
            (0..8)
                .map(|i| PointRecord::new_3d(i as f64 / 8.0, -(i as f64) / 4.0, 0.5, [0.0; 3]))
                .collect(),
        );
        let t = TransformStack::identity((1024, 1024)).unwrap();
        for p in [Precision::Binary32, Precision::Df64] {
            let r = error_report(&d, &t, p).unwrap();
            assert_eq!(r.max_pixel_error, 0.0);
            assert_eq!(r.max_ulp_distance, 0);
            assert_eq!(r.sample_count, 8);
        }
    }

    #[test]
    fn degenerate_w_is_skipped() {
        // w = z, so the point on z = 0 cannot be divided
        let mut m = Mat4::IDENTITY;
        m.0[3] = [0.0, 0.0, 1.0, 0.0];
        let t = TransformStack::new(m, (8, 8)).unwrap();
        let d = cloud(vec![
            PointRecord::new_3d(0.1, 0.2, 0.0, [0.0; 3]),
            PointRecord::new_3d(0.1, 0.2, 2.0, [0.0; 3]),
        ]);
        let r = error_report(&d, &t, Precision::Binary32).unwrap();
        assert_eq!(r.skipped_count, 1);
        assert_eq!(r.sample_count, 1);
        assert!(r.max_abs_ndc_error.is_finite() && r.rms_ndc_error.is_finite());
    }

    #[test]
    fn empty_dataset_rejected() {
        let t = TransformStack::identity((8, 8)).unwrap();
        assert!(error_report(&cloud(Vec::new()), &t, Precision::Df64).is_err());
    }

    #[test]
    fn csv_row_has_every_field() {
        let t = TransformStack::far_translated(1e6, (1024, 1024)).unwrap();
        let d = cloud(vec![PointRecord::new_3d(0.3, 0.7, 0.0, [0.0; 3])]);
        let r = error_report(&d, &t, Precision::Binary32).unwrap();
        let row = r.csv_row();
        assert_eq!(
            row.split(',').count(),
            ErrorReport::CSV_HEADER.split(',').count()
        );
        assert!(row.starts_with("binary32,"));
    }
}
