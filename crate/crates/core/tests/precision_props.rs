use dualprec::fractal::{gen_random_2d, MandelbrotView};
use dualprec::precision::{
    collapse_ratio, error_report, transform_point, ulp_distance, Mat4, TransformStack,
};
use dualprec::{Dataset, Dims, PointRecord, Precision};
use proptest::prelude::*;

fn naive_product(m: &[[f64; 4]; 4], p: [f64; 3]) -> [f64; 4] {
    let v = [p[0], p[1], p[2], 1.0];
    let mut out = [0.0; 4];
    for r in 0..4 {
        let mut acc = m[r][0] * v[0];
        for k in 1..4 {
            acc += m[r][k] * v[k];
        }
        out[r] = acc;
    }
    out
}

fn matrix() -> impl Strategy<Value = Mat4> {
    prop::array::uniform4(prop::array::uniform4(-1e3f64..1e3)).prop_map(Mat4)
}

fn camera_stack() -> impl Strategy<Value = TransformStack> {
    (
        0.3f64..1.5,
        0.5f64..2.0,
        2.0f64..50.0,
        -3.0f64..3.0,
        -3.0f64..3.0,
        -1e4f64..1e4,
    )
        .prop_map(|(fovy, aspect, dist, az, el, shift)| {
            let target = [shift, -shift / 2.0, shift / 3.0];
            let eye = [
                target[0] + dist * el.cos() * az.sin(),
                target[1] + dist * el.sin(),
                target[2] + dist * el.cos() * az.cos(),
            ];
            let view = Mat4::look_at(eye, target, [0.0, 1.0, 0.0]);
            let proj = Mat4::perspective(fovy, aspect, dist * 0.01, dist * 100.0);
            TransformStack::new(proj * view * Mat4::translation(target), (1024, 768)).unwrap()
        })
}

fn cloud() -> impl Strategy<Value = Dataset> {
    prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 1..24).prop_map(|pts| {
        Dataset::new(
            "cloud",
            "proptest",
            Dims::Three,
            pts.into_iter()
                .map(|c| PointRecord::new_3d(c[0], c[1], c[2], [0.5; 3]))
                .collect(),
        )
    })
}

proptest! {
    #[test]
    fn binary64_path_is_the_naive_product(m in matrix(), p in prop::array::uniform3(-1e6f64..1e6)) {
        let t = TransformStack::new(m, (16, 16)).unwrap();
        let got = transform_point(&PointRecord::new_3d(p[0], p[1], p[2], [0.0; 3]), &t, Precision::Binary64).unwrap();
        prop_assert_eq!(got, naive_product(&m.0, p));
    }

    #[test]
    fn df64_never_loses_to_binary32(t in camera_stack(), d in cloud()) {
        let single = error_report(&d, &t, Precision::Binary32).unwrap();
        let double = error_report(&d, &t, Precision::Df64).unwrap();
        prop_assert_eq!(single.sample_count, double.sample_count);
        if single.max_abs_ndc_error == 0.0 {
            prop_assert_eq!(double.max_abs_ndc_error, 0.0);
        } else {
            prop_assert!(double.max_abs_ndc_error < single.max_abs_ndc_error);
        }
    }

    #[test]
    fn reports_are_finite_and_ordered(m in matrix(), d in cloud(), prec in prop::sample::select(vec![Precision::Binary32, Precision::Df64])) {
        let t = TransformStack::new(m, (640, 480)).unwrap();
        let r = error_report(&d, &t, prec).unwrap();
        prop_assert!(r.max_abs_ndc_error.is_finite() && r.max_pixel_error.is_finite());
        prop_assert!(r.rms_ndc_error <= r.max_abs_ndc_error);
        prop_assert!(r.rms_ndc_error >= 0.0);
        prop_assert_eq!(r.sample_count + r.skipped_count, d.len());
    }

    #[test]
    fn collapse_is_monotone_in_zoom(
        center in -2.0f64..2.0,
        width in 16usize..600,
        log_zoom in -9.0f64..0.0,
        factor in 1.0f64..100.0,
        prec in prop::sample::select(Precision::ALL.to_vec()),
    ) {
        let zoom = 10f64.powf(log_zoom);
        let narrow = MandelbrotView::new(center, 0.0, zoom, width, 1).unwrap();
        let wide = MandelbrotView { zoom: zoom * factor, ..narrow };
        prop_assert!(collapse_ratio(&wide, prec).unwrap() <= collapse_ratio(&narrow, prec).unwrap());
    }

    #[test]
    fn ulp_distance_is_a_metric_on_same_sign(a in 1e-30f32..1e30, b in 1e-30f32..1e30, c in 1e-30f32..1e30) {
        let d = |x, y| ulp_distance(x, y).unwrap();
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c));
        prop_assert_eq!(d(a, a.next_up()), 1);
    }
}

#[test]
fn identity_binary32_is_narrowing_only() {
    let d = gen_random_2d(5_000, 3).unwrap();
    let t = TransformStack::identity((1024, 1024)).unwrap();
    let r = error_report(&d, &t, Precision::Binary32).unwrap();
    assert!(r.max_ulp_distance <= 1);
    assert!(r.max_abs_ndc_error <= f32::EPSILON as f64 / 2.0);
    let r = error_report(&d, &t, Precision::Df64).unwrap();
    assert_eq!(r.max_ulp_distance, 0);
}

#[test]
fn far_translation_gap_is_at_least_a_thousandfold() {
    let d = gen_random_2d(2_000, 5).unwrap();
    let t = TransformStack::far_translated(1e6, (1024, 1024)).unwrap();
    let single = error_report(&d, &t, Precision::Binary32).unwrap();
    let double = error_report(&d, &t, Precision::Df64).unwrap();
    assert!(single.max_pixel_error > 1.0, "{single}");
    assert!(
        double.max_pixel_error * 1e3 <= single.max_pixel_error,
        "{double} vs {single}"
    );
}

#[test]
fn parallel_report_matches_serial_fold() {
    let d = gen_random_2d(20_000, 9).unwrap();
    let mvp = Mat4::perspective(0.9, 1.25, 0.1, 100.0)
        * Mat4::look_at([0.3, 0.2, 3.0], [0.0; 3], [0.0, 1.0, 0.0]);
    let t = TransformStack::new(mvp, (1280, 1024)).unwrap();
    let r = error_report(&d, &t, Precision::Binary32).unwrap();
    let (mut max, mut max_px) = (0.0f64, 0.0f64);
    let mut squares = Vec::new();
    for p in &d.points {
        let a = transform_point(p, &t, Precision::Binary64).unwrap();
        let b = transform_point(p, &t, Precision::Binary32).unwrap();
        let dx = (b[0] / b[3] - a[0] / a[3]).abs();
        let dy = (b[1] / b[3] - a[1] / a[3]).abs();
        max = max.max(dx.max(dy));
        squares.push(dx.max(dy).powi(2));
        max_px = max_px.max((dx * 640.0).max(dy * 512.0));
    }
    assert_eq!(r.max_abs_ndc_error, max);
    assert_eq!(r.max_pixel_error, max_px);
    // reference: ascending order with a compensated two-sum
    squares.sort_by(f64::total_cmp);
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in squares {
        let t = s + v;
        let bb = t - s;
        c += (s - (t - bb)) + (v - bb);
        s = t;
    }
    let rms = ((s + c) / d.len() as f64).sqrt();
    assert!(
        (r.rms_ndc_error - rms).abs() <= f64::EPSILON * rms,
        "{} vs {rms}",
        r.rms_ndc_error
    );
}
