//! Acceptance gate: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p dualprec --test acceptance`. The optional 10M-row
//! dataset tier runs only when `DUALPREC_ACCEPT_10M=1`.

mod common;

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{julia_oracle, key, mandelbulb_oracle, same_value};
use dualprec::dataset::csv::{read_csv_file, write_csv_file};
use dualprec::df64::{two_prod, two_sum};
use dualprec::fractal::{
    gen_random_2d, julia_quat_points, mandelbulb_points, menger_cubes, sierpinski_tetrahedra,
    JuliaParams, MandelbulbParams, MengerParams, SierpinskiParams,
};
use dualprec::precision::{
    collapse_ratio, error_report, render_mandelbrot_image, transform_point, zoom_study_views,
    TransformStack,
};
use dualprec::{Df64, Precision};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPLIT_BOUND: f64 = 1.0 / (1u64 << 44) as f64;
const ADD_MUL_BOUND: f64 = 1.0 / (1u64 << 44) as f64;
const DIV_BOUND: f64 = 1.0 / (1u64 << 43) as f64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn signed(rng: &mut impl Rng, lo: i32, hi: i32) -> f64 {
    let v = rng.random_range(1.0..2.0f64) * 2f64.powi(rng.random_range(lo..hi));
    if rng.random_bool(0.5) {
        -v
    } else {
        v
    }
}

fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn reconstruction() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst = 0.0f64;
    for _ in 0..1_000_000 {
        let v = signed(&mut rng, -100, 100);
        let d = Df64::split(v).expect("in range");
        worst = worst.max((v - d.to_f64()).abs() / v.abs());
    }
    let t = start.elapsed();
    check(
        worst <= SPLIT_BOUND && t < Duration::from_secs(10),
        format!("10^6 values, |v| in [2^-100, 2^100]: worst rel error {worst:.3e} (bound 2^-44 = {SPLIT_BOUND:.3e}), {t:.2?} (limit 10 s)"),
    )
}

fn arithmetic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut worst = [0.0f64; 4];
    let mut eft_failures = 0;
    for _ in 0..100_000 {
        let (x, y) = (signed(&mut rng, -50, 50), signed(&mut rng, -50, 50));
        let (a, b) = (Df64::split(x).unwrap(), Df64::split(y).unwrap());
        let (xa, yb) = (a.to_f64(), b.to_f64());
        let ops = [
            (a.checked_add(b), xa + yb),
            (a.checked_sub(b), xa - yb),
            (a.checked_mul(b), xa * yb),
            (a.checked_div(b), xa / yb),
        ];
        for (k, (got, want)) in ops.into_iter().enumerate() {
            worst[k] = worst[k].max(rel(got.expect("in range").to_f64(), want));
        }
        let (p, q) = (x as f32, y as f32);
        let (s, e) = two_sum(p, q).unwrap();
        if s != p + q || !same_value(&[s, e], &[p, q]) {
            eft_failures += 1;
        }
        let (m, f) = two_prod(p, q).unwrap();
        if m != p * q || m as f64 + f as f64 != p as f64 * q as f64 {
            eft_failures += 1;
        }
    }
    let pass = worst[..3].iter().all(|&w| w <= ADD_MUL_BOUND)
        && worst[3] <= DIV_BOUND
        && eft_failures == 0;
    check(
        pass,
        format!(
            "10^5 pairs/op: add {:.2e} sub {:.2e} mul {:.2e} (bound {ADD_MUL_BOUND:.2e}), div {:.2e} (bound {DIV_BOUND:.2e}); error-free transform mismatches {eft_failures}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn zoom_study() -> Outcome {
    let start = Instant::now();
    let views = zoom_study_views();
    let deep = &views[2];
    let c32 = collapse_ratio(deep, Precision::Binary32).unwrap();
    let c64 = collapse_ratio(deep, Precision::Binary64).unwrap();
    let mut differing = Vec::new();
    for v in &views {
        let mut a = Vec::new();
        let mut b = Vec::new();
        render_mandelbrot_image(v, Precision::Binary32, &mut a).unwrap();
        render_mandelbrot_image(v, Precision::Binary64, &mut b).unwrap();
        let pixels = a.chunks(3).zip(b.chunks(3)).filter(|(p, q)| p != q).count();
        differing.push(pixels);
    }
    let t = start.elapsed();
    let pass = c32 >= 0.9
        && c64 == 0.0
        && differing[0] == 0
        && differing[2] > 0
        && t < Duration::from_secs(30);
    check(
        pass,
        format!(
            "collapse binary32 {c32:.4} (>= 0.9), binary64 {c64} (= 0); differing pixels at 1e-1/1e-4/1e-6: {}/{}/{} (need 0 at 1e-1, > 0 at 1e-6); iterations {}/{}/{}; {t:.2?} (limit 30 s)",
            differing[0], differing[1], differing[2], views[0].max_iterations, views[1].max_iterations, views[2].max_iterations
        ),
    )
}

fn count_laws() -> Outcome {
    let start = Instant::now();
    let menger_ok = (0..=3).all(|n| {
        let p = MengerParams {
            max_iterations: n,
            ..Default::default()
        };
        menger_cubes(&p).unwrap().len() == 20usize.pow(n)
    });
    let sierpinski_ok = (0..=5).all(|n| {
        let p = SierpinskiParams {
            n,
            ..Default::default()
        };
        sierpinski_tetrahedra(&p).unwrap().len() == 4usize.pow(n)
    });
    let bulb = MandelbulbParams {
        resolution: 32,
        ..Default::default()
    };
    let bulb_points: Vec<_> = mandelbulb_points(&bulb)
        .unwrap()
        .points
        .iter()
        .map(|q| key(q.coords))
        .collect();
    let bulb_ok = bulb_points == mandelbulb_oracle(&bulb);
    let julia = JuliaParams {
        resolution: 32,
        ..Default::default()
    };
    let d = julia_quat_points(&julia).unwrap();
    let julia_points: Vec<_> = d
        .points
        .iter()
        .zip(d.escape_counts.as_ref().unwrap())
        .map(|(q, &n)| (key(q.coords), n))
        .collect();
    let julia_ok = julia_points == julia_oracle(&julia);
    let t = start.elapsed();
    check(
        menger_ok && sierpinski_ok && bulb_ok && julia_ok && t < Duration::from_secs(60),
        format!(
            "menger 20^n (n<=3) {menger_ok}, sierpinski 4^n (n<=5) {sierpinski_ok}, mandelbulb@32 = oracle {bulb_ok} ({} points), julia@32 = oracle {julia_ok} ({} points); {t:.2?} (limit 60 s)",
            bulb_points.len(),
            julia_points.len()
        ),
    )
}

fn dataset_protocol() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut tiers = vec![10_000usize, 100_000, 1_000_000];
    let big = std::env::var("DUALPREC_ACCEPT_10M").is_ok_and(|v| v == "1");
    if big {
        tiers.push(10_000_000);
    }
    let mut notes = Vec::new();
    let mut pass = true;
    for n in tiers {
        let start = Instant::now();
        let d = gen_random_2d(n, n as u64).unwrap();
        let unique: HashSet<_> = d
            .points
            .iter()
            .map(|p| [p.coords[0].to_bits(), p.coords[1].to_bits()])
            .collect();
        let in_range = d
            .points
            .iter()
            .all(|p| p.coords[..2].iter().all(|c| *c > -1.0 && *c < 1.0));
        let path = dir.path().join(format!("random2d_{n}.csv"));
        write_csv_file(&d, &path).unwrap();
        let back = read_csv_file(&path).unwrap();
        let exact = back.len() == d.len()
            && back.points.iter().zip(&d.points).all(|(a, b)| {
                a.coords
                    .iter()
                    .chain(&a.color)
                    .zip(b.coords.iter().chain(&b.color))
                    .all(|(x, y)| x.to_bits() == y.to_bits())
            });
        let t = start.elapsed();
        let ok = unique.len() == n
            && in_range
            && exact
            && (n != 1_000_000 || t < Duration::from_secs(120));
        pass &= ok;
        notes.push(format!(
            "{n}: {} in {t:.2?}",
            if ok { "ok" } else { "FAILED" }
        ));
    }
    if !big {
        notes.push("10M tier skipped (set DUALPREC_ACCEPT_10M=1)".into());
    }
    check(
        pass,
        format!(
            "unique, in (-1, 1), CSV bit-exact: {} (1M limit 120 s)",
            notes.join(", ")
        ),
    )
}

fn transform_dominance() -> Outcome {
    let d = gen_random_2d(10_000, 0x5eed_0006).unwrap();
    let t = TransformStack::far_translated(1e6, (1024, 1024)).unwrap();
    let single = error_report(&d, &t, Precision::Binary32).unwrap();
    let double = error_report(&d, &t, Precision::Df64).unwrap();
    let m = t.mvp().0;
    let exact = d.points.iter().all(|p| {
        let v = [p.coords[0], p.coords[1], p.coords[2], 1.0];
        let naive: [f64; 4] = std::array::from_fn(|r| {
            let mut acc = m[r][0] * v[0];
            for k in 1..4 {
                acc += m[r][k] * v[k];
            }
            acc
        });
        transform_point(p, &t, Precision::Binary64).unwrap() == naive
    });
    let ratio = single.max_pixel_error / double.max_pixel_error;
    check(
        double.max_pixel_error <= single.max_pixel_error / 1e3 && exact,
        format!(
            "offset 1e6, 10^4 points, 1024x1024: binary32 max {:.3e} px, df64 max {:.3e} px (ratio {ratio:.2e}, need >= 1e3); binary64 = naive product {exact}",
            single.max_pixel_error, double.max_pixel_error
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("1 df64 reconstruction", reconstruction),
        ("2 df64 arithmetic oracle", arithmetic),
        ("3 Mandelbrot zoom study", zoom_study),
        ("4 generator count laws", count_laws),
        ("5 dataset protocol", dataset_protocol),
        ("6 transform-error dominance", transform_dominance),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        failed += !o.pass as usize;
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} of 6 criteria passed", 6 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
