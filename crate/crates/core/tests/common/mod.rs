//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use dualprec::fractal::{JuliaParams, MandelbulbParams};

pub fn key(p: [f64; 3]) -> [u64; 3] {
    p.map(f64::to_bits)
}

pub fn lattice(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    v[n - 1] = hi;
    v
}

pub fn bulb_member(c: [f64; 3], p: &MandelbulbParams) -> bool {
    let mut v = c;
    for _ in 0..p.max_iterations {
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if r2 >= p.bailout {
            return false;
        }
        let r = r2.sqrt();
        let theta = (v[0] * v[0] + v[1] * v[1]).sqrt().atan2(v[2]) * p.power;
        let phi = v[1].atan2(v[0]) * p.power;
        let rn = r.powf(p.power);
        v = [
            rn * theta.sin() * phi.cos() + c[0],
            rn * theta.sin() * phi.sin() + c[1],
            rn * theta.cos() + c[2],
        ];
    }
    true
}

/// `(v, w)^2 = (2 w v, w^2 - |v|^2)` for quaternions stored as `(x, y, z, w)`.
pub fn julia_count(x: f64, y: f64, z: f64, p: &JuliaParams) -> Option<u32> {
    let (mut v, mut w) = ([x, y, z], 0.0f64);
    let norm = |v: [f64; 3], w: f64| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + w * w).sqrt();
    let mut n = 0;
    while n < p.max_iter && norm(v, w) < p.threshold {
        let w2 = w * w - v[0] * v[0] - v[1] * v[1] - v[2] * v[2];
        v = [
            2.0 * w * v[0] + p.c[0],
            2.0 * w * v[1] + p.c[1],
            2.0 * w * v[2] + p.c[2],
        ];
        w = w2 + p.c[3];
        n += 1;
    }
    (norm(v, w) >= p.threshold).then_some(n)
}

/// A point of the unit sponge lies in a kept cube of depth `n` iff no base-3
/// digit position has two or more coordinates equal to 1.
pub fn in_sponge(c: [f64; 3], depth: u32) -> bool {
    let mut c = c;
    for _ in 0..depth {
        let digits = c.map(|v| ((v * 3.0).floor() as i64).clamp(0, 2));
        if digits.iter().filter(|&&d| d == 1).count() >= 2 {
            return false;
        }
        c = std::array::from_fn(|k| c[k] * 3.0 - digits[k] as f64);
    }
    true
}

/// `x = m * 2^e` with `m` a signed integer.
pub fn decompose(x: f32) -> (i128, i32) {
    let bits = x.to_bits();
    let exp = ((bits >> 23) & 0xff) as i32;
    let frac = (bits & 0x7f_ffff) as i128;
    let (m, e) = if exp == 0 {
        (frac, -149)
    } else {
        (frac | 1 << 23, exp - 150)
    };
    (if bits >> 31 == 1 { -m } else { m }, e)
}

/// Exact sum of binary32 values as a fixed-point integer at the smallest
/// exponent involved. Only valid while the spread of exponents stays below
/// ~100 bits, which callers must ensure.
pub fn exact_sum(values: &[f32]) -> (i128, i32) {
    let parts: Vec<_> = values.iter().map(|&v| decompose(v)).collect();
    let base = parts
        .iter()
        .filter(|(m, _)| *m != 0)
        .map(|&(_, e)| e)
        .min()
        .unwrap_or(0);
    let total = parts
        .iter()
        .map(|&(m, e)| if m == 0 { 0 } else { m << (e - base) })
        .sum();
    (total, base)
}

pub fn same_value(a: &[f32], b: &[f32]) -> bool {
    let (x, ex) = exact_sum(a);
    let (y, ey) = exact_sum(b);
    let base = ex.min(ey);
    (x << (ex - base)) == (y << (ey - base))
}

/// Bulb members of the parameter lattice, in lattice order.
pub fn mandelbulb_oracle(p: &MandelbulbParams) -> Vec<[u64; 3]> {
    let axes: Vec<Vec<f64>> = (0..3)
        .map(|k| lattice(p.bounds.min[k], p.bounds.max[k], p.resolution))
        .collect();
    let mut out = Vec::new();
    for &x in &axes[0] {
        for &y in &axes[1] {
            for &z in &axes[2] {
                if bulb_member([x, y, z], p) {
                    out.push(key([x, y, z]));
                }
            }
        }
    }
    out
}

/// Escaping lattice points with their counts, in lattice order.
pub fn julia_oracle(p: &JuliaParams) -> Vec<([u64; 3], u32)> {
    let axis = lattice(-p.extent, p.extent, p.resolution);
    let mut out = Vec::new();
    for &x in &axis {
        for &y in &axis {
            for &z in &axis {
                if let Some(n) = julia_count(x, y, z, p) {
                    out.push((key([x, y, z]), n));
                }
            }
        }
    }
    out
}
