//! Float-float arithmetic against exact integer and binary64 oracles.

mod common;

use common::same_value;
use dualprec::df64::{fast_two_sum, two_prod, two_sum, ulp32, veltkamp_split};
use dualprec::{Df64, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const REL_ADD_MUL: f64 = 1.0 / (1u64 << 44) as f64;
const REL_DIV: f64 = 1.0 / (1u64 << 43) as f64;

/// Random binary32 with magnitude in `[2^lo, 2^hi)`, random sign.
fn random_f32(rng: &mut impl Rng, lo: i32, hi: i32) -> f32 {
    let e = rng.random_range(lo..hi);
    let m: f32 = rng.random_range(1.0..2.0);
    let s = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
    s * m * 2f32.powi(e)
}

fn random_f64(rng: &mut impl Rng, lo: i32, hi: i32) -> f64 {
    let e = rng.random_range(lo..hi);
    let m: f64 = rng.random_range(1.0..2.0);
    let s = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
    s * m * 2f64.powi(e)
}

#[test]
fn two_sum_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100_000 {
        let (a, b) = (random_f32(&mut rng, -40, 40), random_f32(&mut rng, -40, 40));
        let (s, e) = two_sum(a, b).unwrap();
        assert_eq!(s, a + b);
        assert!(same_value(&[s, e], &[a, b]), "{a:e} + {b:e}");
        if a.abs() >= b.abs() {
            assert_eq!(fast_two_sum(a, b), (s, e));
        }
    }
}

#[test]
fn two_prod_is_exact() {
    // a 24x24-bit product has at most 48 significant bits, so binary64 holds
    // it; exponents stay where the residual cannot go subnormal
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100_000 {
        let (a, b) = (random_f32(&mut rng, -50, 50), random_f32(&mut rng, -50, 50));
        let (p, e) = two_prod(a, b).unwrap();
        assert_eq!(p, a * b);
        assert_eq!(p as f64 + e as f64, a as f64 * b as f64, "{a:e} * {b:e}");
    }
    let edges = [
        (f32::MAX, 1.0),
        (f32::MAX, -0.75),
        (3.0e38, 1.1e-30),
        (2.8e37, 1e-20),
        (1.0e19, 3.3e19),
    ];
    for (a, b) in edges {
        let (p, e) = two_prod(a, b).unwrap();
        assert_eq!(p as f64 + e as f64, a as f64 * b as f64, "{a:e} * {b:e}");
    }
}

#[test]
fn veltkamp_halves_multiply_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10_000 {
        let a = random_f32(&mut rng, -120, 127);
        let (hi, lo) = veltkamp_split(a);
        assert_eq!(hi + lo, a);
        assert!(hi.to_bits() & 0xfff == 0, "{a:e} -> {hi:e}");
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

#[test]
fn arithmetic_tracks_binary64() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20_000 {
        let (x, y) = (random_f64(&mut rng, -50, 50), random_f64(&mut rng, -50, 50));
        let (a, b) = (Df64::split(x).unwrap(), Df64::split(y).unwrap());
        let (xa, yb) = (a.to_f64(), b.to_f64());
        let cases = [
            (a.checked_add(b).unwrap(), xa + yb, REL_ADD_MUL),
            (a.checked_sub(b).unwrap(), xa - yb, REL_ADD_MUL),
            (a.checked_mul(b).unwrap(), xa * yb, REL_ADD_MUL),
            (a.checked_div(b).unwrap(), xa / yb, REL_DIV),
        ];
        for (got, want, bound) in cases {
            assert!(got.is_canonical());
            assert!(
                rel_err(got.to_f64(), want) <= bound,
                "{x:e}, {y:e}: {got} vs {want:e}"
            );
        }
    }
}

#[test]
fn cancellation_keeps_the_residual() {
    let big = Df64::split(1e8 + 1.0).unwrap();
    let r = big.checked_sub(Df64::split(1e8).unwrap()).unwrap();
    assert_eq!(r.to_f64(), 1.0);
    // binary32 alone loses it
    assert_eq!((1e8f32 + 1.0) - 1e8f32, 0.0);
}

#[test]
fn range_errors() {
    assert!(matches!(Df64::split(1e39), Err(Error::Range(_))));
    assert!(matches!(Df64::split(f64::NAN), Err(Error::Range(_))));
    let big = Df64::split(3e38).unwrap();
    assert!(matches!(big.checked_add(big), Err(Error::Range(_))));
    assert!(matches!(big.checked_mul(big), Err(Error::Range(_))));
    let tiny = Df64::split(1e-30).unwrap();
    assert!(matches!(tiny.checked_mul(tiny), Err(Error::Range(_))));
    assert!(matches!(
        Df64::ONE.checked_div(Df64::ZERO),
        Err(Error::DivideByZero)
    ));
}

fn magnitude() -> impl Strategy<Value = f64> {
    (1.0f64..2.0, -100i32..100, any::<bool>()).prop_map(|(m, e, neg)| {
        let v = m * 2f64.powi(e);
        if neg {
            -v
        } else {
            v
        }
    })
}

proptest! {
    #[test]
    fn split_reconstructs_within_bound(v in magnitude()) {
        let d = Df64::split(v).unwrap();
        prop_assert!(d.is_canonical());
        prop_assert!((v - d.to_f64()).abs() <= REL_ADD_MUL * v.abs());
        prop_assert_eq!(d.high(), v as f32);
    }

    #[test]
    fn low_is_at_most_half_an_ulp(v in magnitude()) {
        let d = Df64::split(v).unwrap();
        prop_assert!(d.low().abs() as f64 <= ulp32(d.high()) as f64 / 2.0);
    }

    #[test]
    fn add_and_mul_commute(x in magnitude(), y in magnitude()) {
        let (a, b) = (Df64::split(x).unwrap(), Df64::split(y).unwrap());
        prop_assert_eq!(a.checked_add(b).unwrap(), b.checked_add(a).unwrap());
        if (x * y).abs() > 1e-30 && (x * y).abs() < 1e30 {
            prop_assert_eq!(a.checked_mul(b).unwrap(), b.checked_mul(a).unwrap());
        }
    }

    #[test]
    fn sub_is_antisymmetric(x in magnitude(), y in magnitude()) {
        let (a, b) = (Df64::split(x).unwrap(), Df64::split(y).unwrap());
        prop_assert_eq!(a.checked_sub(b).unwrap(), -b.checked_sub(a).unwrap());
        prop_assert!(a.checked_sub(a).unwrap().is_zero());
    }

    #[test]
    fn order_agrees_with_value(x in magnitude(), y in magnitude()) {
        let (a, b) = (Df64::split(x).unwrap(), Df64::split(y).unwrap());
        prop_assert_eq!(a.cmp(&b), a.to_f64().partial_cmp(&b.to_f64()).unwrap());
    }

    #[test]
    fn division_inverts_multiplication(x in 1.0f64..2.0, ex in -40i32..40, y in 1.0f64..2.0, ey in -40i32..40) {
        let (a, b) = (Df64::split(x * 2f64.powi(ex)).unwrap(), Df64::split(y * 2f64.powi(ey)).unwrap());
        let q = a.checked_mul(b).unwrap().checked_div(b).unwrap();
        prop_assert!(rel_err(q.to_f64(), a.to_f64()) <= 4.0 * REL_DIV);
    }
}
