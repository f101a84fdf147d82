//! Emulated double precision: a value stored as the unevaluated sum of two
//! `f32` components, `high + low`.
//!
//! The representation is kept canonical after every operation: `high` is the
//! `f32` nearest to the pair's value and `|low| <= ulp32(high) / 2`. That gives
//! roughly 48 significant bits inside the binary32 exponent range.
//!
//! All arithmetic here is plain `f32` arithmetic under round-to-nearest-even.
//! Products use Veltkamp splitting rather than fused multiply-add so that the
//! host computes exactly what a shader without FMA would compute.

use std::cmp::Ordering;
use std::fmt;
use std::hint::black_box;

use crate::error::{Error, Result};

/// Veltkamp splitting constant for binary32: `2^12 + 1`.
pub const VELTKAMP_SPLITTER: f32 = 4097.0;

// Above this magnitude `VELTKAMP_SPLITTER * a` can overflow, so the operand is
// scaled down by a power of two before splitting.
const SPLIT_THRESHOLD: f32 = (1u128 << 115) as f32;
const SPLIT_SCALE_DOWN: f32 = 1.0 / 8192.0; // 2^-13
const SPLIT_SCALE_UP: f32 = 8192.0;
// In the top binade the rounded high half can be 2^128.
const TOP_BINADE: f32 = (1u128 << 127) as f32;
const PROD_SCALE_THRESHOLD: f32 = (1u128 << 100) as f32;
const PROD_SCALE_DOWN: f32 = 1.0 / 16777216.0; // 2^-24
const PROD_SCALE_UP: f32 = 16777216.0;

/// A double-precision value held as a `(high, low)` pair of `f32`s.
#[derive(Clone, Copy, Debug, Default)]
pub struct Df64 {
    high: f32,
    low: f32,
}

/// Error-free addition: `s = fl(a + b)` and `s + e == a + b` exactly.
pub fn two_sum(a: f32, b: f32) -> Result<(f32, f32)> {
    let s = a + b;
    if !s.is_finite() {
        return Err(overflow("two_sum", a, b));
    }
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    Ok((s, e))
}

/// Error-free addition for `|a| >= |b|` (or `a == 0`). Three flops instead of six.
#[inline]
pub fn fast_two_sum(a: f32, b: f32) -> (f32, f32) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Splits `a` into two halves with at most 12 significant bits each, so that
/// `hi + lo == a` and products of halves are exact in `f32`.
pub fn veltkamp_split(a: f32) -> (f32, f32) {
    if a.abs() >= TOP_BINADE {
        // truncate instead of rounding; still exact with 12-bit halves
        let hi = f32::from_bits(a.to_bits() & !0xfff);
        return (hi, a - hi);
    }
    if a.abs() > SPLIT_THRESHOLD {
        let (hi, lo) = split_unscaled(a * SPLIT_SCALE_DOWN);
        (hi * SPLIT_SCALE_UP, lo * SPLIT_SCALE_UP)
    } else {
        split_unscaled(a)
    }
}

#[inline]
fn split_unscaled(a: f32) -> (f32, f32) {
    let t = VELTKAMP_SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Error-free multiplication: `p = fl(a * b)` and `p + e == a * b` exactly,
/// as long as the residual does not underflow.
pub fn two_prod(a: f32, b: f32) -> Result<(f32, f32)> {
    let p = a * b;
    if !p.is_finite() {
        return Err(overflow("two_prod", a, b));
    }
    let (big, small) = if a.abs() >= b.abs() { (a, b) } else { (b, a) };
    if p.abs() > PROD_SCALE_THRESHOLD || big.abs() > PROD_SCALE_THRESHOLD {
        // near the top of the range the partial products can overflow; run
        // on the larger operand scaled by 2^-24 and scale back (both exact)
        let (ps, es) = two_prod_unscaled(big * PROD_SCALE_DOWN, small);
        return Ok((ps * PROD_SCALE_UP, es * PROD_SCALE_UP));
    }
    Ok(two_prod_unscaled(a, b))
}

#[inline]
fn two_prod_unscaled(a: f32, b: f32) -> (f32, f32) {
    let p = a * b;
    let (ah, al) = veltkamp_split(a);
    let (bh, bl) = veltkamp_split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

/// Spacing between `|x|` and the next larger `f32` (the previous one at `f32::MAX`).
pub fn ulp32(x: f32) -> f32 {
    let a = x.abs();
    if a == f32::MAX {
        a - a.next_down()
    } else {
        a.next_up() - a
    }
}

/// Checks that the host performs binary32 and binary64 arithmetic with
/// round-to-nearest, ties-to-even. Everything in this module depends on it.
pub fn host_rounds_to_nearest_even() -> bool {
    let one = black_box(1.0f32);
    let half_ulp = black_box(f32::EPSILON / 2.0);
    // 1 + u/2 ties to 1 (even); 1 + u + u/2 ties up to 1 + 2u (even).
    let tie_down = one + half_ulp == 1.0;
    let tie_up = (one + f32::EPSILON) + half_ulp == 1.0 + 2.0 * f32::EPSILON;
    let below = -one - half_ulp == -1.0;
    let one64 = black_box(1.0f64);
    let tie64 = one64 + f64::EPSILON / 2.0 == 1.0;
    tie_down && tie_up && below && tie64
}

fn overflow(op: &str, a: f32, b: f32) -> Error {
    Error::Range(format!("{op}({a:e}, {b:e}) overflows binary32"))
}

impl Df64 {
    pub const ZERO: Df64 = Df64 {
        high: 0.0,
        low: 0.0,
    };
    pub const ONE: Df64 = Df64 {
        high: 1.0,
        low: 0.0,
    };

    /// Decomposes a binary64 value: `high` is `value` rounded to binary32 and
    /// `low` is the binary64 residual `value - high`, rounded to binary32.
    pub fn split(value: f64) -> Result<Df64> {
        if value.is_nan() {
            return Err(Error::Range("NaN cannot be emulated".into()));
        }
        if value.abs() > f32::MAX as f64 {
            return Err(Error::Range(format!(
                "{value:e} exceeds the binary32 range; rescale before emulating"
            )));
        }
        let high = value as f32;
        let high_double = high as f64;
        let low = (value - high_double) as f32;
        Ok(Df64 { high, low })
    }

    /// Builds a pair from arbitrary components and renormalizes it.
    pub fn from_parts(high: f32, low: f32) -> Result<Df64> {
        if high.is_nan() || low.is_nan() {
            return Err(Error::Range("NaN component".into()));
        }
        let (high, low) = two_sum(high, low)?;
        Ok(Df64 { high, low })
    }

    #[inline]
    pub fn high(self) -> f32 {
        self.high
    }

    #[inline]
    pub fn low(self) -> f32 {
        self.low
    }

    /// `widen(high) + widen(low)`, evaluated in binary64.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.high as f64 + self.low as f64
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.high == 0.0
    }

    /// `|low| <= ulp32(high) / 2`, with both components finite.
    pub fn is_canonical(self) -> bool {
        self.high.is_finite()
            && self.low.is_finite()
            && (self.low.abs() as f64) <= 0.5 * ulp32(self.high) as f64
    }

    pub fn abs(self) -> Df64 {
        if self.high < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn checked_add(self, rhs: Df64) -> Result<Df64> {
        let (s, e) = two_sum(self.high, rhs.high)?;
        let (t, f) = two_sum(self.low, rhs.low)?;
        let (s, e) = fast_two_sum(s, e + t);
        let (high, low) = fast_two_sum(s, e + f);
        finish(high, low, "add")
    }

    pub fn checked_sub(self, rhs: Df64) -> Result<Df64> {
        self.checked_add(-rhs)
    }

    pub fn checked_mul(self, rhs: Df64) -> Result<Df64> {
        let (p, e) = two_prod(self.high, rhs.high)?;
        let e = e + (self.high * rhs.low + self.low * rhs.high);
        let (high, low) = fast_two_sum(p, e);
        if high == 0.0 && !self.is_zero() && !rhs.is_zero() {
            return Err(Error::Range(format!(
                "product of {self} and {rhs} underflows binary32"
            )));
        }
        finish(high, low, "mul")
    }

    /// Quotient estimate `high(a) / high(b)` refined by one residual correction.
    pub fn checked_div(self, rhs: Df64) -> Result<Df64> {
        if rhs.high == 0.0 && rhs.low == 0.0 {
            return Err(Error::DivideByZero);
        }
        let q = self.high / rhs.high;
        if !q.is_finite() {
            return Err(overflow("div", self.high, rhs.high));
        }
        let (p, e) = two_prod(q, rhs.high)?;
        let r = (((self.high - p) - e) + self.low) - q * rhs.low;
        let (high, low) = fast_two_sum(q, r / rhs.high);
        finish(high, low, "div")
    }

    /// Lexicographic order on `(high, low)`. For canonical values this is the
    /// order of the represented numbers.
    pub fn compare(&self, other: &Df64) -> Ordering {
        match self.high.partial_cmp(&other.high) {
            Some(Ordering::Equal) | None => {
                self.low.partial_cmp(&other.low).unwrap_or(Ordering::Equal)
            }
            Some(ord) => ord,
        }
    }
}

fn finish(high: f32, low: f32, op: &str) -> Result<Df64> {
    if !high.is_finite() || !low.is_finite() {
        return Err(Error::Range(format!("{op} overflows binary32")));
    }
    Ok(Df64 { high, low })
}

impl PartialEq for Df64 {
    fn eq(&self, other: &Self) -> bool {
        self.high == other.high && self.low == other.low
    }
}

// Components are never NaN: every constructor rejects it.
impl Eq for Df64 {}

impl PartialOrd for Df64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Df64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl fmt::Display for Df64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl TryFrom<f64> for Df64 {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Df64::split(value)
    }
}

impl From<f32> for Df64 {
    fn from(value: f32) -> Self {
        Df64 {
            high: value,
            low: 0.0,
        }
    }
}

impl std::ops::Neg for Df64 {
    type Output = Df64;

    #[inline]
    fn neg(self) -> Df64 {
        Df64 {
            high: -self.high,
            low: -self.low,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: f64) -> Df64 {
        Df64::split(v).unwrap()
    }

    #[test]
    fn rounding_mode() {
        assert!(host_rounds_to_nearest_even());
    }

    #[test]
    fn split_trivial_values() {
        assert_eq!((d(0.0).high(), d(0.0).low()), (0.0, 0.0));
        assert_eq!((d(1.0).high(), d(1.0).low()), (1.0, 0.0));
    }

    #[test]
    fn split_pi_matches_widened_residual() {
        let pi = std::f64::consts::PI;
        let x = d(pi);
        // oracle: round, widen, subtract in binary64, round the residual
        let high = pi as f32;
        assert_eq!(high, std::f32::consts::PI);
        let residual = pi - high as f64;
        assert_eq!(x.high().to_bits(), high.to_bits());
        assert_eq!(x.low().to_bits(), (residual as f32).to_bits());
        assert!((x.low() as f64 + 8.742_277_7e-8).abs() < 1e-15);
        assert!(x.is_canonical());
    }

    #[test]
    fn split_rejects_nan_and_overflow() {
        assert!(matches!(Df64::split(f64::NAN), Err(Error::Range(_))));
        assert!(matches!(Df64::split(1e39), Err(Error::Range(_))));
        assert!(matches!(
            Df64::split(f64::NEG_INFINITY),
            Err(Error::Range(_))
        ));
        assert!(Df64::split(f32::MAX as f64).is_ok());
    }

    #[test]
    fn to_f64_basics() {
        assert_eq!(Df64::ONE.to_f64(), 1.0);
        assert_eq!(Df64::ZERO.to_f64(), 0.0);
    }

    #[test]
    fn two_sum_small_residual() {
        let tiny = 2f32.powi(-30);
        assert_eq!(two_sum(1.0, tiny).unwrap(), (1.0, tiny));
    }

    #[test]
    fn two_prod_identity_for_any_finite() {
        for x in [
            0.0,
            -3.5,
            1e-30,
            f32::MAX,
            -f32::MAX,
            f32::MIN_POSITIVE,
            7.0e37,
        ] {
            assert_eq!(two_prod(1.0, x).unwrap(), (x, 0.0), "x = {x:e}");
        }
    }

    #[test]
    fn eft_overflow_is_range_error() {
        assert!(matches!(two_sum(f32::MAX, f32::MAX), Err(Error::Range(_))));
        assert!(matches!(two_prod(1e30, 1e30), Err(Error::Range(_))));
    }

    #[test]
    fn veltkamp_halves_are_narrow() {
        for a in [std::f32::consts::PI, 1.0e38, -7.77e-20, 123_456.79] {
            let (hi, lo) = veltkamp_split(a);
            assert_eq!(hi + lo, a);
            // each half fits in 12 significant bits
            for h in [hi, lo] {
                if h != 0.0 {
                    assert_eq!(h.to_bits() & 0x7ff, 0, "{h:e} has too many bits");
                }
            }
        }
    }

    #[test]
    fn additive_identity_and_inverse() {
        let x = d(-12345.678901234567);
        assert_eq!(x.checked_add(d(0.0)).unwrap(), x);
        assert_eq!(x.checked_sub(d(0.0)).unwrap(), x);
        let z = x.checked_add(-x).unwrap();
        assert_eq!((z.high(), z.low()), (0.0, 0.0));
        let z = x.checked_sub(x).unwrap();
        assert_eq!((z.high(), z.low()), (0.0, 0.0));
    }

    #[test]
    fn add_point_one_point_two() {
        let sum = d(0.1).checked_add(d(0.2)).unwrap().to_f64();
        let expected = 0.1f64 + 0.2f64;
        assert_eq!(expected, 0.30000000000000004);
        assert!((sum - expected).abs() <= 2f64.powi(-44) * 0.3);
    }

    #[test]
    fn sub_resolves_cancellation() {
        let r = d(1e8 + 1.0).checked_sub(d(1e8)).unwrap().to_f64();
        assert!((r - 1.0).abs() <= 2f64.powi(-44));
        // plain binary32 cannot
        assert_eq!((1e8f64 + 1.0) as f32 - 1e8f32, 0.0);
    }

    #[test]
    fn mul_identities() {
        let x = d(987.654321012345);
        assert_eq!(x.checked_mul(d(1.0)).unwrap(), x);
        let z = x.checked_mul(d(0.0)).unwrap();
        assert_eq!((z.high(), z.low()), (0.0, 0.0));
    }

    #[test]
    fn mul_pi_squared() {
        let pi = d(std::f64::consts::PI);
        let sq = pi.checked_mul(pi).unwrap().to_f64();
        let exact = pi.to_f64() * pi.to_f64();
        assert!(((sq - exact) / exact).abs() <= 2f64.powi(-44));
    }

    #[test]
    fn mul_overflow_and_underflow() {
        assert!(matches!(d(1e30).checked_mul(d(1e30)), Err(Error::Range(_))));
        assert!(matches!(
            d(1e-30).checked_mul(d(1e-30)),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn div_cases() {
        let x = d(-42.4242424242);
        let q = x.checked_div(d(1.0)).unwrap();
        assert_eq!(q, x);
        assert_eq!(x.checked_div(x).unwrap().to_f64(), 1.0);
        let third = d(1.0).checked_div(d(3.0)).unwrap().to_f64();
        assert!(((third - 1.0 / 3.0) * 3.0).abs() <= 2f64.powi(-43));
        assert!(matches!(
            x.checked_div(Df64::ZERO),
            Err(Error::DivideByZero)
        ));
        assert!(matches!(
            d(1e38).checked_div(d(1e-38)),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn ordering() {
        assert_eq!(d(1.0).compare(&d(1.0)), Ordering::Equal);
        let above = 1.0 + 2f64.powi(-40);
        assert!(1.0 < above);
        assert_eq!(d(1.0).compare(&d(above)), Ordering::Less);
        assert_eq!(d(-2.0).compare(&d(3.0)), Ordering::Less);
        assert!(d(-0.0) == d(0.0));
    }

    #[test]
    fn from_parts_renormalizes() {
        let x = Df64::from_parts(1.0, 0.75).unwrap();
        assert!(x.is_canonical());
        assert_eq!(x.to_f64(), 1.75);
        assert!(Df64::from_parts(f32::NAN, 0.0).is_err());
    }

    #[test]
    fn ulp32_values() {
        assert_eq!(ulp32(1.0), f32::EPSILON);
        assert_eq!(ulp32(0.74), 2f32.powi(-24));
        assert_eq!(ulp32(0.0), f32::from_bits(1));
    }
}
