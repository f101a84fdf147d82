use crate::error::{Error, Result};

/// Maps a binary32 onto a signed integer line on which adjacent floats are
/// adjacent integers and both zeros share the key 0.
fn ordered_key(x: f32) -> i64 {
    let bits = x.to_bits();
    let magnitude = (bits & 0x7fff_ffff) as i64;
    if bits >> 31 == 1 {
        -magnitude
    } else {
        magnitude
    }
}

/// Number of binary32 steps between `a` and `b`. Pairs of opposite sign are
/// measured across zero; `+0` and `-0` are the same point.
pub fn ulp_distance(a: f32, b: f32) -> Result<u64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "ulp distance needs finite operands, got {a} and {b}"
        )));
    }
    Ok(ordered_key(a).abs_diff(ordered_key(b)))
}
