use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{colorize, Palette};
use crate::dataset::{Dataset, Dims, PointRecord};
use crate::error::{Error, Result};

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v: f64 = rng.random_range(-1.0..1.0);
        if v > -1.0 {
            return v;
        }
    }
}

/// `count` distinct points drawn uniformly from the open square `(-1, 1)^2`.
/// Duplicates (compared by bit pattern) are redrawn.
pub fn gen_random_2d(count: usize, seed: u64) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::Validation(
            "random2d needs at least one point".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(count);
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let x = open_unit(&mut rng);
        let y = open_unit(&mut rng);
        if seen.insert((x.to_bits(), y.to_bits())) {
            points.push(PointRecord::new_2d(x, y, [0.0; 3]));
        }
    }
    let dataset = Dataset::new(
        format!("random2d_{count}"),
        format!("random2d(count={count}, seed={seed})"),
        Dims::Two,
        points,
    );
    colorize(&dataset, &Palette::default())
}
