use super::{colorize, Palette};
use crate::dataset::{Dataset, Dims, PointRecord};
use crate::error::{Error, Result};

/// Deepest subdivision accepted (`4^11` tetrahedra, `4^12` points).
pub const MAX_SIERPINSKI_DEPTH: u32 = 11;

pub type Tetrahedron = [[f64; 3]; 4];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SierpinskiParams {
    pub n: u32,
    pub vertices: Tetrahedron,
}

impl Default for SierpinskiParams {
    /// A regular tetrahedron inscribed in the cube `[-1, 1]^3`.
    fn default() -> Self {
        SierpinskiParams {
            n: 5,
            vertices: [
                [1.0, 1.0, 1.0],
                [1.0, -1.0, -1.0],
                [-1.0, 1.0, -1.0],
                [-1.0, -1.0, 1.0],
            ],
        }
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Six times the signed volume of the tetrahedron.
fn triple_product(t: &Tetrahedron) -> f64 {
    let (u, v, w) = (sub(t[1], t[0]), sub(t[2], t[0]), sub(t[3], t[0]));
    u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0])
}

impl SierpinskiParams {
    pub fn validate(&self) -> Result<()> {
        if self.n > MAX_SIERPINSKI_DEPTH {
            return Err(Error::Capacity(format!(
                "sierpinski depth {} exceeds {MAX_SIERPINSKI_DEPTH}",
                self.n
            )));
        }
        if self.vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "tetrahedron vertices must be finite".into(),
            ));
        }
        if triple_product(&self.vertices) == 0.0 {
            return Err(Error::Validation(
                "tetrahedron vertices are coplanar".into(),
            ));
        }
        Ok(())
    }
}

fn midpoint(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        (a[0] + b[0]) / 2.0,
        (a[1] + b[1]) / 2.0,
        (a[2] + b[2]) / 2.0,
    ]
}

/// The four corner children: each original vertex joined to the midpoints of
/// its three incident edges.
fn children(t: &Tetrahedron) -> [Tetrahedron; 4] {
    let [a, b, c, d] = *t;
    let (ab, ac, ad) = (midpoint(a, b), midpoint(a, c), midpoint(a, d));
    let (bc, bd, cd) = (midpoint(b, c), midpoint(b, d), midpoint(c, d));
    [
        [a, ab, ac, ad],
        [ab, b, bc, bd],
        [ac, bc, c, cd],
        [ad, bd, cd, d],
    ]
}

/// Leaf tetrahedra after `n` subdivisions; there are `4^n`.
pub fn sierpinski_tetrahedra(p: &SierpinskiParams) -> Result<Vec<Tetrahedron>> {
    p.validate()?;
    let mut level = vec![p.vertices];
    for _ in 0..p.n {
        level = level.iter().flat_map(children).collect();
    }
    Ok(level)
}

/// The four vertices of every leaf tetrahedron.
pub fn sierpinski_points(p: &SierpinskiParams) -> Result<Dataset> {
    let tetrahedra = sierpinski_tetrahedra(p)?;
    let points: Vec<PointRecord> = tetrahedra
        .iter()
        .flatten()
        .map(|v| PointRecord::new_3d(v[0], v[1], v[2], [0.0; 3]))
        .collect();
    let dataset = Dataset::new(
        format!("sierpinski_{}", points.len()),
        format!("sierpinski(n={}, vertices={:?})", p.n, p.vertices),
        Dims::Three,
        points,
    );
    colorize(&dataset, &Palette::default())
}
