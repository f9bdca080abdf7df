//! Planar test shapes for the demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::types::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Points near the unit circle, radial jitter 0.05; many hull vertices.
    Ring,
    /// Isotropic standard Gaussian.
    Blob,
    /// The four corners of the unit square followed by uniform interior points.
    Square,
}

impl std::str::FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring" => Ok(Shape::Ring),
            "blob" => Ok(Shape::Blob),
            "square" => Ok(Shape::Square),
            other => Err(Error::InvalidParameter(format!("unknown shape {other:?} (expected ring, blob or square)"))),
        }
    }
}

pub fn generate(shape: Shape, n: usize, seed: u64) -> Result<DataMatrix> {
    let min = if shape == Shape::Square { 4 } else { 1 };
    if n < min {
        return Err(Error::InvalidParameter(format!("{shape:?} needs at least {min} points, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("valid parameters");
    let points: Vec<Vec<f64>> = match shape {
        Shape::Ring => (0..n)
            .map(|_| {
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                let r = 1.0 + 0.05 * std_normal.sample(&mut rng);
                vec![r * t.cos(), r * t.sin()]
            })
            .collect(),
        Shape::Blob => (0..n).map(|_| vec![std_normal.sample(&mut rng), std_normal.sample(&mut rng)]).collect(),
        Shape::Square => {
            let mut p = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
            p.extend((4..n).map(|_| vec![rng.random_range(0.01..0.99), rng.random_range(0.01..0.99)]));
            p
        }
    };
    DataMatrix::from_columns(&points)
}
