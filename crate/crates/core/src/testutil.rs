//! Shared helpers for unit tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{orthonormal_basis, Tolerances};
use crate::matrix::Matrix;

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let normal = StandardNormal;
    Matrix::from_fn(rows, cols, |_, _| {
        let v: f64 = normal.sample(rng);
        scale * v
    })
}

pub fn orthonormal_from_seed(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = rng_for(seed);
    let raw = random_matrix(rows, cols, 1.0, &mut rng);
    let q = orthonormal_basis(&raw, &Tolerances::default()).expect("svd converges");
    assert_eq!(q.cols(), cols, "random draw must be full rank");
    q
}
