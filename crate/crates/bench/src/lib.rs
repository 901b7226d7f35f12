//! Shared fixtures for the benchmark targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use clam_core::matrix::Matrix;
use clam_core::model::{Dataset, PrototypeSet};

/// Isotropic Gaussian blobs: `n` points around `k` well-separated centers.
pub fn gaussian_blobs(n: usize, d: usize, k: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect())
        .collect();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % k;
        let row: Vec<f64> = centers[c]
            .iter()
            .map(|&m| m + rng.gen_range(-0.5..0.5))
            .collect();
        rows.push(row);
        labels.push(c);
    }
    Dataset::new(Matrix::from_rows(&rows).unwrap(), Some(labels)).unwrap()
}

/// Random prototypes spanning the blob range.
pub fn random_prototypes(k: usize, d: usize, seed: u64) -> PrototypeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect())
        .collect();
    PrototypeSet::new(Matrix::from_rows(&rows).unwrap()).unwrap()
}
