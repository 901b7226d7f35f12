//! Synthetic 2-D generator: side-by-side elongated Gaussian clusters whose
//! geometry defeats nearest-centroid partitioning.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::Dataset;

/// Horizontal gap between adjacent cluster axes.
const CLUSTER_SEPARATION: f64 = 1.2;
/// Vertical stagger between adjacent clusters.
const CLUSTER_OFFSET_Y: f64 = 2.5;
/// Short-axis standard deviation.
const SIGMA_X: f64 = 0.1;
/// Long-axis standard deviation (eigenvalue ratio 144:1).
const SIGMA_Y: f64 = 1.2;

/// Generates `n_clusters` (2 or 3) vertical elongated clusters of
/// `n_per_cluster` points each, staggered side by side, with ground-truth
/// labels. The long axis dwarfs the cluster gap, so the minimum-inertia
/// partition cuts across the stripes instead of between them, and the
/// stagger leaves a fraction of points nearer the wrong cluster's centroid.
pub fn gen_elongated(n_per_cluster: usize, n_clusters: usize, seed: u64) -> Result<Dataset> {
    gen_elongated_custom(
        n_per_cluster,
        n_clusters,
        seed,
        CLUSTER_SEPARATION,
        CLUSTER_OFFSET_Y,
        SIGMA_X,
        SIGMA_Y,
    )
}

/// As `gen_elongated` with explicit geometry: axis separation, vertical
/// stagger, and the two per-axis standard deviations.
#[allow(clippy::too_many_arguments)]
pub fn gen_elongated_custom(
    n_per_cluster: usize,
    n_clusters: usize,
    seed: u64,
    separation: f64,
    offset_y: f64,
    sigma_x: f64,
    sigma_y: f64,
) -> Result<Dataset> {
    if !(2..=3).contains(&n_clusters) {
        return Err(Error::InvalidConfig(format!(
            "elongated generator supports 2 or 3 clusters, got {n_clusters}"
        )));
    }
    if n_per_cluster == 0 {
        return Err(Error::InvalidConfig("n_per_cluster must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nx = Normal::new(0.0, sigma_x).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let ny = Normal::new(0.0, sigma_y).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut rows = Vec::with_capacity(n_per_cluster * n_clusters);
    let mut labels = Vec::with_capacity(n_per_cluster * n_clusters);
    for c in 0..n_clusters {
        let cx = c as f64 * separation;
        let cy = c as f64 * offset_y;
        for _ in 0..n_per_cluster {
            rows.push(vec![cx + nx.sample(&mut rng), cy + ny.sample(&mut rng)]);
            labels.push(c);
        }
    }
    Dataset::new(Matrix::from_rows(&rows)?, Some(labels))
}

/// Eigenvalues of the 2×2 sample covariance of the given points.
pub fn covariance_eigenvalues(points: &[&[f64]]) -> (f64, f64) {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let dx = p[0] - mean_x;
        let dy = p[1] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    sxx /= n;
    syy /= n;
    sxy /= n;
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 + disc, tr / 2.0 - disc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_balanced() {
        let a = gen_elongated(50, 2, 123).unwrap();
        let b = gen_elongated(50, 2, 123).unwrap();
        assert_eq!(a.points.as_slice(), b.points.as_slice());
        assert_eq!(a.len(), 100);
        let labels = a.labels.as_ref().unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 50);
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 50);
    }

    #[test]
    fn three_cluster_variant() {
        let ds = gen_elongated(30, 3, 7).unwrap();
        assert_eq!(ds.len(), 90);
        assert_eq!(
            ds.labels.as_ref().unwrap().iter().max().copied(),
            Some(2)
        );
    }

    #[test]
    fn rejects_unsupported_cluster_counts() {
        assert!(gen_elongated(10, 1, 0).is_err());
        assert!(gen_elongated(10, 4, 0).is_err());
        assert!(gen_elongated(0, 2, 0).is_err());
    }

    #[test]
    fn clusters_are_elongated() {
        let ds = gen_elongated(400, 2, 9).unwrap();
        let labels = ds.labels.as_ref().unwrap();
        for c in 0..2 {
            let members: Vec<&[f64]> = (0..ds.len())
                .filter(|&i| labels[i] == c)
                .map(|i| ds.point(i))
                .collect();
            let (hi, lo) = covariance_eigenvalues(&members);
            assert!(
                hi / lo >= 8.0,
                "cluster {c} eigenvalue ratio {} too round",
                hi / lo
            );
        }
    }
}
