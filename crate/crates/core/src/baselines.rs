//! Comparator algorithms: Lloyd's k-means with k-means++ seeding, and a
//! softmax soft-assignment relaxation trained by plain gradient descent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::softmax_into;
use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::model::PrototypeSet;

/// Fitted k-means model: best of `n_init` independent runs by inertia.
#[derive(Debug, Clone)]
pub struct KMeansModel {
    pub centers: Matrix,
    pub inertia: f64,
    pub n_init: usize,
}

impl KMeansModel {
    /// Nearest-center label per point.
    pub fn assign(&self, points: &Matrix) -> Vec<usize> {
        points
            .iter_rows()
            .map(|x| nearest_center(x, &self.centers).0)
            .collect()
    }
}

fn nearest_center(x: &[f64], centers: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.rows() {
        let d = sq_dist(x, centers.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Sum over points of squared distance to the nearest center.
pub fn inertia(points: &Matrix, centers: &Matrix) -> f64 {
    points
        .iter_rows()
        .map(|x| nearest_center(x, centers).1)
        .sum()
}

/// k-means++ seeding: first center uniform over points, subsequent centers
/// sampled proportional to squared distance to the nearest chosen center.
pub fn kmeans_plus_plus<R: Rng>(points: &Matrix, k: usize, rng: &mut R) -> Matrix {
    let n = points.rows();
    let d = points.cols();
    let mut centers = Matrix::zeros(k, d);
    let first = rng.gen_range(0..n);
    centers.row_mut(0).copy_from_slice(points.row(first));
    let mut dist2: Vec<f64> = points
        .iter_rows()
        .map(|x| sq_dist(x, centers.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = dist2.iter().sum();
        let chosen = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut target = rng.gen_range(0.0..total);
            let mut idx = n - 1;
            for (i, &w) in dist2.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        };
        centers.row_mut(c).copy_from_slice(points.row(chosen));
        for (i, x) in points.iter_rows().enumerate() {
            dist2[i] = dist2[i].min(sq_dist(x, centers.row(c)));
        }
    }
    centers
}

/// One Lloyd run: alternate assignment and centroid update until no label
/// changes or 300 iterations. Empty clusters are reseeded to the point
/// farthest from its current center. Returns (centers, labels, inertia,
/// per-iteration inertia trace).
fn lloyd_single<R: Rng>(
    points: &Matrix,
    k: usize,
    rng: &mut R,
) -> (Matrix, Vec<usize>, f64, Vec<f64>) {
    let n = points.rows();
    let d = points.cols();
    let mut centers = kmeans_plus_plus(points, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();

    for _ in 0..300 {
        let mut changed = false;
        let mut total = 0.0;
        for (i, x) in points.iter_rows().enumerate() {
            let (c, d2) = nearest_center(x, &centers);
            total += d2;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        trace.push(total);
        if !changed {
            break;
        }

        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, x) in points.iter_rows().enumerate() {
            counts[labels[i]] += 1;
            let row = sums.row_mut(labels[i]);
            for j in 0..d {
                row[j] += x[j];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let row = sums.row_mut(c);
                for j in 0..d {
                    row[j] /= counts[c] as f64;
                }
                centers.row_mut(c).copy_from_slice(sums.row(c));
            } else {
                // Reseed to the point farthest from its assigned center.
                let far = points
                    .iter_rows()
                    .enumerate()
                    .map(|(i, x)| (i, sq_dist(x, centers.row(labels[i]))))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                centers.row_mut(c).copy_from_slice(points.row(far));
            }
        }
    }
    let final_inertia = inertia(points, &centers);
    (centers, labels, final_inertia, trace)
}

/// Best-of-`n_init` Lloyd's k-means.
pub fn lloyd_kmeans(points: &Matrix, k: usize, n_init: usize, seed: u64) -> Result<KMeansModel> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    if n_init == 0 {
        return Err(Error::InvalidConfig("n_init must be >= 1".into()));
    }
    let runs: Vec<(Matrix, f64)> = (0..n_init)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let (centers, _, inert, _) = lloyd_single(points, k, &mut rng);
            (centers, inert)
        })
        .collect();
    let (centers, inertia) = runs
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one init");
    Ok(KMeansModel {
        centers,
        inertia,
        n_init,
    })
}

/// Settings for the soft-assignment relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftAssignConfig {
    pub gamma: f64,
    pub epochs: usize,
    pub lr: f64,
}

impl Default for SoftAssignConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            epochs: 200,
            lr: 0.01,
        }
    }
}

/// The relaxed objective: Σ_x Σ_μ w_μ(x)·‖x - ρ_μ‖² with softmax weights.
pub fn soft_objective(points: &Matrix, centers: &Matrix, gamma: f64) -> f64 {
    let k = centers.rows();
    let mut logits = vec![0.0; k];
    let mut w = vec![0.0; k];
    let mut total = 0.0;
    for x in points.iter_rows() {
        for mu in 0..k {
            logits[mu] = -gamma * sq_dist(x, centers.row(mu));
        }
        softmax_into(&logits, &mut w);
        for mu in 0..k {
            total += w[mu] * sq_dist(x, centers.row(mu));
        }
    }
    total
}

/// Full-batch gradient descent on the soft objective at fixed γ, starting
/// from the given centers. Returns the prototypes and the final objective.
pub fn soft_kmeans_from(
    points: &Matrix,
    init: &Matrix,
    cfg: &SoftAssignConfig,
) -> Result<(PrototypeSet, f64)> {
    if !(cfg.gamma > 0.0) {
        return Err(Error::InvalidConfig("gamma must be > 0".into()));
    }
    let k = init.rows();
    let d = init.cols();
    let mut centers = init.clone();
    let mut logits = vec![0.0; k];
    let mut w = vec![0.0; k];
    for _ in 0..cfg.epochs {
        let mut grad = Matrix::zeros(k, d);
        for x in points.iter_rows() {
            let mut s = vec![0.0; k];
            for mu in 0..k {
                s[mu] = sq_dist(x, centers.row(mu));
                logits[mu] = -cfg.gamma * s[mu];
            }
            softmax_into(&logits, &mut w);
            let fx: f64 = (0..k).map(|mu| w[mu] * s[mu]).sum();
            for mu in 0..k {
                let coeff = 2.0 * w[mu] * (1.0 - cfg.gamma * (s[mu] - fx));
                let row = grad.row_mut(mu);
                let c = centers.row(mu);
                for j in 0..d {
                    row[j] += coeff * (c[j] - x[j]);
                }
            }
        }
        if !grad.is_finite() {
            return Err(Error::NonFinite("soft k-means gradient"));
        }
        for (c, g) in centers
            .as_mut_slice()
            .iter_mut()
            .zip(grad.as_slice().iter())
        {
            *c -= cfg.lr * g;
        }
    }
    let obj = soft_objective(points, &centers, cfg.gamma);
    if !obj.is_finite() {
        return Err(Error::NonFinite("soft k-means objective"));
    }
    Ok((PrototypeSet::new(centers)?, obj))
}

/// Soft k-means from k distinct random data points.
pub fn soft_kmeans(
    points: &Matrix,
    k: usize,
    cfg: &SoftAssignConfig,
    seed: u64,
) -> Result<(PrototypeSet, f64)> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(k);
    while chosen.len() < k {
        let i = rng.gen_range(0..n);
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    let rows: Vec<Vec<f64>> = chosen.iter().map(|&i| points.row(i).to_vec()).collect();
    soft_kmeans_from(points, &Matrix::from_rows(&rows)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[Vec<f64>]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let pts = mat(&[vec![0.0, 1.0], vec![2.0, 3.0], vec![-1.0, 5.0]]);
        let m = lloyd_kmeans(&pts, 3, 10, 0).unwrap();
        assert!(m.inertia < 1e-12);
        let mut labels = m.assign(&pts);
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2]);
    }

    #[test]
    fn two_cluster_1d_oracle() {
        // Enumerating all 2-partitions of {0,1,10,11}: best split is
        // {0,1}|{10,11} with centers 0.5, 10.5 and inertia 1.0.
        let pts = mat(&[vec![0.0], vec![1.0], vec![10.0], vec![11.0]]);
        let m = lloyd_kmeans(&pts, 2, 20, 1).unwrap();
        assert!((m.inertia - 1.0).abs() < 1e-12);
        let mut centers: Vec<f64> = (0..2).map(|c| m.centers.row(c)[0]).collect();
        centers.sort_by(f64::total_cmp);
        assert!((centers[0] - 0.5).abs() < 1e-12);
        assert!((centers[1] - 10.5).abs() < 1e-12);
    }

    #[test]
    fn inertia_recomputable_from_centers() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i % 5) as f64, (i / 5) as f64 * 2.0])
            .collect();
        let pts = mat(&rows);
        let m = lloyd_kmeans(&pts, 4, 5, 7).unwrap();
        assert!((m.inertia - inertia(&pts, &m.centers)).abs() < 1e-9);
    }

    #[test]
    fn rejects_more_clusters_than_points() {
        let pts = mat(&[vec![0.0], vec![1.0]]);
        assert!(matches!(
            lloyd_kmeans(&pts, 3, 1, 0),
            Err(Error::TooManyClusters { .. })
        ));
    }

    #[test]
    fn lloyd_inertia_non_increasing_within_run() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let c = (i % 3) as f64 * 6.0;
                vec![c + (i as f64 * 0.37).sin(), c - (i as f64 * 0.73).cos()]
            })
            .collect();
        let pts = mat(&rows);
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (_, _, _, trace) = lloyd_single(&pts, 3, &mut rng);
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "inertia rose: {trace:?}");
            }
        }
    }

    #[test]
    fn kmeans_plus_plus_first_center_uniform_second_by_distance() {
        // Points {0, 1, 3}. Given first center = 0: D² = (1, 9) for the
        // others, so the second pick is 3 with probability 0.9.
        let pts = mat(&[vec![0.0], vec![1.0], vec![3.0]]);
        let trials = 6000;
        let mut first_counts = [0usize; 3];
        let mut second_is_far = 0usize;
        let mut given_first_zero = 0usize;
        for seed in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let centers = kmeans_plus_plus(&pts, 2, &mut rng);
            let first = centers.row(0)[0];
            let idx = [0.0, 1.0, 3.0].iter().position(|&v| v == first).unwrap();
            first_counts[idx] += 1;
            if idx == 0 {
                given_first_zero += 1;
                if centers.row(1)[0] == 3.0 {
                    second_is_far += 1;
                }
            }
        }
        // First center uniform: each count near trials/3 (±5σ of binomial).
        let sigma = (trials as f64 / 3.0 * (2.0 / 3.0)).sqrt();
        for &c in &first_counts {
            assert!(
                (c as f64 - trials as f64 / 3.0).abs() < 5.0 * sigma,
                "first-center counts {first_counts:?}"
            );
        }
        let frac = second_is_far as f64 / given_first_zero as f64;
        let sigma2 = (0.9 * 0.1 / given_first_zero as f64).sqrt();
        assert!(
            (frac - 0.9).abs() < 5.0 * sigma2,
            "second-center fraction {frac}"
        );
    }

    #[test]
    fn soft_kmeans_single_center_finds_mean() {
        let pts = mat(&[vec![1.0, 2.0], vec![3.0, 2.0], vec![2.0, 5.0], vec![2.0, -1.0]]);
        let cfg = SoftAssignConfig {
            gamma: 1.0,
            epochs: 3000,
            lr: 0.02,
        };
        let (p, _) = soft_kmeans(&pts, 1, &cfg, 3).unwrap();
        assert!((p.memory(0)[0] - 2.0).abs() < 1e-4);
        assert!((p.memory(0)[1] - 2.0).abs() < 1e-4);
    }

    #[test]
    fn soft_objective_non_increasing_for_k1_small_lr() {
        let pts = mat(&[vec![0.0], vec![2.0], vec![10.0]]);
        let mut centers = mat(&[vec![-3.0]]);
        let cfg = SoftAssignConfig {
            gamma: 0.5,
            epochs: 1,
            lr: 0.01,
        };
        let mut prev = soft_objective(&pts, &centers, cfg.gamma);
        for _ in 0..200 {
            let (p, obj) = soft_kmeans_from(&pts, &centers, &cfg).unwrap();
            assert!(obj <= prev + 1e-9, "objective rose {prev} -> {obj}");
            prev = obj;
            centers = p.memories().clone();
        }
    }

    #[test]
    fn huge_gamma_matches_lloyd_inertia_from_lloyd_init() {
        let rows: Vec<Vec<f64>> = (0..24)
            .map(|i| {
                let c = (i % 2) as f64 * 8.0;
                vec![c + (i as f64 * 0.41).sin() * 0.5, (i as f64 * 0.97).cos() * 0.5]
            })
            .collect();
        let pts = mat(&rows);
        let lloyd = lloyd_kmeans(&pts, 2, 10, 5).unwrap();
        let cfg = SoftAssignConfig {
            gamma: 1e6,
            epochs: 0,
            lr: 0.0,
        };
        let (_, obj) = soft_kmeans_from(&pts, &lloyd.centers, &cfg).unwrap();
        assert!(
            (obj - lloyd.inertia).abs() <= 0.01 * lloyd.inertia.max(1e-12),
            "soft objective {obj} vs inertia {}",
            lloyd.inertia
        );
    }
}
