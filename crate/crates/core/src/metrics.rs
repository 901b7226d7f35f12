//! Cluster-quality metrics: silhouette coefficient, normalized mutual
//! information, adjusted Rand index, cluster-size audit, and the per-point
//! attraction-entropy profile.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dynamics::attractions;
use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::model::{DynamicsConfig, PrototypeSet};

/// Mean silhouette over all points, euclidean distances.
///
/// For each point, a is the mean distance to its own cluster (excluding
/// itself) and b the smallest mean distance to another cluster; the score is
/// (b-a)/max(a,b). Points in singleton clusters contribute 0. Errors when all
/// points share one cluster.
pub fn silhouette(points: &Matrix, labels: &[usize]) -> Result<f64> {
    let n = points.rows();
    if labels.len() != n {
        return Err(Error::LabelLengthMismatch(labels.len(), n));
    }
    let k = labels.iter().copied().max().map(|m| m + 1).unwrap_or(0);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::SingleCluster);
    }

    // Pairwise distances are the O(n²) part; process points in parallel
    // blocks, each accumulating its per-cluster distance sums.
    let total: f64 = (0..n)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            if sizes[labels[i]] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            let xi = points.row(i);
            for j in 0..n {
                if j != i {
                    sums[labels[j]] += sq_dist(xi, points.row(j)).sqrt();
                }
            }
            let own = labels[i];
            let a = sums[own] / (sizes[own] - 1) as f64;
            let mut b = f64::INFINITY;
            for c in 0..k {
                if c != own && sizes[c] > 0 {
                    b = b.min(sums[c] / sizes[c] as f64);
                }
            }
            (b - a) / a.max(b)
        })
        .sum();
    Ok(total / n as f64)
}

/// Sizes of each cluster, indexed by label.
pub fn cluster_sizes(labels: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0usize; k];
    for &l in labels {
        if l < k {
            sizes[l] += 1;
        }
    }
    sizes
}

struct Contingency {
    joint: BTreeMap<(usize, usize), usize>,
    a_counts: BTreeMap<usize, usize>,
    b_counts: BTreeMap<usize, usize>,
    n: usize,
}

fn contingency(a: &[usize], b: &[usize]) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(Error::LabelLengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyDataset);
    }
    // BTreeMaps iterate in key order, so the entropy and MI sums below add
    // identical terms in identical order for identical partitions.
    let mut joint = BTreeMap::new();
    let mut a_counts = BTreeMap::new();
    let mut b_counts = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0) += 1;
        *a_counts.entry(x).or_insert(0) += 1;
        *b_counts.entry(y).or_insert(0) += 1;
    }
    Ok(Contingency {
        joint,
        a_counts,
        b_counts,
        n: a.len(),
    })
}

fn entropy_of(counts: &BTreeMap<usize, usize>, n: usize) -> f64 {
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information between two labelings, in [0, 1].
///
/// Mutual information normalized by the arithmetic mean of the two label
/// entropies. Permutation-invariant. Two constant labelings score 1; one
/// constant labeling against anything else scores 0.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    let c = contingency(a, b)?;
    let n = c.n as f64;
    let ha = entropy_of(&c.a_counts, c.n);
    let hb = entropy_of(&c.b_counts, c.n);
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (&(x, y), &cnt) in &c.joint {
        let pxy = cnt as f64 / n;
        let px = c.a_counts[&x] as f64 / n;
        let py = c.b_counts[&y] as f64 / n;
        // Log-difference form: for identical partitions the pxy/px logs
        // cancel exactly, so MI equals the entropy term for term and the
        // ratio below is exactly 1.
        mi += pxy * (pxy.ln() - px.ln() - py.ln());
    }
    Ok((mi / (0.5 * (ha + hb))).clamp(0.0, 1.0))
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index between two labelings, in [-1, 1].
///
/// Pair-counting index corrected for chance agreement; permutation-invariant.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    let c = contingency(a, b)?;
    let sum_joint: f64 = c.joint.values().map(|&v| comb2(v)).sum();
    let sum_a: f64 = c.a_counts.values().map(|&v| comb2(v)).sum();
    let sum_b: f64 = c.b_counts.values().map(|&v| comb2(v)).sum();
    let total = comb2(c.n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    if (max_index - expected).abs() < 1e-12 {
        // Both partitions trivial (all singletons or one block): identical.
        return Ok(1.0);
    }
    Ok((sum_joint - expected) / (max_index - expected))
}

/// Per-point entropy of the attraction distribution, with a histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    pub entropies: Vec<f64>,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// H(x) = -Σ_μ p_μ log p_μ with p the attraction softmax at the given β,
/// evaluated on raw points (no recursion). Bounded by log k.
pub fn entropy_profile(
    points: &Matrix,
    protos: &PrototypeSet,
    beta: f64,
    bins: usize,
) -> Result<EntropyProfile> {
    let cfg = DynamicsConfig::new(beta, 1)?;
    let entropies: Vec<f64> = points
        .iter_rows()
        .map(|x| {
            let p = attractions(x, protos, &cfg)?;
            Ok(p.iter()
                .filter(|&&v| v > 0.0)
                .map(|&v| -v * v.ln())
                .sum::<f64>())
        })
        .collect::<Result<_>>()?;

    let bins = bins.max(1);
    let hi = (protos.k() as f64).ln().max(f64::MIN_POSITIVE);
    let width = hi / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &h in &entropies {
        let idx = ((h / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(EntropyProfile {
        entropies,
        bin_edges,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[Vec<f64>]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    /// Naive silhouette written independently: full distance matrix, direct
    /// per-point formula.
    fn silhouette_brute(points: &Matrix, labels: &[usize]) -> f64 {
        let n = points.rows();
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                dist[i][j] = sq_dist(points.row(i), points.row(j)).sqrt();
            }
        }
        let mut total = 0.0;
        for i in 0..n {
            let same: Vec<usize> = (0..n)
                .filter(|&j| j != i && labels[j] == labels[i])
                .collect();
            if same.is_empty() {
                continue;
            }
            let a = same.iter().map(|&j| dist[i][j]).sum::<f64>() / same.len() as f64;
            let mut b = f64::INFINITY;
            let others: std::collections::BTreeSet<usize> = labels
                .iter()
                .copied()
                .filter(|&l| l != labels[i])
                .collect();
            for l in others {
                let members: Vec<usize> = (0..n).filter(|&j| labels[j] == l).collect();
                let m = members.iter().map(|&j| dist[i][j]).sum::<f64>() / members.len() as f64;
                b = b.min(m);
            }
            total += (b - a) / a.max(b);
        }
        total / n as f64
    }

    #[test]
    fn silhouette_two_tight_1d_clusters() {
        let pts = mat(&[vec![0.0], vec![0.1], vec![10.0], vec![10.1]]);
        let labels = [0, 0, 1, 1];
        let sc = silhouette(&pts, &labels).unwrap();
        assert!((sc - silhouette_brute(&pts, &labels)).abs() < 1e-12);
        // Hand value: mean of 9.95/10.05 and 9.85/9.95, each twice.
        let hand = 0.5 * (9.95 / 10.05 + 9.85 / 9.95);
        assert!((sc - hand).abs() < 1e-12);
        assert!((sc - 0.99).abs() < 1e-4);
    }

    #[test]
    fn silhouette_swapping_points_lowers_score() {
        let pts = mat(&[
            vec![0.0, 0.0],
            vec![0.2, 0.0],
            vec![5.0, 0.0],
            vec![5.2, 0.0],
        ]);
        let good = silhouette(&pts, &[0, 0, 1, 1]).unwrap();
        let swapped = silhouette(&pts, &[0, 1, 0, 1]).unwrap();
        assert!(good > swapped);
    }

    #[test]
    fn silhouette_matches_brute_force_on_random_instance() {
        let pts = mat(&[
            vec![0.1, 0.3],
            vec![0.4, -0.2],
            vec![3.0, 3.1],
            vec![2.8, 2.7],
            vec![2.9, 3.3],
            vec![-1.0, 0.2],
            vec![0.0, -0.4],
            vec![3.3, 2.9],
        ]);
        let labels = [0, 0, 1, 1, 1, 2, 2, 1];
        let sc = silhouette(&pts, &labels).unwrap();
        assert!((sc - silhouette_brute(&pts, &labels)).abs() < 1e-9);
    }

    #[test]
    fn silhouette_singleton_contributes_zero() {
        let pts = mat(&[vec![0.0], vec![0.1], vec![9.0]]);
        let labels = [0, 0, 1];
        let sc = silhouette(&pts, &labels).unwrap();
        assert!((sc - silhouette_brute(&pts, &labels)).abs() < 1e-12);
    }

    #[test]
    fn silhouette_rejects_single_cluster() {
        let pts = mat(&[vec![0.0], vec![1.0]]);
        assert!(matches!(
            silhouette(&pts, &[0, 0]),
            Err(Error::SingleCluster)
        ));
    }

    #[test]
    fn silhouette_invariant_under_relabeling() {
        let pts = mat(&[vec![0.0], vec![0.2], vec![4.0], vec![4.1], vec![8.0]]);
        let a = silhouette(&pts, &[0, 0, 1, 1, 2]).unwrap();
        let b = silhouette(&pts, &[2, 2, 0, 0, 1]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn nmi_identical_partitions() {
        let l = [0, 1, 2, 0, 1, 2, 2];
        assert_eq!(nmi(&l, &l).unwrap(), 1.0);
    }

    #[test]
    fn nmi_constant_partition_is_zero() {
        let a = [0, 0, 0, 0];
        let b = [0, 1, 0, 1];
        assert_eq!(nmi(&a, &b).unwrap(), 0.0);
        assert_eq!(nmi(&b, &a).unwrap(), 0.0);
        assert_eq!(nmi(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn nmi_six_point_oracle() {
        // MI = (2/3)ln2, H = ln3 and ln2, arithmetic-mean normalization.
        let a = [0, 0, 1, 1, 2, 2];
        let b = [0, 0, 0, 1, 1, 1];
        let mi = 2.0 / 3.0 * 2.0_f64.ln();
        let want = mi / (0.5 * (3.0_f64.ln() + 2.0_f64.ln()));
        assert!((nmi(&a, &b).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn nmi_permutation_invariant() {
        let a = [0, 0, 1, 1, 2, 2];
        let b = [0, 1, 1, 2, 2, 0];
        let b_renamed = [2, 0, 0, 1, 1, 2];
        assert!((nmi(&a, &b).unwrap() - nmi(&a, &b_renamed).unwrap()).abs() < 1e-12);
    }

    /// ARI by direct iteration over all point pairs.
    fn ari_brute(a: &[usize], b: &[usize]) -> f64 {
        let n = a.len();
        let (mut n11, mut n00, mut n10, mut n01) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                match (a[i] == a[j], b[i] == b[j]) {
                    (true, true) => n11 += 1.0,
                    (false, false) => n00 += 1.0,
                    (true, false) => n10 += 1.0,
                    (false, true) => n01 += 1.0,
                }
            }
        }
        let total = n11 + n00 + n10 + n01;
        let expected = (n11 + n10) * (n11 + n01) / total;
        let max_index = 0.5 * ((n11 + n10) + (n11 + n01));
        (n11 - expected) / (max_index - expected)
    }

    #[test]
    fn ari_identical_partitions() {
        let l = [0, 1, 2, 0, 1, 2];
        assert_eq!(ari(&l, &l).unwrap(), 1.0);
    }

    #[test]
    fn ari_relabel_invariance() {
        let a = [0, 0, 1, 1, 2, 2];
        let renamed = [2, 2, 0, 0, 1, 1];
        assert_eq!(ari(&a, &renamed).unwrap(), 1.0);
    }

    #[test]
    fn ari_six_point_oracle() {
        let a = [0, 0, 1, 1, 2, 2];
        let b = [0, 0, 0, 1, 1, 1];
        let got = ari(&a, &b).unwrap();
        assert!((got - 0.8 / 3.3).abs() < 1e-12);
        assert!((got - ari_brute(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn ari_matches_pair_counting_on_mixed_instance() {
        let a = [0, 1, 1, 0, 2, 2, 1, 0];
        let b = [1, 1, 0, 0, 2, 2, 0, 1];
        assert!((ari(&a, &b).unwrap() - ari_brute(&a, &b)).abs() < 1e-9);
    }

    #[test]
    fn cluster_sizes_counts() {
        assert_eq!(cluster_sizes(&[0, 2, 2, 1], 3), vec![1, 1, 2]);
    }

    fn protos(rows: &[Vec<f64>]) -> PrototypeSet {
        PrototypeSet::new(mat(rows)).unwrap()
    }

    #[test]
    fn entropy_sharp_softmax_vanishes() {
        let pts = mat(&[vec![0.0, 0.0], vec![4.1, 0.2]]);
        let p = protos(&[vec![0.0, 0.0], vec![4.0, 0.0]]);
        let prof = entropy_profile(&pts, &p, 1e6, 10).unwrap();
        assert!(prof.entropies.iter().all(|&h| h <= 1e-6));
    }

    #[test]
    fn entropy_beta_zero_limit_is_log_k() {
        // β must be positive; 1e-300 is operationally zero.
        let pts = mat(&[vec![0.3, 1.0], vec![-2.0, 0.5]]);
        let p = protos(&[vec![0.0, 0.0], vec![4.0, 0.0], vec![1.0, 2.0]]);
        let prof = entropy_profile(&pts, &p, 1e-300, 5).unwrap();
        for &h in &prof.entropies {
            assert!((h - 3.0_f64.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_equidistant_pair_is_log_two() {
        let pts = mat(&[vec![1.0, 7.3]]);
        let p = protos(&[vec![0.0, 0.0], vec![2.0, 0.0]]);
        let prof = entropy_profile(&pts, &p, 0.8, 4).unwrap();
        assert!((prof.entropies[0] - 2.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_bounded_by_log_k_and_binned() {
        let pts = mat(&[
            vec![0.1, 0.0],
            vec![1.0, 1.0],
            vec![2.0, -1.0],
            vec![0.5, 0.5],
        ]);
        let p = protos(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.5]]);
        let prof = entropy_profile(&pts, &p, 0.7, 6).unwrap();
        let logk = 3.0_f64.ln();
        for &h in &prof.entropies {
            assert!((0.0..=logk + 1e-12).contains(&h));
        }
        assert_eq!(prof.counts.iter().sum::<usize>(), 4);
        assert_eq!(prof.bin_edges.len(), 7);
    }
}
