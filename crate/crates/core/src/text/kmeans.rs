//! k-means with k-means++ seeding and silhouette-based model selection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::seeding::derive_indexed_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl KmeansConfig {
    pub fn new(k_min: usize, k_max: usize, restarts: usize, seed: u64) -> Self {
        Self {
            k_min,
            k_max,
            restarts,
            seed,
            max_iterations: 300,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClusterError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("all pairwise distances are zero; silhouette undefined")]
    DegenerateGeometry,
}

#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    pub chosen_k: usize,
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Mean silhouette per scanned k, ascending in k.
    pub silhouette_by_k: Vec<(usize, f64)>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

struct KmeansRun {
    labels: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    wcss: f64,
}

fn lloyd(points: &[Vec<f64>], k: usize, seed: u64, max_iters: usize, tol: f64) -> KmeansRun {
    let n = points.len();
    let dim = points[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ initialization
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..n)].clone());
    let mut best_d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = best_d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in best_d2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(points[next].clone());
        for (i, p) in points.iter().enumerate() {
            best_d2[i] = best_d2[i].min(sq_dist(p, centroids.last().unwrap()));
        }
    }

    let mut labels = vec![0usize; n];
    let mut prev_wcss = f64::INFINITY;
    let mut wcss = f64::INFINITY;
    for _iter in 0..max_iters {
        // assignment step
        let mut changed = false;
        wcss = 0.0;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = sq_dist(p, centroid);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
            wcss += best_d;
        }
        // the Lloyd objective never increases
        debug_assert!(wcss <= prev_wcss + 1e-9 * prev_wcss.max(1.0));

        if !changed || prev_wcss - wcss < tol * prev_wcss.max(1.0) {
            prev_wcss = wcss;
            break;
        }
        prev_wcss = wcss;

        // update step
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &label) in points.iter().zip(&labels) {
            counts[label] += 1;
            for (s, x) in sums[label].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // reseed an empty cluster at the point farthest from its centroid
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_dist(&points[a], &centroids[labels[a]])
                            .partial_cmp(&sq_dist(&points[b], &centroids[labels[b]]))
                            .unwrap()
                    })
                    .unwrap();
                centroids[c] = points[far].clone();
            } else {
                for (cv, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *cv = s / counts[c] as f64;
                }
            }
        }
    }
    KmeansRun {
        labels,
        centroids,
        wcss: prev_wcss.min(wcss),
    }
}

/// Mean silhouette over all points (Euclidean); singleton clusters score 0.
pub fn mean_silhouette(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let n = points.len();
    let mut cluster_sizes = vec![0usize; k];
    for &l in labels {
        cluster_sizes[l] += 1;
    }
    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i];
        if cluster_sizes[own] <= 1 {
            continue; // s(i) = 0
        }
        let mut sums = vec![0.0f64; k];
        for j in 0..n {
            if i == j {
                continue;
            }
            sums[labels[j]] += sq_dist(&points[i], &points[j]).sqrt();
        }
        let a = sums[own] / (cluster_sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && cluster_sizes[c] > 0)
            .map(|c| sums[c] / cluster_sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / n as f64
}

/// Cluster points for every k in the range, pick the k with the highest mean
/// silhouette, each k taking the best of `restarts` seeded initializations
/// by within-cluster sum of squares.
pub fn kmeans_cluster(
    points: &[Vec<f64>],
    cfg: &KmeansConfig,
) -> Result<ClusterAssignment, ClusterError> {
    let n = points.len();
    assert!(cfg.k_min >= 2 && cfg.k_min <= cfg.k_max, "bad k range");
    if n < cfg.k_max + 1 {
        return Err(ClusterError::TooFewPoints {
            needed: cfg.k_max + 1,
            got: n,
        });
    }
    if points.iter().all(|p| p == &points[0]) {
        return Err(ClusterError::DegenerateGeometry);
    }

    let mut best: Option<(usize, f64, KmeansRun)> = None;
    let mut silhouette_by_k = Vec::new();
    for k in cfg.k_min..=cfg.k_max {
        let mut best_run: Option<KmeansRun> = None;
        for restart in 0..cfg.restarts.max(1) {
            let seed = derive_indexed_seed(cfg.seed, "kmeans", (k * 10_000 + restart) as u64);
            let run = lloyd(points, k, seed, cfg.max_iterations, cfg.tolerance);
            if best_run.as_ref().map_or(true, |b| run.wcss < b.wcss) {
                best_run = Some(run);
            }
        }
        let run = best_run.unwrap();
        let silhouette = mean_silhouette(points, &run.labels, k);
        silhouette_by_k.push((k, silhouette));
        if best.as_ref().map_or(true, |(_, s, _)| silhouette > *s) {
            best = Some((k, silhouette, run));
        }
    }
    let (chosen_k, _, run) = best.unwrap();
    Ok(ClusterAssignment {
        chosen_k,
        labels: run.labels,
        centroids: run.centroids,
        silhouette_by_k,
    })
}
