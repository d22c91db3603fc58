//! Principal component analysis via covariance eigendecomposition.

use crate::linalg::{dot, jacobi_eigh};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PcaError {
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("n_components {requested} exceeds dimension {dim}")]
    TooManyComponents { requested: usize, dim: usize },
}

#[derive(Debug, Clone)]
pub struct PcaProjection {
    /// Orthonormal component vectors, strongest first.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalue share of each returned component, non-increasing.
    pub explained_variance_ratio: Vec<f64>,
    /// Per-point coordinates in component space.
    pub coordinates: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
}

/// Project mean-centered points onto the top `n_components` principal axes.
pub fn pca_project(points: &[Vec<f64>], n_components: usize) -> Result<PcaProjection, PcaError> {
    let n = points.len();
    if n < 2 {
        return Err(PcaError::TooFewPoints(n));
    }
    let dim = points[0].len();
    if n_components > dim || n_components == 0 {
        return Err(PcaError::TooManyComponents {
            requested: n_components,
            dim,
        });
    }

    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }

    let centered: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let mut cov = vec![0.0; dim * dim];
    for row in &centered {
        for i in 0..dim {
            for j in i..dim {
                cov[i * dim + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            cov[i * dim + j] /= (n - 1) as f64;
            cov[j * dim + i] = cov[i * dim + j];
        }
    }

    let (eigenvalues, eigenvectors) = jacobi_eigh(&cov, dim);
    let total: f64 = eigenvalues.iter().map(|&v| v.max(0.0)).sum();

    let mut components = Vec::with_capacity(n_components);
    let mut ratios = Vec::with_capacity(n_components);
    for i in 0..n_components {
        let mut v = eigenvectors[i].clone();
        // canonical sign: largest-magnitude entry positive
        let lead = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(idx, _)| idx)
            .unwrap_or(0);
        if v[lead] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        components.push(v);
        ratios.push(if total > 0.0 {
            eigenvalues[i].max(0.0) / total
        } else {
            0.0
        });
    }

    let coordinates = centered
        .iter()
        .map(|row| components.iter().map(|c| dot(row, c)).collect())
        .collect();

    Ok(PcaProjection {
        components,
        explained_variance_ratio: ratios,
        coordinates,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn collinear_points_are_rank_one() {
        let points: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64 * 2.0, i as f64 * -3.0])
            .collect();
        let p = pca_project(&points, 2).unwrap();
        assert!((p.explained_variance_ratio[0] - 1.0).abs() < 1e-9);
        assert!(p.explained_variance_ratio[1].abs() < 1e-9);
    }

    #[test]
    fn isotropic_cloud_splits_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points: Vec<Vec<f64>> = (0..4000)
            .map(|_| {
                // sum of uniforms is close enough to isotropic for this check
                vec![
                    rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0),
                ]
            })
            .collect();
        let p = pca_project(&points, 2).unwrap();
        assert!((p.explained_variance_ratio[0] - 0.5).abs() < 0.05);
        assert!((p.explained_variance_ratio[1] - 0.5).abs() < 0.05);
    }

    #[test]
    fn projections_have_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let points: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..4).map(|_| rng.gen_range(-2.0..5.0)).collect())
            .collect();
        let p = pca_project(&points, 2).unwrap();
        for c in 0..2 {
            let mean: f64 = p.coordinates.iter().map(|row| row[c]).sum::<f64>() / 50.0;
            assert!(mean.abs() < 1e-10);
        }
    }

    #[test]
    fn components_are_orthonormal_and_ratios_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let points: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                let base: f64 = rng.gen_range(-1.0..1.0);
                vec![
                    base * 3.0 + rng.gen_range(-0.1..0.1),
                    base + rng.gen_range(-0.5..0.5),
                    rng.gen_range(-0.2..0.2),
                ]
            })
            .collect();
        let p = pca_project(&points, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&p.components[i], &p.components[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((d - expected).abs() < 1e-8);
            }
        }
        for w in p.explained_variance_ratio.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        for r in &p.explained_variance_ratio {
            assert!((0.0..=1.0 + 1e-12).contains(r));
        }
    }

    #[test]
    fn full_reconstruction_is_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let p = pca_project(&points, 5).unwrap();
        for (orig, coords) in points.iter().zip(&p.coordinates) {
            for d in 0..5 {
                let rebuilt: f64 = p.mean[d]
                    + coords
                        .iter()
                        .zip(&p.components)
                        .map(|(c, comp)| c * comp[d])
                        .sum::<f64>();
                assert!((rebuilt - orig[d]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            pca_project(&[vec![1.0]], 1).unwrap_err(),
            PcaError::TooFewPoints(1)
        );
        assert_eq!(
            pca_project(&[vec![1.0], vec![2.0]], 2).unwrap_err(),
            PcaError::TooManyComponents { requested: 2, dim: 1 }
        );
    }
}
