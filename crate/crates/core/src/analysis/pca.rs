//! Principal-component projection.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// One row per input point, one column per component.
    pub coords: DMatrix<f64>,
    /// Fraction of total variance carried by each component.
    pub explained: Vec<f64>,
    /// Unit component directions as columns; zero for missing rank.
    pub components: DMatrix<f64>,
    pub mean: DVector<f64>,
}

/// Projects mean-centered points onto the top `k` covariance eigenvectors.
/// Each direction is signed so its largest-magnitude coordinate is positive.
/// Directions beyond the numerical rank are zero with zero explained variance.
pub fn pca_project(points: &[DVector<f64>], k: usize) -> Result<Projection, AnalysisError> {
    let n = points.len();
    if n == 0 {
        return Err(AnalysisError::Empty);
    }
    let d = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(AnalysisError::Dimension {
            expected: d,
            actual: p.len(),
        });
    }
    if n < k || d < k {
        return Err(AnalysisError::TooFewForComponents {
            points: n,
            dim: d,
            k,
        });
    }
    let mean = points.iter().fold(DVector::zeros(d), |acc, p| acc + p) / n as f64;
    let centered = DMatrix::from_fn(n, d, |i, j| points[i][j] - mean[j]);
    let cov = centered.tr_mul(&centered) / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-12 * top.max(f64::MIN_POSITIVE) * d as f64;

    let mut components = DMatrix::zeros(d, k);
    let mut explained = vec![0.0; k];
    for (c, &idx) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[idx];
        if top <= 0.0 || lambda <= tol {
            continue;
        }
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let lead = v.iter().enumerate().fold(
            0,
            |best, (i, x)| if x.abs() > v[best].abs() { i } else { best },
        );
        if v[lead] < 0.0 {
            v = -v;
        }
        components.set_column(c, &v);
        explained[c] = lambda / total;
    }
    Ok(Projection {
        coords: &centered * &components,
        explained,
        components,
        mean,
    })
}
