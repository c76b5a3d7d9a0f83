//! Latent-structure diagnostics and convergence significance tests.
//!
//! Cluster agreement compares ground-truth labels against nearest-centroid
//! assignments started from the ground-truth centroids.

pub mod clustering;
pub mod mann_whitney;
pub mod pca;
pub mod points;
pub mod report;

use thiserror::Error;

pub use clustering::{
    adjusted_rand_index, nearest_centroid_assignments, normalized_mutual_information,
    separation_ratio,
};
pub use mann_whitney::{mann_whitney_u, MannWhitney};
pub use pca::{pca_project, Projection};
pub use points::{collect_hidden_states, LabeledPoints};
pub use report::{
    compare_convergence, latent_metrics, projection_csv, ArmSummary, ConvergenceComparison,
    LatentMetrics,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("no points")]
    Empty,
    #[error("length mismatch: {left} vs {right}")]
    Length { left: usize, right: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error(
        "{k} components need at least {k} points of dimension {k}, got {points} of dimension {dim}"
    )]
    TooFewForComponents { points: usize, dim: usize, k: usize },
    #[error("need at least 2 labels, got {0}")]
    TooFewClasses(usize),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("sample contains NaN")]
    NotANumber,
    #[error("model and machine alphabets differ")]
    Alphabet,
}
