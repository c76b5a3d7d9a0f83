//! Summaries built from the diagnostics: latent metrics, CSV export and the
//! warm-versus-random convergence comparison.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::clustering::{
    adjusted_rand_index, nearest_centroid_assignments, normalized_mutual_information,
    separation_ratio,
};
use super::mann_whitney::mann_whitney_u;
use super::pca::Projection;
use super::points::LabeledPoints;
use super::AnalysisError;
use crate::records::finite_or_inf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentMetrics {
    #[serde(with = "finite_or_inf")]
    pub separation_ratio: f64,
    pub ari: f64,
    pub nmi: f64,
    pub n_points: usize,
    pub per_state_counts: BTreeMap<String, usize>,
}

/// Agreement between the ground-truth labels and nearest-centroid clusters.
/// `state_names[l]` names label `l`.
pub fn latent_metrics(
    lp: &LabeledPoints,
    state_names: &[String],
) -> Result<LatentMetrics, AnalysisError> {
    let classes = lp.classes();
    let assigned: Vec<usize> = nearest_centroid_assignments(lp, 100)
        .into_iter()
        .map(|k| classes[k])
        .collect();
    let mut per_state_counts = BTreeMap::new();
    for &l in &lp.labels {
        let name = state_names.get(l).cloned().unwrap_or_else(|| l.to_string());
        *per_state_counts.entry(name).or_insert(0) += 1;
    }
    Ok(LatentMetrics {
        separation_ratio: separation_ratio(lp)?,
        ari: adjusted_rand_index(&lp.labels, &assigned)?,
        nmi: normalized_mutual_information(&lp.labels, &assigned)?,
        n_points: lp.len(),
        per_state_counts,
    })
}

/// `pc1,...,pck,label` rows.
pub fn projection_csv(proj: &Projection, labels: &[usize], state_names: &[String]) -> String {
    let k = proj.coords.ncols();
    let mut out = String::new();
    for c in 0..k {
        let _ = write!(out, "pc{},", c + 1);
    }
    out.push_str("label\n");
    for (i, &l) in labels.iter().enumerate() {
        for c in 0..k {
            let _ = write!(out, "{},", proj.coords[(i, c)]);
        }
        let name = state_names.get(l).cloned().unwrap_or_else(|| l.to_string());
        out.push_str(&name);
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    /// Per-run convergence epoch, `None` when the threshold was never reached.
    pub convergence_epochs: Vec<Option<usize>>,
    pub censored: usize,
    /// Mean epoch with censored runs counted at the censoring value.
    pub mean_epoch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceComparison {
    pub threshold: f64,
    pub censor_value: usize,
    pub warm: ArmSummary,
    pub random: ArmSummary,
    /// Random-arm mean minus warm-arm mean.
    pub mean_gap: f64,
    /// Paired runs (by position) where the warm arm converged strictly first.
    pub warm_earlier: usize,
    pub u: f64,
    pub p_value: f64,
}

fn arm(epochs: &[Option<usize>], censor: usize) -> (ArmSummary, Vec<f64>) {
    let values: Vec<f64> = epochs.iter().map(|e| e.unwrap_or(censor) as f64).collect();
    let summary = ArmSummary {
        convergence_epochs: epochs.to_vec(),
        censored: epochs.iter().filter(|e| e.is_none()).count(),
        mean_epoch: values.iter().sum::<f64>() / values.len() as f64,
    };
    (summary, values)
}

/// Runs that never converge count as `censor_value` (one past the epoch
/// budget), which makes the comparison conservative for the censored arm.
pub fn compare_convergence(
    warm: &[Option<usize>],
    random: &[Option<usize>],
    threshold: f64,
    censor_value: usize,
) -> Result<ConvergenceComparison, AnalysisError> {
    if warm.is_empty() || random.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let (w, wv) = arm(warm, censor_value);
    let (r, rv) = arm(random, censor_value);
    let test = mann_whitney_u(&wv, &rv)?;
    Ok(ConvergenceComparison {
        threshold,
        censor_value,
        mean_gap: r.mean_epoch - w.mean_epoch,
        warm_earlier: wv.iter().zip(&rv).filter(|(a, b)| a < b).count(),
        warm: w,
        random: r,
        u: test.u,
        p_value: test.p_value,
    })
}
