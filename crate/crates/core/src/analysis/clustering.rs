//! Class separation and labeling agreement.

use std::collections::HashMap;

use nalgebra::DVector;

use super::points::LabeledPoints;
use super::AnalysisError;

/// Size-weighted variance of class centroids over pooled within-class
/// variance, both summed over dimensions. Zero when the centroids coincide,
/// `+inf` when the classes are tight but apart.
pub fn separation_ratio(lp: &LabeledPoints) -> Result<f64, AnalysisError> {
    let classes = lp.classes();
    if classes.len() < 2 {
        return Err(AnalysisError::TooFewClasses(classes.len()));
    }
    let centroids = lp.centroids();
    let slot: HashMap<usize, usize> = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let n = lp.len() as f64;
    let mean = lp
        .points
        .iter()
        .fold(DVector::zeros(lp.dim()), |a, p| a + p)
        / n;
    let mut between = 0.0;
    let mut within = 0.0;
    for (p, l) in lp.points.iter().zip(&lp.labels) {
        let c = &centroids[slot[l]];
        between += (c - &mean).norm_squared();
        within += (p - c).norm_squared();
    }
    let (between, within) = (between / n, within / n);
    let scale = mean.norm_squared().max(1.0);
    if between <= 1e-24 * scale {
        Ok(0.0)
    } else if within <= 1e-24 * scale {
        Ok(f64::INFINITY)
    } else {
        Ok(between / within)
    }
}

fn check_pair(a: &[usize], b: &[usize]) -> Result<(), AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::Length {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

struct Contingency {
    cells: HashMap<(usize, usize), u64>,
    rows: HashMap<usize, u64>,
    cols: HashMap<usize, u64>,
    n: u64,
}

fn contingency(a: &[usize], b: &[usize]) -> Contingency {
    let mut t = Contingency {
        cells: HashMap::new(),
        rows: HashMap::new(),
        cols: HashMap::new(),
        n: a.len() as u64,
    };
    for (&x, &y) in a.iter().zip(b) {
        *t.cells.entry((x, y)).or_default() += 1;
        *t.rows.entry(x).or_default() += 1;
        *t.cols.entry(y).or_default() += 1;
    }
    t
}

fn pairs(k: u64) -> f64 {
    (k * k.saturating_sub(1) / 2) as f64
}

/// Pair-counting agreement corrected for chance. Degenerate cases where the
/// chance correction vanishes (one cluster on both sides, say) score 1.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64, AnalysisError> {
    check_pair(a, b)?;
    if a.len() < 2 {
        return Err(AnalysisError::TooFewPoints(a.len()));
    }
    let t = contingency(a, b);
    let index: f64 = t.cells.values().map(|&v| pairs(v)).sum();
    let sa: f64 = t.rows.values().map(|&v| pairs(v)).sum();
    let sb: f64 = t.cols.values().map(|&v| pairs(v)).sum();
    let expected = sa * sb / pairs(t.n);
    let max = (sa + sb) / 2.0;
    if (max - expected).abs() < 1e-12 {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    counts
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information over the arithmetic mean of the two entropies, in
/// natural log. Two constant labelings score 1.
pub fn normalized_mutual_information(a: &[usize], b: &[usize]) -> Result<f64, AnalysisError> {
    check_pair(a, b)?;
    if a.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let t = contingency(a, b);
    let n = t.n as f64;
    let ha = entropy(t.rows.values().copied(), n);
    let hb = entropy(t.cols.values().copied(), n);
    if ha + hb <= 0.0 {
        return Ok(1.0);
    }
    let mi: f64 = t
        .cells
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = c as f64 / n;
            let px = t.rows[&x] as f64 / n;
            let py = t.cols[&y] as f64 / n;
            pxy * (pxy / (px * py)).ln()
        })
        .sum();
    Ok((mi / ((ha + hb) / 2.0)).clamp(0.0, 1.0))
}

/// Lloyd iterations started from the ground-truth class centroids. Returns
/// a cluster index per point (index into the sorted class list); ties go to
/// the lower cluster and empty clusters keep their previous centroid.
pub fn nearest_centroid_assignments(lp: &LabeledPoints, max_iter: usize) -> Vec<usize> {
    let mut centroids = lp.centroids();
    let mut assign = vec![usize::MAX; lp.len()];
    for _ in 0..max_iter.max(1) {
        let next: Vec<usize> = lp
            .points
            .iter()
            .map(|p| {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (k, c) in centroids.iter().enumerate() {
                    let d = (p - c).norm_squared();
                    if d < best_d {
                        best = k;
                        best_d = d;
                    }
                }
                best
            })
            .collect();
        if next == assign {
            break;
        }
        assign = next;
        for (k, c) in centroids.iter_mut().enumerate() {
            let members: Vec<&DVector<f64>> = lp
                .points
                .iter()
                .zip(&assign)
                .filter(|(_, &a)| a == k)
                .map(|(p, _)| p)
                .collect();
            if !members.is_empty() {
                *c = members.iter().fold(DVector::zeros(lp.dim()), |s, p| s + *p)
                    / members.len() as f64;
            }
        }
    }
    assign
}
