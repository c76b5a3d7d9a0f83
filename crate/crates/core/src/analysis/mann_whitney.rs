//! Two-sided Mann-Whitney U test.

use statrs::distribution::{ContinuousCDF, Normal};

use super::AnalysisError;

/// Largest combined sample size handled by the exact null distribution.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// `U` of the first sample: pairs with `x > y` plus half the ties.
    pub u: f64,
    pub p_value: f64,
    pub exact: bool,
}

/// Midranks (1-based) of the pooled sample.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Number of size-`k` subsets of `weights` reaching each total.
fn subset_sum_counts(weights: &[usize], k: usize) -> Vec<Vec<f64>> {
    let total: usize = weights.iter().sum();
    let mut dp = vec![vec![0.0; total + 1]; k + 1];
    dp[0][0] = 1.0;
    for &w in weights {
        for size in (1..=k).rev() {
            for s in (w..=total).rev() {
                let add = dp[size - 1][s - w];
                if add > 0.0 {
                    dp[size][s] += add;
                }
            }
        }
    }
    dp
}

pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<MannWhitney, AnalysisError> {
    if x.is_empty() || y.is_empty() {
        return Err(AnalysisError::Empty);
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(AnalysisError::NotANumber);
    }
    let (n1, n2) = (x.len(), y.len());
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let mean = (n1 * n2) as f64 / 2.0;
    let n = n1 + n2;

    if n <= EXACT_LIMIT {
        // doubled midranks are integers, so rank sums can be tabulated exactly
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let dp = subset_sum_counts(&doubled, n1);
        let offset = n1 * (n1 + 1);
        let observed = (2.0 * u - 2.0 * mean).abs();
        let mut hit = 0.0;
        let mut all = 0.0;
        for (s, &count) in dp[n1].iter().enumerate() {
            if count == 0.0 {
                continue;
            }
            all += count;
            let dev = (s as f64 - offset as f64 - 2.0 * mean).abs();
            if dev >= observed - 1e-9 {
                hit += count;
            }
        }
        return Ok(MannWhitney {
            u,
            p_value: (hit / all).min(1.0),
            exact: true,
        });
    }

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    let nf = n as f64;
    let var = (n1 * n2) as f64 / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((u - mean).abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::standard();
        (2.0 * (1.0 - normal.cdf(z))).min(1.0)
    };
    Ok(MannWhitney {
        u,
        p_value,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// U by direct pair counting and the p-value by enumerating every split of
    /// the pooled values into groups of the original sizes.
    fn oracle(x: &[f64], y: &[f64]) -> (f64, f64) {
        let u_of = |a: &[f64], b: &[f64]| -> f64 {
            let mut u = 0.0;
            for &p in a {
                for &q in b {
                    u += if p > q {
                        1.0
                    } else if p == q {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
            u
        };
        let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
        let n = pooled.len();
        let mean = (x.len() * y.len()) as f64 / 2.0;
        let u = u_of(x, y);
        let obs = (u - mean).abs();
        let (mut hit, mut all) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != x.len() {
                continue;
            }
            let a: Vec<f64> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| pooled[i])
                .collect();
            let b: Vec<f64> = (0..n)
                .filter(|i| mask >> i & 1 == 0)
                .map(|i| pooled[i])
                .collect();
            all += 1;
            if (u_of(&a, &b) - mean).abs() >= obs - 1e-9 {
                hit += 1;
            }
        }
        (u, hit as f64 / all as f64)
    }

    #[test]
    fn separated_triples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert!((r.p_value - 0.1).abs() < 1e-12);
        assert!(r.exact);
    }

    #[test]
    fn identical_samples() {
        let x = [3.0, 1.0, 4.0, 1.0, 5.0];
        let r = mann_whitney_u(&x, &x).unwrap();
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let big: Vec<f64> = (0..30).map(|i| (i % 7) as f64).collect();
        let r = mann_whitney_u(&big, &big).unwrap();
        assert!(!r.exact);
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn shifted_five_seed_arms() {
        let warm = [100.0, 150.0, 200.0, 120.0, 180.0];
        let random: Vec<f64> = warm.iter().map(|v| v + 100.0).collect();
        let r = mann_whitney_u(&warm, &random).unwrap();
        let (u, p) = oracle(&warm, &random);
        assert_eq!(r.u, u);
        assert!((r.p_value - p).abs() < 1e-12);
    }

    #[test]
    fn normal_approximation_close_to_exact_boundary() {
        let x: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..11).map(|i| i as f64 + 4.5).collect();
        let r = mann_whitney_u(&x, &y).unwrap();
        assert!(!r.exact);
        assert!(r.p_value > 0.005 && r.p_value < 0.1, "{}", r.p_value);
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
        assert!(mann_whitney_u(&[f64::NAN], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn exact_mode_matches_enumeration(
            x in prop::collection::vec(0u8..6, 1..6),
            y in prop::collection::vec(0u8..6, 1..6),
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let r = mann_whitney_u(&x, &y).unwrap();
            let (u, p) = oracle(&x, &y);
            prop_assert_eq!(r.u, u);
            prop_assert!((r.p_value - p).abs() < 1e-9, "{} vs {}", r.p_value, p);
        }
    }
}
