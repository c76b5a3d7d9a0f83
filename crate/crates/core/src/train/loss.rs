//! Binary cross-entropy on logits.

use nalgebra::DVector;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-y ln σ(z) - (1-y) ln(1-σ(z))`, computed without overflow.
pub fn bce_term(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Mean over every step and output coordinate.
pub fn bce_with_logits(logits: &[DVector<f64>], targets: &[DVector<f64>]) -> f64 {
    assert_eq!(
        logits.len(),
        targets.len(),
        "logit and target sequences differ in length"
    );
    let mut total = 0.0;
    let mut count = 0usize;
    for (z, y) in logits.iter().zip(targets) {
        assert_eq!(z.len(), y.len(), "logit and target widths differ");
        total += z
            .iter()
            .zip(y.iter())
            .map(|(&z, &y)| bce_term(z, y))
            .sum::<f64>();
        count += z.len();
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// Gradient of [`bce_with_logits`] with respect to each logit.
pub fn bce_grad(logits: &[DVector<f64>], targets: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let count: usize = logits.iter().map(|z| z.len()).sum();
    let n = count.max(1) as f64;
    logits
        .iter()
        .zip(targets)
        .map(|(z, y)| z.zip_map(y, |z, y| (sigmoid(z) - y) / n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_logits_cost_ln2() {
        let z = vec![DVector::zeros(3); 2];
        let y = vec![DVector::from_vec(vec![1.0, 0.0, 1.0]); 2];
        assert!((bce_with_logits(&z, &y) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn saturated_logit() {
        let expected = (-20f64).exp().ln_1p();
        assert!((bce_term(20.0, 1.0) - expected).abs() < 1e-20);
        assert!((bce_term(20.0, 1.0) - 2.061e-9).abs() < 1e-11);
        assert!(bce_term(800.0, 0.0).is_finite());
        assert!(bce_term(-800.0, 1.0).is_finite());
    }

    proptest! {
        #[test]
        fn gradient_is_sigmoid_minus_target(z in -30.0f64..30.0, y in prop::bool::ANY) {
            let y = f64::from(u8::from(y));
            let g = bce_grad(&[DVector::from_vec(vec![z])], &[DVector::from_vec(vec![y])]);
            prop_assert!((g[0][0] - (sigmoid(z) - y)).abs() < 1e-15);
            let h = 1e-6;
            let fd = (bce_term(z + h, y) - bce_term(z - h, y)) / (2.0 * h);
            prop_assert!((fd - g[0][0]).abs() < 1e-6);
        }
    }
}
