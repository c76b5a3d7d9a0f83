//! Symbolic initialization: the exact encoding with Gaussian noise on its
//! zero entries.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::machine::MooreMachine;

use super::encoding::encode_moore_as_ssm;
use super::params::{SsmError, SsmParams};

/// Adds `N(0, epsilon)` noise (epsilon is the variance) to every zero entry
/// of `A`, `B` and `C`. Nonzero entries and `x0` are left untouched.
pub fn warm_start_init(m: &MooreMachine, epsilon: f64, seed: u64) -> Result<SsmParams, SsmError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SsmError::Epsilon(epsilon));
    }
    let (mut p, _) = encode_moore_as_ssm(m);
    let noise = Normal::new(0.0, epsilon.sqrt()).expect("positive std");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for mat in [&mut p.a, &mut p.b, &mut p.c] {
        perturb_zeros(mat, &noise, &mut rng);
    }
    Ok(p)
}

fn perturb_zeros(mat: &mut DMatrix<f64>, noise: &Normal<f64>, rng: &mut ChaCha8Rng) {
    for v in mat.iter_mut() {
        if *v == 0.0 {
            *v = noise.sample(rng);
        }
    }
}
