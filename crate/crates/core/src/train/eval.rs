//! Test-set accuracy of a trained model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alphabet::Valuation;
use crate::machine::{MachineError, Trace, Transducer};
use crate::trace_gen::walk::random_letters;

use super::model::{Example, Model};

/// Per-example count of correctly predicted steps.
fn correct_steps(model: &Model, set: &[Example]) -> Vec<(usize, usize)> {
    set.par_iter()
        .map(|ex| {
            let pred = model.predict(&ex.inputs);
            let hits = pred.iter().zip(&ex.outputs).filter(|(p, y)| p == y).count();
            (hits, ex.outputs.len())
        })
        .collect()
}

/// Fraction of examples with every output predicted correctly. An empty set
/// scores 1.
pub fn eval_trace_acceptance(model: &Model, set: &[Example]) -> f64 {
    accuracies(model, set).1
}

/// Fraction of steps whose whole output letter is predicted correctly.
pub fn eval_step_accuracy(model: &Model, set: &[Example]) -> f64 {
    accuracies(model, set).0
}

/// `(step accuracy, trace acceptance)` in one pass.
pub fn accuracies(model: &Model, set: &[Example]) -> (f64, f64) {
    if set.is_empty() {
        return (1.0, 1.0);
    }
    let counts = correct_steps(model, set);
    let hits: usize = counts.iter().map(|c| c.0).sum();
    let steps: usize = counts.iter().map(|c| c.1).sum();
    let full = counts.iter().filter(|c| c.0 == c.1).count();
    let step_acc = if steps == 0 {
        1.0
    } else {
        hits as f64 / steps as f64
    };
    (step_acc, full as f64 / set.len() as f64)
}

/// Percentage of `n` random input words on which the model's decoded outputs
/// form a trace `target` accepts. 100.0 when `n` is zero.
pub fn model_acceptance_percentage<T: Transducer + Sync + ?Sized>(
    model: &Model,
    target: &T,
    n: usize,
    len: usize,
    seed: u64,
) -> Result<f64, MachineError> {
    let ab = target.alphabet();
    if model.config.input_width != ab.input_width()
        || model.config.output_width != ab.output_width()
    {
        return Err(MachineError::AlphabetMismatch);
    }
    if n == 0 {
        return Ok(100.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<Vec<usize>> = (0..n)
        .map(|_| random_letters(&mut rng, target.num_letters(), len))
        .collect();
    let accepted = words
        .par_iter()
        .filter(|w| {
            let inputs: Vec<Valuation> = w.iter().map(|&a| ab.input_letter(a)).collect();
            let outputs: Vec<Valuation> = model
                .predict(w)
                .into_iter()
                .map(|o| ab.output_letter(o))
                .collect();
            Trace::from_parts(&inputs, &outputs)
                .is_ok_and(|t| target.accepts_trace(&t).unwrap_or(false))
        })
        .count();
    Ok(100.0 * accepted as f64 / n as f64)
}
