//! Hidden states labeled by the ground-truth machine state.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::machine::{MooreMachine, Transducer};
use crate::trace_gen::walk::random_letters;
use crate::train::Model;

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoints {
    pub points: Vec<DVector<f64>>,
    pub labels: Vec<usize>,
}

impl LabeledPoints {
    pub fn new(points: Vec<DVector<f64>>, labels: Vec<usize>) -> Result<Self, AnalysisError> {
        if points.is_empty() {
            return Err(AnalysisError::Empty);
        }
        if points.len() != labels.len() {
            return Err(AnalysisError::Length {
                left: points.len(),
                right: labels.len(),
            });
        }
        let d = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(AnalysisError::Dimension {
                expected: d,
                actual: p.len(),
            });
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<usize> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Mean of each class, in the order of [`LabeledPoints::classes`].
    pub fn centroids(&self) -> Vec<DVector<f64>> {
        self.classes()
            .iter()
            .map(|&c| {
                let mut sum = DVector::zeros(self.dim());
                let mut n = 0usize;
                for (p, &l) in self.points.iter().zip(&self.labels) {
                    if l == c {
                        sum += p;
                        n += 1;
                    }
                }
                sum / n as f64
            })
            .collect()
    }
}

/// Runs `num_traces` random walks through both the model and the machine,
/// pairing the model's final hidden state with the machine's final state.
pub fn collect_hidden_states(
    model: &Model,
    m: &MooreMachine,
    num_traces: usize,
    trace_length: usize,
    seed: u64,
) -> Result<LabeledPoints, AnalysisError> {
    if model.config.input_width != m.alphabet().input_width() {
        return Err(AnalysisError::Alphabet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(num_traces);
    let mut labels = Vec::with_capacity(num_traces);
    for _ in 0..num_traces {
        let word = random_letters(&mut rng, m.num_letters(), trace_length);
        let cache = model.forward(&word);
        points.push(cache.states.last().expect("x0 is always present").clone());
        labels.push(m.reach(&word));
    }
    LabeledPoints::new(points, labels)
}
