//! Accuracy as a function of passive sample size.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{MachineError, MooreMachine, Transducer};
use crate::trace_gen::prefix::{to_prefix_closed, SampleError};
use crate::trace_gen::walk::{acceptance_percentage, random_walk, WalkConfig};

use super::rpni::rpni_learn;

pub const EVAL_TRACES: usize = 1000;
pub const EVAL_LENGTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub num_traces: usize,
    pub accuracy: f64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SweepError {
    #[error("sample sizes must be ascending")]
    NotAscending,
    #[error("trace length must be at least 1")]
    ZeroLength,
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// Learns from the first `n` walks of one seeded stream for each size and
/// scores the result on fresh walks of the learned machine. Stops after the
/// first size reaching 100%.
pub fn accuracy_sweep(
    m: &MooreMachine,
    sizes: &[usize],
    trace_length: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>, SweepError> {
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(SweepError::NotAscending);
    }
    let Some(&largest) = sizes.last() else {
        return Ok(Vec::new());
    };
    let cfg = WalkConfig::new(trace_length, largest, seed).map_err(|_| SweepError::ZeroLength)?;
    let pool = random_walk(m, &cfg);
    let eval_seed = seed ^ 0x5bd1_e995_0000_0001;
    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let sample = to_prefix_closed(&pool[..n])?;
        let h = rpni_learn(&sample, m.alphabet())?;
        let accuracy = acceptance_percentage(&h, m, EVAL_TRACES, EVAL_LENGTH, eval_seed);
        out.push(SweepPoint {
            num_traces: n,
            accuracy,
        });
        if accuracy >= 100.0 {
            break;
        }
    }
    Ok(out)
}

/// Number of states of the machine learned from `n` walks; used by callers
/// that report model size next to accuracy.
pub fn learned_size(
    m: &MooreMachine,
    n: usize,
    trace_length: usize,
    seed: u64,
) -> Result<usize, SweepError> {
    let cfg = WalkConfig::new(trace_length, n, seed).map_err(|_| SweepError::ZeroLength)?;
    let sample = to_prefix_closed(&random_walk(m, &cfg))?;
    Ok(rpni_learn(&sample, m.alphabet())?.num_states())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn figure_four_reaches_full_accuracy() {
        let m = fixtures::figure4();
        let pts = accuracy_sweep(&m, &[50, 100], 20, 1).unwrap();
        assert_eq!(pts.last().unwrap().accuracy, 100.0);
        assert_eq!(pts[0].num_traces, 50);
    }

    #[test]
    fn empty_schedule() {
        assert!(accuracy_sweep(&fixtures::figure4(), &[], 20, 0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn stops_early() {
        let m = fixtures::mod3_counter();
        let pts = accuracy_sweep(&m, &[200, 400, 800, 1600], 20, 2).unwrap();
        assert_eq!(pts.last().unwrap().accuracy, 100.0);
        assert!(pts.len() <= 4);
        assert!(pts[..pts.len() - 1].iter().all(|p| p.accuracy < 100.0));
    }

    #[test]
    fn zero_traces_is_the_default_machine() {
        let m = fixtures::mod3_counter();
        assert_eq!(learned_size(&m, 0, 20, 0).unwrap(), 1);
        let pts = accuracy_sweep(&m, &[0], 20, 0).unwrap();
        assert!(pts[0].accuracy < 100.0);
    }

    #[test]
    fn rejects_descending_sizes() {
        assert_eq!(
            accuracy_sweep(&fixtures::figure4(), &[10, 5], 20, 0),
            Err(SweepError::NotAscending)
        );
    }
}
