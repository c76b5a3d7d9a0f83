//! Random walks over total machines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::machine::{Trace, Transducer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WalkError {
    #[error("trace length must be at least 1")]
    ZeroLength,
    #[error("worker count must be at least 1")]
    NoWorkers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub trace_length: usize,
    pub num_traces: usize,
    pub seed: u64,
}

impl WalkConfig {
    pub fn new(trace_length: usize, num_traces: usize, seed: u64) -> Result<Self, WalkError> {
        if trace_length == 0 {
            return Err(WalkError::ZeroLength);
        }
        Ok(Self {
            trace_length,
            num_traces,
            seed,
        })
    }
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            trace_length: 20,
            num_traces: 1000,
            seed: 0,
        }
    }
}

/// Uniformly random letter indices.
pub fn random_letters(rng: &mut impl Rng, letters: usize, len: usize) -> Vec<usize> {
    (0..len).map(|_| rng.random_range(0..letters)).collect()
}

/// One walk from the initial state, drawing each input uniformly.
pub fn walk_once<M: Transducer + ?Sized>(m: &M, len: usize, rng: &mut impl Rng) -> Trace {
    let ab = m.alphabet();
    let mut state = m.initial();
    let mut steps = Vec::with_capacity(len);
    for _ in 0..len {
        let a = rng.random_range(0..m.num_letters());
        let (next, out) = m.transition(state, a);
        steps.push((ab.input_letter(a), out));
        state = next;
    }
    Trace::new(steps)
}

/// `cfg.num_traces` walks of `cfg.trace_length` steps from one stream seeded by
/// `cfg.seed`. The first `n` walks do not depend on `cfg.num_traces`.
pub fn random_walk<M: Transducer + ?Sized>(m: &M, cfg: &WalkConfig) -> Vec<Trace> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.num_traces)
        .map(|_| walk_once(m, cfg.trace_length, &mut rng))
        .collect()
}

/// Splits the walks across `workers` contiguous chunks, worker `w` seeded
/// with `cfg.seed + w`. Output depends on `(seed, workers)` only.
pub fn random_walk_parallel<M: Transducer + Sync + ?Sized>(
    m: &M,
    cfg: &WalkConfig,
    workers: usize,
) -> Result<Vec<Trace>, WalkError> {
    if workers == 0 {
        return Err(WalkError::NoWorkers);
    }
    let base = cfg.num_traces / workers;
    let extra = cfg.num_traces % workers;
    let chunks: Vec<Vec<Trace>> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let count = base + usize::from(w < extra);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(w as u64));
            (0..count)
                .map(|_| walk_once(m, cfg.trace_length, &mut rng))
                .collect()
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Percentage of `n` fresh walks of `learned` whose outputs `target`
/// reproduces. 100.0 when `n` is zero.
pub fn acceptance_percentage<L, T>(learned: &L, target: &T, n: usize, len: usize, seed: u64) -> f64
where
    L: Transducer + ?Sized,
    T: Transducer + ?Sized,
{
    if n == 0 {
        return 100.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let accepted = (0..n)
        .filter(|_| {
            let t = walk_once(learned, len, &mut rng);
            target.accepts_trace(&t).unwrap_or(false)
        })
        .count();
    100.0 * accepted as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn walks_are_accepted() {
        let m = fixtures::figure4();
        let traces = random_walk(&m, &WalkConfig::new(3, 1000, 7).unwrap());
        assert_eq!(traces.len(), 1000);
        for t in &traces {
            assert_eq!(t.len(), 3);
            assert!(t.suffix_marker);
            assert!(m.accepts_trace(t).unwrap());
        }
    }

    #[test]
    fn single_state_walk_is_constant() {
        let m = fixtures::single_state(true);
        let t = &random_walk(&m, &WalkConfig::new(5, 1, 0).unwrap())[0];
        assert!(t.outputs().iter().all(|o| o.get(0)));
    }

    #[test]
    fn zero_length_rejected() {
        assert_eq!(WalkConfig::new(0, 3, 0), Err(WalkError::ZeroLength));
    }

    #[test]
    fn parallel_walks_are_reproducible() {
        let m = fixtures::round_robin_arbiter(3);
        let cfg = WalkConfig::new(20, 101, 3).unwrap();
        let a = random_walk_parallel(&m, &cfg, 4).unwrap();
        let b = random_walk_parallel(&m, &cfg, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 101);
        assert!(a.iter().all(|t| m.accepts_trace(t).unwrap()));
    }

    #[test]
    fn acceptance_of_self_and_stranger() {
        let m = fixtures::figure4();
        assert_eq!(acceptance_percentage(&m, &m, 1000, 20, 5), 100.0);
        let wrong = fixtures::single_state(false);
        assert_eq!(acceptance_percentage(&wrong, &m, 200, 20, 5), 0.0);
    }

    proptest! {
        #[test]
        fn corpus_walks_accepted(idx in 0usize..22, seed in any::<u64>()) {
            let corpus = fixtures::desk_corpus();
            let m = &corpus[idx % corpus.len()].1;
            for t in random_walk(m, &WalkConfig::new(20, 5, seed).unwrap()) {
                prop_assert!(m.accepts_trace(&t).unwrap());
            }
        }
    }
}
