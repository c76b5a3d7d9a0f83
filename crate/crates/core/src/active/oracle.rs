//! Membership and equivalence oracles backed by a simulated system.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabet::Valuation;
use crate::machine::{MachineError, Transducer};
use crate::trace_gen::walk::random_letters;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStats {
    pub membership_queries: u64,
    pub equivalence_queries: u64,
    /// Input symbols submitted through membership queries.
    pub total_input_symbols: u64,
    /// Random walks run by the equivalence oracle.
    pub equivalence_walks: u64,
}

impl QueryStats {
    /// Membership queries plus equivalence-oracle walks.
    pub fn sample_size(&self) -> u64 {
        self.membership_queries + self.equivalence_walks
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqOracleConfig {
    pub walks_per_round: usize,
    /// Fixed walk length; `None` uses `2 * hypothesis states + 10`.
    pub walk_length: Option<usize>,
    pub seed: u64,
}

impl Default for EqOracleConfig {
    fn default() -> Self {
        Self {
            walks_per_round: 500,
            walk_length: None,
            seed: 0,
        }
    }
}

impl EqOracleConfig {
    pub fn length_for(&self, hypothesis_states: usize) -> usize {
        self.walk_length.unwrap_or(2 * hypothesis_states + 10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_membership_queries: u64,
    pub wall_clock: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_membership_queries: 1_000_000,
            wall_clock: None,
        }
    }
}

/// The query budget ran out.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("query budget exhausted")]
pub struct Exhausted;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error(transparent)]
    Exhausted(#[from] Exhausted),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// Caching membership oracle over a system under learning.
pub struct Sul<'a, M: Transducer + ?Sized> {
    machine: &'a M,
    cache: HashMap<Vec<usize>, Vec<Valuation>>,
    stats: QueryStats,
    budget: Budget,
    started: Instant,
}

impl<'a, M: Transducer + ?Sized> Sul<'a, M> {
    pub fn new(machine: &'a M, budget: Budget) -> Self {
        Self {
            machine,
            cache: HashMap::new(),
            stats: QueryStats::default(),
            budget,
            started: Instant::now(),
        }
    }

    pub fn machine(&self) -> &M {
        self.machine
    }

    pub fn stats(&self) -> QueryStats {
        self.stats
    }

    pub fn stats_mut(&mut self) -> &mut QueryStats {
        &mut self.stats
    }

    /// Every distinct word answered so far with its outputs.
    pub fn answers(&self) -> impl Iterator<Item = (&Vec<usize>, &Vec<Valuation>)> {
        self.cache.iter()
    }

    pub fn check_budget(&self) -> Result<(), Exhausted> {
        if self.stats.membership_queries >= self.budget.max_membership_queries {
            return Err(Exhausted);
        }
        if self
            .budget
            .wall_clock
            .is_some_and(|d| self.started.elapsed() > d)
        {
            return Err(Exhausted);
        }
        Ok(())
    }

    /// Output sequence for a word of letter indices. Repeated words are
    /// answered from the cache without counting.
    pub fn query_letters(&mut self, word: &[usize]) -> Result<Vec<Valuation>, Exhausted> {
        if let Some(out) = self.cache.get(word) {
            return Ok(out.clone());
        }
        self.check_budget()?;
        let out = self.machine.run_letters(word);
        self.stats.membership_queries += 1;
        self.stats.total_input_symbols += word.len() as u64;
        self.cache.insert(word.to_vec(), out.clone());
        Ok(out)
    }

    pub fn membership_query(&mut self, inputs: &[Valuation]) -> Result<Vec<Valuation>, QueryError> {
        let width = self.machine.alphabet().input_width();
        for v in inputs {
            v.check_width(width).map_err(MachineError::from)?;
        }
        let word: Vec<usize> = inputs.iter().map(|v| v.index()).collect();
        Ok(self.query_letters(&word)?)
    }
}

/// Random-walk equivalence check. Returns the shortest prefix of the first
/// differing walk, so the last output is the first mismatch.
pub fn find_counterexample<M, H>(
    sul: &M,
    hypothesis: &H,
    cfg: &EqOracleConfig,
) -> Option<Vec<usize>>
where
    M: Transducer + ?Sized,
    H: Transducer + ?Sized,
{
    find_counterexample_counted(sul, hypothesis, cfg).0
}

/// As [`find_counterexample`], also returning the number of walks run.
pub fn find_counterexample_counted<M, H>(
    sul: &M,
    hypothesis: &H,
    cfg: &EqOracleConfig,
) -> (Option<Vec<usize>>, u64)
where
    M: Transducer + ?Sized,
    H: Transducer + ?Sized,
{
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let len = cfg.length_for(hypothesis.num_states());
    for walk in 0..cfg.walks_per_round {
        let word = random_letters(&mut rng, sul.num_letters(), len);
        let (mut p, mut q) = (sul.initial(), hypothesis.initial());
        for (i, &a) in word.iter().enumerate() {
            let (p2, o1) = sul.transition(p, a);
            let (q2, o2) = hypothesis.transition(q, a);
            if o1 != o2 {
                return (Some(word[..=i].to_vec()), walk as u64 + 1);
            }
            p = p2;
            q = q2;
        }
    }
    (None, cfg.walks_per_round as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::machine::MealyMachine;

    #[test]
    fn membership_matches_run() {
        let m = fixtures::figure4();
        let mut sul = Sul::new(&m, Budget::default());
        let ab = m.alphabet();
        let out = sul
            .membership_query(&[ab.input_letter(0), ab.input_letter(1)])
            .unwrap();
        let bits: Vec<bool> = out.iter().map(|o| o.get(0)).collect();
        assert_eq!(bits, vec![true, false]);
        assert_eq!(sul.stats().membership_queries, 1);
        assert!(sul.query_letters(&[]).unwrap().is_empty());
        assert_eq!(sul.stats().membership_queries, 2);
        sul.query_letters(&[0, 1]).unwrap();
        assert_eq!(sul.stats().membership_queries, 2, "cached query is free");
    }

    #[test]
    fn budget_exhaustion() {
        let m = fixtures::figure4();
        let budget = Budget {
            max_membership_queries: 1,
            wall_clock: None,
        };
        let mut sul = Sul::new(&m, budget);
        sul.query_letters(&[0]).unwrap();
        assert_eq!(sul.query_letters(&[1]), Err(Exhausted));
    }

    #[test]
    fn counterexamples() {
        let m = fixtures::figure4();
        let cfg = EqOracleConfig::default();
        assert_eq!(find_counterexample(&m, &m.to_mealy(), &cfg), None);
        let zero = MealyMachine::new(
            m.alphabet().clone(),
            vec!["z".into()],
            0,
            vec![0, 0],
            vec![Valuation::zero(1); 2],
        )
        .unwrap();
        let ce = find_counterexample(&m, &zero, &cfg).unwrap();
        assert!(ce.contains(&0));
        assert_ne!(m.run_letters(&ce), zero.run_letters(&ce));
        assert_eq!(find_counterexample(&m, &zero, &cfg), Some(ce));
    }
}
