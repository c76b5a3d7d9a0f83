//! Observation table for Mealy-machine L*.
//!
//! Rows are indexed by input words (short prefixes and their one-letter
//! extensions), columns by nonempty suffixes. An entry is the output sequence
//! produced while reading the suffix after the prefix.

use std::collections::HashMap;

use crate::alphabet::{AlphabetSpec, Valuation};
use crate::machine::{MachineError, MealyMachine, Transducer};

use super::oracle::{Exhausted, Sul};

pub type Row = Vec<Vec<Valuation>>;

#[derive(Debug, Clone)]
pub struct ObservationTable {
    letters: usize,
    short: Vec<Vec<usize>>,
    suffixes: Vec<Vec<usize>>,
    rows: HashMap<Vec<usize>, Row>,
}

impl ObservationTable {
    /// Short prefixes `{ε}`, suffixes all single letters.
    pub fn new(letters: usize) -> Self {
        Self {
            letters,
            short: vec![Vec::new()],
            suffixes: (0..letters).map(|a| vec![a]).collect(),
            rows: HashMap::new(),
        }
    }

    pub fn prefixes(&self) -> &[Vec<usize>] {
        &self.short
    }

    pub fn suffixes(&self) -> &[Vec<usize>] {
        &self.suffixes
    }

    fn extensions(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.short.iter().flat_map(move |s| {
            (0..self.letters).map(move |a| {
                let mut w = s.clone();
                w.push(a);
                w
            })
        })
    }

    /// Every word currently indexing a row.
    pub fn row_words(&self) -> Vec<Vec<usize>> {
        self.short
            .iter()
            .cloned()
            .chain(self.extensions())
            .collect()
    }

    pub fn row(&self, word: &[usize]) -> Option<&Row> {
        self.rows.get(word)
    }

    /// Fills every missing entry through membership queries.
    pub fn fill<M: Transducer + ?Sized>(&mut self, sul: &mut Sul<'_, M>) -> Result<(), Exhausted> {
        for word in self.row_words() {
            let have = self.rows.get(&word).map_or(0, Vec::len);
            let mut new_entries = Vec::with_capacity(self.suffixes.len() - have);
            for e in &self.suffixes[have..] {
                let mut q = word.clone();
                q.extend_from_slice(e);
                let out = sul.query_letters(&q)?;
                new_entries.push(out[word.len()..].to_vec());
            }
            self.rows.entry(word).or_default().extend(new_entries);
        }
        Ok(())
    }

    /// An extension whose row matches no short-prefix row.
    pub fn find_unclosed(&self) -> Option<Vec<usize>> {
        let known: Vec<&Row> = self.short.iter().map(|s| &self.rows[s]).collect();
        self.extensions().find(|w| !known.contains(&&self.rows[w]))
    }

    /// A new suffix separating two short prefixes with equal rows.
    pub fn find_inconsistency(&self) -> Option<Vec<usize>> {
        for (i, s1) in self.short.iter().enumerate() {
            for s2 in &self.short[i + 1..] {
                if self.rows[s1] != self.rows[s2] {
                    continue;
                }
                for a in 0..self.letters {
                    let (mut w1, mut w2) = (s1.clone(), s2.clone());
                    w1.push(a);
                    w2.push(a);
                    let (r1, r2) = (&self.rows[&w1], &self.rows[&w2]);
                    if let Some(k) = (0..self.suffixes.len()).find(|&k| r1[k] != r2[k]) {
                        let mut e = vec![a];
                        e.extend_from_slice(&self.suffixes[k]);
                        return Some(e);
                    }
                }
            }
        }
        None
    }

    pub fn is_closed(&self) -> bool {
        self.find_unclosed().is_none()
    }

    pub fn is_consistent(&self) -> bool {
        self.find_inconsistency().is_none()
    }

    pub fn add_prefix(&mut self, word: Vec<usize>) {
        if !self.short.contains(&word) {
            self.short.push(word);
        }
    }

    pub fn add_suffix(&mut self, suffix: Vec<usize>) -> bool {
        if suffix.is_empty() || self.suffixes.contains(&suffix) {
            return false;
        }
        self.suffixes.push(suffix);
        true
    }

    /// Adds every nonempty suffix of a counterexample; returns how many were new.
    pub fn add_counterexample(&mut self, ce: &[usize]) -> usize {
        (0..ce.len())
            .filter(|&i| self.add_suffix(ce[i..].to_vec()))
            .count()
    }

    /// Hypothesis from a closed, consistent, filled table. States are the
    /// distinct short-prefix rows in discovery order.
    pub fn hypothesis(&self, alphabet: &AlphabetSpec) -> Result<MealyMachine, MachineError> {
        let mut reps: Vec<&Row> = Vec::new();
        let mut rep_words: Vec<&Vec<usize>> = Vec::new();
        for s in &self.short {
            let r = &self.rows[s];
            if !reps.contains(&r) {
                reps.push(r);
                rep_words.push(s);
            }
        }
        let state_of = |r: &Row| reps.iter().position(|x| *x == r);
        let mut transitions = Vec::with_capacity(reps.len() * self.letters);
        let mut outputs = Vec::with_capacity(reps.len() * self.letters);
        for s in &rep_words {
            for a in 0..self.letters {
                let mut w = (*s).clone();
                w.push(a);
                let target = state_of(&self.rows[&w]).expect("table is closed");
                transitions.push(target);
                // suffix `a` sits at column `a`
                outputs.push(self.rows[*s][a][0]);
            }
        }
        let names = (0..reps.len()).map(|i| format!("s{i}")).collect();
        MealyMachine::new(alphabet.clone(), names, 0, transitions, outputs)
    }
}
