//! Deterministic Moore and Mealy machines over boolean valuations.
//!
//! Traces use the post-transition convention: step `k` pairs the `k`-th input
//! with the output of the state reached after reading it. The initial state's
//! own output is never emitted. Under this convention a Moore machine and the
//! Mealy machine returned by [`MooreMachine::to_mealy`] have identical traces.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabet::{AlphabetError, AlphabetSpec, Valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("machine has no states")]
    NoStates,
    #[error("unknown state index {0}")]
    UnknownState(usize),
    #[error("unknown state `{0}`")]
    UnknownStateName(String),
    #[error("duplicate state name `{0}`")]
    DuplicateState(String),
    #[error("transition table has {actual} entries, expected {expected}")]
    TableSize { expected: usize, actual: usize },
    #[error("transition ({state}, letter {letter}) targets unknown state {target}")]
    DanglingTransition {
        state: usize,
        letter: usize,
        target: usize,
    },
    #[error("trace has {inputs} input steps but {outputs} outputs")]
    Ragged { inputs: usize, outputs: usize },
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
}

/// Common interface of deterministic, total transducers with dense state
/// indices.
pub trait Transducer {
    fn alphabet(&self) -> &AlphabetSpec;
    fn num_states(&self) -> usize;
    fn initial(&self) -> usize;
    /// Successor and emitted output for a letter index. Callers guarantee
    /// `state < num_states()` and `letter < num_input_letters()`.
    fn transition(&self, state: usize, letter: usize) -> (usize, Valuation);
    fn state_name(&self, state: usize) -> &str;

    fn num_letters(&self) -> usize {
        self.alphabet().num_input_letters()
    }

    /// Outputs produced while reading `inputs` from the initial state.
    fn run(&self, inputs: &[Valuation]) -> Result<Vec<Valuation>, MachineError> {
        let width = self.alphabet().input_width();
        let mut state = self.initial();
        inputs
            .iter()
            .map(|a| {
                a.check_width(width)?;
                let (next, out) = self.transition(state, a.index());
                state = next;
                Ok(out)
            })
            .collect()
    }

    /// Same as [`Transducer::run`] on letter indices, without width checks.
    fn run_letters(&self, letters: &[usize]) -> Vec<Valuation> {
        let mut state = self.initial();
        letters
            .iter()
            .map(|&a| {
                let (next, out) = self.transition(state, a);
                state = next;
                out
            })
            .collect()
    }

    /// State reached after reading `letters`.
    fn reach(&self, letters: &[usize]) -> usize {
        letters
            .iter()
            .fold(self.initial(), |s, &a| self.transition(s, a).0)
    }

    /// A finite trace is accepted iff running the machine on its inputs
    /// reproduces its outputs exactly.
    fn accepts_trace(&self, trace: &Trace) -> Result<bool, MachineError> {
        let ab = self.alphabet();
        let mut state = self.initial();
        for &(a, o) in trace.steps() {
            a.check_width(ab.input_width())?;
            o.check_width(ab.output_width())?;
            let (next, out) = self.transition(state, a.index());
            if out != o {
                return Ok(false);
            }
            state = next;
        }
        Ok(true)
    }
}

/// Finite sequence of (input, output) steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trace {
    steps: Vec<(Valuation, Valuation)>,
    /// Whether the serialized form ends in the `cycle{1}` terminator.
    pub suffix_marker: bool,
}

impl Trace {
    pub fn new(steps: Vec<(Valuation, Valuation)>) -> Self {
        Self {
            steps,
            suffix_marker: true,
        }
    }

    pub fn from_parts(inputs: &[Valuation], outputs: &[Valuation]) -> Result<Self, MachineError> {
        if inputs.len() != outputs.len() {
            return Err(MachineError::Ragged {
                inputs: inputs.len(),
                outputs: outputs.len(),
            });
        }
        Ok(Self::new(
            inputs
                .iter()
                .copied()
                .zip(outputs.iter().copied())
                .collect(),
        ))
    }

    pub fn steps(&self) -> &[(Valuation, Valuation)] {
        &self.steps
    }

    pub fn steps_mut(&mut self) -> &mut [(Valuation, Valuation)] {
        &mut self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn inputs(&self) -> Vec<Valuation> {
        self.steps.iter().map(|s| s.0).collect()
    }

    pub fn outputs(&self) -> Vec<Valuation> {
        self.steps.iter().map(|s| s.1).collect()
    }

    pub fn input_letters(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.0.index()).collect()
    }
}

/// Moore machine: the output is a function of the state alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MooreMachine {
    alphabet: AlphabetSpec,
    states: Vec<String>,
    initial: usize,
    /// Row-major `states × letters` successor table.
    transitions: Vec<usize>,
    outputs: Vec<Valuation>,
}

impl MooreMachine {
    pub fn new(
        alphabet: AlphabetSpec,
        states: Vec<String>,
        initial: usize,
        transitions: Vec<usize>,
        outputs: Vec<Valuation>,
    ) -> Result<Self, MachineError> {
        let n = states.len();
        let letters = alphabet.num_input_letters();
        check_states(&states)?;
        if initial >= n {
            return Err(MachineError::UnknownState(initial));
        }
        if transitions.len() != n * letters {
            return Err(MachineError::TableSize {
                expected: n * letters,
                actual: transitions.len(),
            });
        }
        if outputs.len() != n {
            return Err(MachineError::TableSize {
                expected: n,
                actual: outputs.len(),
            });
        }
        for (i, &t) in transitions.iter().enumerate() {
            if t >= n {
                return Err(MachineError::DanglingTransition {
                    state: i / letters,
                    letter: i % letters,
                    target: t,
                });
            }
        }
        for o in &outputs {
            o.check_width(alphabet.output_width())?;
        }
        Ok(Self {
            alphabet,
            states,
            initial,
            transitions,
            outputs,
        })
    }

    /// Builds a machine from a successor function and an output function.
    /// States are named `q0..q{n-1}`.
    pub fn from_fn(
        alphabet: AlphabetSpec,
        num_states: usize,
        initial: usize,
        mut next: impl FnMut(usize, Valuation) -> usize,
        mut output: impl FnMut(usize) -> Valuation,
    ) -> Result<Self, MachineError> {
        let states = (0..num_states).map(|i| format!("q{i}")).collect();
        let mut transitions = Vec::with_capacity(num_states * alphabet.num_input_letters());
        for s in 0..num_states {
            for a in alphabet.input_letters() {
                transitions.push(next(s, a));
            }
        }
        let outputs = (0..num_states).map(&mut output).collect();
        Self::new(alphabet, states, initial, transitions, outputs)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Result<usize, MachineError> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| MachineError::UnknownStateName(name.to_string()))
    }

    pub fn successor(&self, state: usize, letter: usize) -> usize {
        self.transitions[state * self.alphabet.num_input_letters() + letter]
    }

    pub fn output(&self, state: usize) -> Valuation {
        self.outputs[state]
    }

    /// Row-major `states × letters` successor table.
    pub fn transition_table(&self) -> &[usize] {
        &self.transitions
    }

    pub fn outputs(&self) -> &[Valuation] {
        &self.outputs
    }

    /// One transition: returns `T(s, a)` and `G(T(s, a))`.
    pub fn step(&self, state: usize, input: Valuation) -> Result<(usize, Valuation), MachineError> {
        if state >= self.states.len() {
            return Err(MachineError::UnknownState(state));
        }
        input.check_width(self.alphabet.input_width())?;
        let next = self.successor(state, input.index());
        Ok((next, self.outputs[next]))
    }

    pub fn to_mealy(&self) -> MealyMachine {
        let letters = self.alphabet.num_input_letters();
        let outputs = self.transitions.iter().map(|&t| self.outputs[t]).collect();
        debug_assert_eq!(self.transitions.len(), self.states.len() * letters);
        MealyMachine {
            alphabet: self.alphabet.clone(),
            states: self.states.clone(),
            initial: self.initial,
            transitions: self.transitions.clone(),
            outputs,
        }
    }

    /// Minimal Moore machine with the same traces, restricted to reachable
    /// states. The initial state's output is irrelevant to traces, so the
    /// result merges states by future behaviour only.
    pub fn minimize(&self) -> MooreMachine {
        // Trace-equivalent minimisation goes through the Mealy view.
        self.to_mealy().minimize().to_moore()
    }
}

impl Transducer for MooreMachine {
    fn alphabet(&self) -> &AlphabetSpec {
        &self.alphabet
    }
    fn num_states(&self) -> usize {
        self.states.len()
    }
    fn initial(&self) -> usize {
        self.initial
    }
    fn transition(&self, state: usize, letter: usize) -> (usize, Valuation) {
        let next = self.successor(state, letter);
        (next, self.outputs[next])
    }
    fn state_name(&self, state: usize) -> &str {
        &self.states[state]
    }
}

/// Mealy machine: outputs label transitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MealyMachine {
    alphabet: AlphabetSpec,
    states: Vec<String>,
    initial: usize,
    transitions: Vec<usize>,
    outputs: Vec<Valuation>,
}

impl MealyMachine {
    pub fn new(
        alphabet: AlphabetSpec,
        states: Vec<String>,
        initial: usize,
        transitions: Vec<usize>,
        outputs: Vec<Valuation>,
    ) -> Result<Self, MachineError> {
        let n = states.len();
        let letters = alphabet.num_input_letters();
        check_states(&states)?;
        if initial >= n {
            return Err(MachineError::UnknownState(initial));
        }
        for table in [transitions.len(), outputs.len()] {
            if table != n * letters {
                return Err(MachineError::TableSize {
                    expected: n * letters,
                    actual: table,
                });
            }
        }
        for (i, &t) in transitions.iter().enumerate() {
            if t >= n {
                return Err(MachineError::DanglingTransition {
                    state: i / letters,
                    letter: i % letters,
                    target: t,
                });
            }
        }
        for o in &outputs {
            o.check_width(alphabet.output_width())?;
        }
        Ok(Self {
            alphabet,
            states,
            initial,
            transitions,
            outputs,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn transition_table(&self) -> &[usize] {
        &self.transitions
    }

    /// Row-major `states × letters` output table.
    pub fn output_table(&self) -> &[Valuation] {
        &self.outputs
    }

    pub fn step(&self, state: usize, input: Valuation) -> Result<(usize, Valuation), MachineError> {
        if state >= self.states.len() {
            return Err(MachineError::UnknownState(state));
        }
        input.check_width(self.alphabet.input_width())?;
        Ok(self.transition(state, input.index()))
    }

    /// Moore machine over `(state, last output)` pairs.
    ///
    /// The initial Moore state pairs the Mealy initial state with the
    /// all-false valuation. That output is never observable in a trace.
    pub fn to_moore(&self) -> MooreMachine {
        let letters = self.alphabet.num_input_letters();
        let zero = Valuation::zero(self.alphabet.output_width());
        let mut index: HashMap<(usize, Valuation), usize> = HashMap::new();
        let mut pairs = vec![(self.initial, zero)];
        index.insert((self.initial, zero), 0);
        let mut transitions = Vec::new();
        let mut cursor = 0;
        while cursor < pairs.len() {
            let (q, _) = pairs[cursor];
            for a in 0..letters {
                let key = self.transition(q, a);
                let id = *index.entry(key).or_insert_with(|| {
                    pairs.push(key);
                    pairs.len() - 1
                });
                transitions.push(id);
            }
            cursor += 1;
        }
        let states = pairs
            .iter()
            .enumerate()
            .map(|(i, (q, o))| {
                if i == 0 {
                    self.states[*q].clone()
                } else {
                    format!("{}_{}", self.states[*q], o.index())
                }
            })
            .collect::<Vec<_>>();
        let states = dedupe_names(states);
        let outputs = pairs.iter().map(|p| p.1).collect();
        MooreMachine::new(self.alphabet.clone(), states, 0, transitions, outputs)
            .expect("pair construction is total")
    }

    /// Minimal equivalent Mealy machine over the reachable states, by
    /// partition refinement. States are renumbered in breadth-first order.
    pub fn minimize(&self) -> MealyMachine {
        let letters = self.alphabet.num_input_letters();
        let reachable = bfs_order(self);
        // initial partition: identical output rows
        let mut block: HashMap<usize, usize> = HashMap::new();
        {
            let mut sig: HashMap<Vec<Valuation>, usize> = HashMap::new();
            for &s in &reachable {
                let row: Vec<Valuation> = (0..letters).map(|a| self.transition(s, a).1).collect();
                let n = sig.len();
                block.insert(s, *sig.entry(row).or_insert(n));
            }
        }
        loop {
            let mut sig: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let mut next = HashMap::new();
            for &s in &reachable {
                let row: Vec<usize> = (0..letters)
                    .map(|a| block[&self.transition(s, a).0])
                    .collect();
                let n = sig.len();
                next.insert(s, *sig.entry((block[&s], row)).or_insert(n));
            }
            let stable = sig.len()
                == block
                    .values()
                    .collect::<std::collections::HashSet<_>>()
                    .len();
            block = next;
            if stable {
                break;
            }
        }
        // renumber blocks in BFS discovery order
        let mut renumber: HashMap<usize, usize> = HashMap::new();
        let mut reps = Vec::new();
        for &s in &reachable {
            renumber.entry(block[&s]).or_insert_with(|| {
                reps.push(s);
                reps.len() - 1
            });
        }
        let mut transitions = Vec::with_capacity(reps.len() * letters);
        let mut outputs = Vec::with_capacity(reps.len() * letters);
        for &r in &reps {
            for a in 0..letters {
                let (t, o) = self.transition(r, a);
                transitions.push(renumber[&block[&t]]);
                outputs.push(o);
            }
        }
        let states = reps.iter().map(|&r| self.states[r].clone()).collect();
        MealyMachine::new(self.alphabet.clone(), states, 0, transitions, outputs)
            .expect("quotient of a valid machine")
    }
}

impl Transducer for MealyMachine {
    fn alphabet(&self) -> &AlphabetSpec {
        &self.alphabet
    }
    fn num_states(&self) -> usize {
        self.states.len()
    }
    fn initial(&self) -> usize {
        self.initial
    }
    fn transition(&self, state: usize, letter: usize) -> (usize, Valuation) {
        let i = state * self.alphabet.num_input_letters() + letter;
        (self.transitions[i], self.outputs[i])
    }
    fn state_name(&self, state: usize) -> &str {
        &self.states[state]
    }
}

/// Run-equivalence on every input sequence up to `max_len`, by product
/// exploration. Returns a shortest distinguishing sequence if one exists.
pub fn find_difference<M, N>(left: &M, right: &N, max_len: usize) -> Option<Vec<usize>>
where
    M: Transducer + ?Sized,
    N: Transducer + ?Sized,
{
    let letters = left.num_letters();
    let mut seen = std::collections::HashSet::new();
    let mut frontier = vec![((left.initial(), right.initial()), Vec::new())];
    seen.insert((left.initial(), right.initial()));
    for _ in 0..max_len {
        let mut next_frontier = Vec::new();
        for ((p, q), word) in frontier {
            for a in 0..letters {
                let (p2, o1) = left.transition(p, a);
                let (q2, o2) = right.transition(q, a);
                let mut w: Vec<usize> = word.clone();
                w.push(a);
                if o1 != o2 {
                    return Some(w);
                }
                if seen.insert((p2, q2)) {
                    next_frontier.push(((p2, q2), w));
                }
            }
        }
        frontier = next_frontier;
    }
    None
}

fn bfs_order<M: Transducer + ?Sized>(m: &M) -> Vec<usize> {
    let mut seen = vec![false; m.num_states()];
    let mut order = vec![m.initial()];
    seen[m.initial()] = true;
    let mut i = 0;
    while i < order.len() {
        let s = order[i];
        for a in 0..m.num_letters() {
            let (t, _) = m.transition(s, a);
            if !seen[t] {
                seen[t] = true;
                order.push(t);
            }
        }
        i += 1;
    }
    order
}

fn check_states(states: &[String]) -> Result<(), MachineError> {
    if states.is_empty() {
        return Err(MachineError::NoStates);
    }
    let mut seen = std::collections::HashSet::new();
    for s in states {
        if !seen.insert(s.as_str()) {
            return Err(MachineError::DuplicateState(s.clone()));
        }
    }
    Ok(())
}

fn dedupe_names(mut names: Vec<String>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    for name in &mut names {
        let base = name.clone();
        let mut k = 1;
        while !seen.insert(name.clone()) {
            *name = format!("{base}'{k}");
            k += 1;
        }
    }
    names
}
