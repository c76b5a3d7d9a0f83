//! Red-blue RPNI for Mealy machines.
//!
//! The smallest blue node (shortlex) is tried against each red node in order;
//! the first output-consistent fold is committed, otherwise the blue node is
//! promoted. Transitions left undefined afterwards go to the initial state
//! with the all-false output.

use crate::alphabet::{AlphabetSpec, Valuation};
use crate::machine::{MachineError, MealyMachine};
use crate::trace_gen::prefix::PrefixClosedSample;

use super::prefix_tree::{build_prefix_tree, PrefixTree, NONE};

struct Folder {
    letters: usize,
    delta: Vec<u32>,
    out: Vec<Option<Valuation>>,
    undo: Vec<Undo>,
}

enum Undo {
    Delta(usize, u32),
    Out(usize, Option<Valuation>),
}

impl Folder {
    fn from_tree(tree: &PrefixTree) -> Self {
        let letters = tree.letters();
        let children = tree.children_table();
        let outputs = tree.outputs_table();
        let out = children
            .iter()
            .map(|&c| if c == NONE { None } else { outputs[c as usize] })
            .collect();
        Self {
            letters,
            delta: children.to_vec(),
            out,
            undo: Vec::new(),
        }
    }

    fn set_delta(&mut self, slot: usize, v: u32) {
        self.undo.push(Undo::Delta(slot, self.delta[slot]));
        self.delta[slot] = v;
    }

    fn set_out(&mut self, slot: usize, v: Option<Valuation>) {
        self.undo.push(Undo::Out(slot, self.out[slot]));
        self.out[slot] = v;
    }

    fn rollback(&mut self) {
        while let Some(u) = self.undo.pop() {
            match u {
                Undo::Delta(s, v) => self.delta[s] = v,
                Undo::Out(s, v) => self.out[s] = v,
            }
        }
    }

    /// Redirects the edge into `blue` to `red` and folds the subtree.
    fn try_merge(&mut self, red: usize, blue: usize, parent: (usize, usize)) -> bool {
        self.undo.clear();
        self.set_delta(parent.0 * self.letters + parent.1, red as u32);
        let mut stack = vec![(red, blue)];
        while let Some((q, q2)) = stack.pop() {
            if q == q2 {
                continue;
            }
            for a in 0..self.letters {
                let s2 = q2 * self.letters + a;
                let t2 = self.delta[s2];
                if t2 == NONE {
                    continue;
                }
                let s = q * self.letters + a;
                match (self.out[s], self.out[s2]) {
                    (Some(x), Some(y)) if x != y => {
                        self.rollback();
                        return false;
                    }
                    (None, Some(y)) => self.set_out(s, Some(y)),
                    _ => {}
                }
                let t = self.delta[s];
                if t == NONE {
                    self.set_delta(s, t2);
                } else {
                    stack.push((t as usize, t2 as usize));
                }
            }
        }
        self.undo.clear();
        true
    }
}

/// Learns a total machine consistent with every sample entry.
pub fn rpni_learn(
    sample: &PrefixClosedSample,
    alphabet: &AlphabetSpec,
) -> Result<MealyMachine, MachineError> {
    for (word, out) in sample.entries() {
        for v in word {
            v.check_width(alphabet.input_width())?;
        }
        out.check_width(alphabet.output_width())?;
    }
    let letters = alphabet.num_input_letters();
    let tree = build_prefix_tree(sample, letters);
    let mut f = Folder::from_tree(&tree);
    let mut red = vec![0usize];
    let mut is_red = vec![false; tree.len()];
    is_red[0] = true;

    loop {
        let blue = red
            .iter()
            .flat_map(|&r| (0..letters).map(move |a| (r, a)))
            .map(|(r, a)| (f.delta[r * letters + a], r, a))
            .filter(|&(t, _, _)| t != NONE && !is_red[t as usize])
            .min();
        let Some((blue, r, a)) = blue else { break };
        let blue = blue as usize;
        // a blue node has exactly one reachable incoming edge
        let parent = (r, a);
        let merged = red.iter().any(|&r| f.try_merge(r, blue, parent));
        if !merged {
            red.push(blue);
            is_red[blue] = true;
        }
    }

    let index_of = |node: u32| red.iter().position(|&r| r as u32 == node);
    let zero = Valuation::zero(alphabet.output_width());
    let mut transitions = Vec::with_capacity(red.len() * letters);
    let mut outputs = Vec::with_capacity(red.len() * letters);
    for &r in &red {
        for a in 0..letters {
            let s = r * letters + a;
            match f.delta[s] {
                NONE => {
                    transitions.push(0);
                    outputs.push(zero);
                }
                t => {
                    transitions.push(index_of(t).expect("targets of red nodes are red"));
                    outputs.push(f.out[s].unwrap_or(zero));
                }
            }
        }
    }
    let names = (0..red.len()).map(|i| format!("r{i}")).collect();
    MealyMachine::new(alphabet.clone(), names, 0, transitions, outputs)
}
