//! Prefix tree over letter indices, nodes numbered in shortlex order.

use std::collections::VecDeque;

use crate::alphabet::Valuation;
use crate::trace_gen::prefix::PrefixClosedSample;

pub const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixTree {
    letters: usize,
    /// Row-major `nodes × letters` child table, `NONE` where absent.
    children: Vec<u32>,
    /// Output observed on the edge into each node; the root has none.
    outputs: Vec<Option<Valuation>>,
    parents: Vec<Option<(u32, usize)>>,
}

impl PrefixTree {
    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letters(&self) -> usize {
        self.letters
    }

    pub fn child(&self, node: usize, letter: usize) -> Option<usize> {
        let c = self.children[node * self.letters + letter];
        (c != NONE).then_some(c as usize)
    }

    pub fn output(&self, node: usize) -> Option<Valuation> {
        self.outputs[node]
    }

    /// Parent node and the letter leading here.
    pub fn parent(&self, node: usize) -> Option<(usize, usize)> {
        self.parents[node].map(|(p, a)| (p as usize, a))
    }

    pub fn lookup(&self, word: &[usize]) -> Option<usize> {
        word.iter().try_fold(0, |n, &a| self.child(n, a))
    }

    pub(crate) fn children_table(&self) -> &[u32] {
        &self.children
    }

    pub(crate) fn outputs_table(&self) -> &[Option<Valuation>] {
        &self.outputs
    }
}

/// Builds the tree of every entry and every prefix of an entry. Prefixes
/// absent from the sample carry no output.
pub fn build_prefix_tree(sample: &PrefixClosedSample, letters: usize) -> PrefixTree {
    // insertion-order tree first, then renumber breadth-first
    let mut children: Vec<u32> = vec![NONE; letters];
    let mut outputs: Vec<Option<Valuation>> = vec![None];
    for (word, out) in sample.entries() {
        let mut node = 0usize;
        for &v in word {
            let a = v.index();
            let slot = node * letters + a;
            if children[slot] == NONE {
                children[slot] = outputs.len() as u32;
                outputs.push(None);
                children.extend(std::iter::repeat_n(NONE, letters));
            }
            node = children[slot] as usize;
        }
        if !word.is_empty() {
            outputs[node] = Some(*out);
        }
    }

    let n = outputs.len();
    let mut order = Vec::with_capacity(n);
    let mut rank = vec![NONE; n];
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        rank[u] = order.len() as u32;
        order.push(u);
        for a in 0..letters {
            let c = children[u * letters + a];
            if c != NONE {
                queue.push_back(c as usize);
            }
        }
    }
    let mut tree = PrefixTree {
        letters,
        children: vec![NONE; n * letters],
        outputs: vec![None; n],
        parents: vec![None; n],
    };
    for (new, &old) in order.iter().enumerate() {
        tree.outputs[new] = outputs[old];
        for a in 0..letters {
            let c = children[old * letters + a];
            if c != NONE {
                let nc = rank[c as usize];
                tree.children[new * letters + a] = nc;
                tree.parents[nc as usize] = Some((new as u32, a));
            }
        }
    }
    tree
}
