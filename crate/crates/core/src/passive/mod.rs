//! Passive learning of Mealy machines with RPNI.

pub mod prefix_tree;
pub mod rpni;
pub mod sweep;

pub use prefix_tree::{build_prefix_tree, PrefixTree};
pub use rpni::rpni_learn;
pub use sweep::{accuracy_sweep, SweepPoint};

use crate::machine::Transducer;
use crate::trace_gen::prefix::PrefixClosedSample;

/// Every input word of length `1..=depth` with the machine's output after it.
pub fn characteristic_sample<M: Transducer + ?Sized>(m: &M, depth: usize) -> PrefixClosedSample {
    let ab = m.alphabet();
    let mut sample = PrefixClosedSample::new();
    let mut frontier = vec![(Vec::new(), m.initial())];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * m.num_letters());
        for (word, state) in frontier {
            for a in 0..m.num_letters() {
                let (t, out) = m.transition(state, a);
                let mut w: Vec<_> = Vec::with_capacity(word.len() + 1);
                w.extend_from_slice(&word);
                w.push(ab.input_letter(a));
                sample
                    .insert(w.clone(), out)
                    .expect("a deterministic machine yields no conflicts");
                next.push((w, t));
            }
        }
        frontier = next;
    }
    sample
}
