//! Small hand-built and seeded random machines used by tests, benches and the
//! CLI's `fixture` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{AlphabetSpec, Valuation};
use crate::machine::{MooreMachine, Transducer};

/// Three states `q0|0`, `q1|1`, `q2|0` over one input and one output
/// proposition. Input `0` always leads to `q1`, input `1` always to `q2`.
pub fn figure4() -> MooreMachine {
    let ab = AlphabetSpec::new(["a"], ["o"]).expect("static alphabet");
    MooreMachine::from_fn(
        ab,
        3,
        0,
        |_, a| if a.get(0) { 2 } else { 1 },
        |s| Valuation::from_bools(&[s == 1]).expect("width 1"),
    )
    .expect("static machine")
}

pub fn single_state(output: bool) -> MooreMachine {
    let ab = AlphabetSpec::new(["a"], ["o"]).expect("static alphabet");
    MooreMachine::from_fn(
        ab,
        1,
        0,
        |_, _| 0,
        |_| Valuation::from_bools(&[output]).expect("width 1"),
    )
    .expect("static machine")
}

/// Counts `inc` modulo three, `rst` returns to zero; `z` holds in state zero.
pub fn mod3_counter() -> MooreMachine {
    let ab = AlphabetSpec::new(["inc", "rst"], ["z"]).expect("static alphabet");
    MooreMachine::from_fn(
        ab,
        3,
        0,
        |s, a| {
            if a.get(1) {
                0
            } else if a.get(0) {
                (s + 1) % 3
            } else {
                s
            }
        },
        |s| Valuation::from_bools(&[s == 0]).expect("width 1"),
    )
    .expect("static machine")
}

fn arbiter_alphabet(n: usize) -> AlphabetSpec {
    AlphabetSpec::new(
        (0..n).map(|i| format!("r_{i}")),
        (0..n).map(|i| format!("g_{i}")),
    )
    .expect("generated alphabet")
}

fn one_grant(n: usize, who: Option<usize>) -> Valuation {
    let mut bits = vec![false; n];
    if let Some(i) = who {
        bits[i] = true;
    }
    Valuation::from_bools(&bits).expect("width n")
}

/// Round-robin arbiter over `n` requests. The state records the current
/// grant (or none) together with the round-robin pointer; each step grants
/// the first requester at or after the pointer.
///
/// States `0..n` are `grant_i` (pointer `i+1`), states `n..2n` are `idle_p`.
/// The initial state is `idle_0`.
pub fn round_robin_arbiter(n: usize) -> MooreMachine {
    assert!(n >= 1);
    let pointer = |s: usize| if s < n { (s + 1) % n } else { s - n };
    let mut m = MooreMachine::from_fn(
        arbiter_alphabet(n),
        2 * n,
        n,
        |s, r| {
            let p = pointer(s);
            (0..n)
                .map(|k| (p + k) % n)
                .find(|&j| r.get(j))
                .unwrap_or(n + p)
        },
        |s| one_grant(n, (s < n).then_some(s)),
    )
    .expect("generated machine");
    rename(&mut m, |s| {
        if s < n {
            format!("grant_{s}")
        } else {
            format!("idle_{}", s - n)
        }
    });
    m
}

/// Fixed-priority arbiter: the lowest-indexed requester is granted.
/// State `0` grants nobody, state `i+1` grants `i`.
pub fn priority_arbiter(n: usize) -> MooreMachine {
    assert!(n >= 1);
    let mut m = MooreMachine::from_fn(
        arbiter_alphabet(n),
        n + 1,
        0,
        |_, r| (0..n).find(|&j| r.get(j)).map_or(0, |j| j + 1),
        |s| one_grant(n, s.checked_sub(1)),
    )
    .expect("generated machine");
    rename(&mut m, |s| {
        if s == 0 {
            "idle".to_string()
        } else {
            format!("grant_{}", s - 1)
        }
    });
    m
}

/// Uniformly random total machine with `states` states.
pub fn random_moore(seed: u64, states: usize, input_aps: usize, output_aps: usize) -> MooreMachine {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ab = AlphabetSpec::new(
        (0..input_aps).map(|i| format!("i{i}")),
        (0..output_aps).map(|i| format!("o{i}")),
    )
    .expect("generated alphabet");
    let out_letters = ab.num_output_letters();
    let outputs: Vec<Valuation> = (0..states)
        .map(|_| ab.output_letter(rng.random_range(0..out_letters)))
        .collect();
    MooreMachine::from_fn(
        ab,
        states,
        0,
        |_, _| rng.random_range(0..states),
        |s| outputs[s],
    )
    .expect("generated machine")
}

/// The desk fixture corpus: hand-built machines followed by 15 seeded random
/// machines with at most 10 states and at most 2 propositions per side.
pub fn desk_corpus() -> Vec<(String, MooreMachine)> {
    let mut corpus = vec![
        ("figure4".to_string(), figure4()),
        ("single_state".to_string(), single_state(true)),
        ("mod3_counter".to_string(), mod3_counter()),
        ("round_robin_2".to_string(), round_robin_arbiter(2)),
        ("round_robin_3".to_string(), round_robin_arbiter(3)),
        ("priority_2".to_string(), priority_arbiter(2)),
        ("priority_3".to_string(), priority_arbiter(3)),
    ];
    for i in 0..15u64 {
        let states = 2 + (i as usize * 7) % 9;
        let ins = 1 + (i as usize % 2);
        let outs = 1 + (i as usize / 2 % 2);
        corpus.push((
            format!("random_{i}"),
            random_moore(0x5eed + i, states, ins, outs),
        ));
    }
    corpus
}

fn rename(m: &mut MooreMachine, name: impl Fn(usize) -> String) {
    let states = (0..m.states().len()).map(name).collect();
    *m = MooreMachine::new(
        m.alphabet().clone(),
        states,
        m.initial(),
        m.transition_table().to_vec(),
        m.outputs().to_vec(),
    )
    .expect("renaming keeps validity");
}
