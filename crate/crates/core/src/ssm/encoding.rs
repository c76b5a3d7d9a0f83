//! Exact linear encoding of a Moore machine.
//!
//! With the composite input `μ = x ⊗ onehot(letter)`, the state basis of the
//! machine evolves linearly: `A = I` and the column for pair `(i, j)` of `B` is
//! `e_{T(i,j)} - e_i`. Column `k` of `C` is the one-hot of state `k`'s output.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::alphabet::{AlphabetSpec, Valuation};
use crate::machine::{MooreMachine, Transducer};

use super::params::{argmax, kron_input, one_hot, ssm_step, Nonlinearity, SsmError, SsmParams};

/// Index maps between machine symbols and vector coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MooreEncoding {
    pub alphabet: AlphabetSpec,
    /// State id at each basis index.
    pub states: Vec<String>,
}

impl MooreEncoding {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_letters(&self) -> usize {
        self.alphabet.num_input_letters()
    }

    pub fn num_outputs(&self) -> usize {
        self.alphabet.num_output_letters()
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s == id)
    }

    pub fn letter_index(&self, v: Valuation) -> usize {
        v.index()
    }

    /// Column of the `(state, letter)` pair in the composite space.
    pub fn pair_index(&self, state: usize, letter: usize) -> usize {
        state * self.num_letters() + letter
    }

    pub fn output_index(&self, v: Valuation) -> usize {
        v.index()
    }

    pub fn output_valuation(&self, row: usize) -> Valuation {
        self.alphabet.output_letter(row)
    }
}

pub fn encode_moore_as_ssm(m: &MooreMachine) -> (SsmParams, MooreEncoding) {
    let d = m.num_states();
    let l = m.num_letters();
    let q = m.alphabet().num_output_letters();
    let a = DMatrix::identity(d, d);
    let mut b = DMatrix::zeros(d, d * l);
    for i in 0..d {
        for j in 0..l {
            let t = m.successor(i, j);
            let col = i * l + j;
            b[(i, col)] -= 1.0;
            b[(t, col)] += 1.0;
        }
    }
    let mut c = DMatrix::zeros(q, d);
    for k in 0..d {
        c[(m.output(k).index(), k)] = 1.0;
    }
    let x0 = one_hot(d, m.initial());
    let enc = MooreEncoding {
        alphabet: m.alphabet().clone(),
        states: m.states().to_vec(),
    };
    (SsmParams { a, b, c, x0 }, enc)
}

/// Closed-loop run with the identity nonlinearity. Returns decoded outputs
/// and the hidden state after every step.
pub fn simulate_encoded_states(
    p: &SsmParams,
    enc: &MooreEncoding,
    inputs: &[Valuation],
) -> Result<(Vec<Valuation>, Vec<DVector<f64>>), SsmError> {
    let l = enc.num_letters();
    if p.input_dim() != p.state_dim() * l || p.output_dim() != enc.num_outputs() {
        return Err(SsmError::Shape {
            what: "encoding",
            expected: format!(
                "B with {} columns, C with {} rows",
                p.state_dim() * l,
                enc.num_outputs()
            ),
            actual: format!("{} columns, {} rows", p.input_dim(), p.output_dim()),
        });
    }
    let mut x = p.x0.clone();
    let mut outs = Vec::with_capacity(inputs.len());
    let mut states = Vec::with_capacity(inputs.len());
    for v in inputs {
        let j = enc.letter_index(*v);
        if j >= l {
            return Err(SsmError::Letter {
                letter: j,
                letters: l,
            });
        }
        let mu = kron_input(&x, &one_hot(l, j));
        x = ssm_step(p, &x, &mu, Nonlinearity::Identity)?;
        outs.push(enc.output_valuation(argmax(&p.readout(&x))));
        states.push(x.clone());
    }
    Ok((outs, states))
}

pub fn simulate_encoded(
    p: &SsmParams,
    enc: &MooreEncoding,
    inputs: &[Valuation],
) -> Result<Vec<Valuation>, SsmError> {
    simulate_encoded_states(p, enc, inputs).map(|r| r.0)
}
