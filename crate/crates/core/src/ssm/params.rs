//! Linear state-space parameters and the one-step recurrence.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsmError {
    #[error("{what}: expected {expected}, got {actual}")]
    Shape {
        what: &'static str,
        expected: String,
        actual: String,
    },
    #[error("parameter `{0}` has a non-finite entry")]
    NonFinite(&'static str),
    #[error("epsilon must lie in (0, 1), got {0}")]
    Epsilon(f64),
    #[error("input letter {letter} out of range for {letters} letters")]
    Letter { letter: usize, letters: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    Identity,
    #[default]
    Tanh,
}

impl Nonlinearity {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Nonlinearity::Identity => v,
            Nonlinearity::Tanh => v.tanh(),
        }
    }

    /// Derivative expressed through the activation's output.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Nonlinearity::Identity => 1.0,
            Nonlinearity::Tanh => 1.0 - y * y,
        }
    }
}

/// `x_t = φ(A x_{t-1} + B μ_t)`, `y_t = C x_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SsmParams {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub x0: DVector<f64>,
}

fn shape(r: usize, c: usize) -> String {
    format!("{r}x{c}")
}

impl SsmParams {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        x0: DVector<f64>,
    ) -> Result<Self, SsmError> {
        let p = Self { a, b, c, x0 };
        p.validate()?;
        Ok(p)
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn validate(&self) -> Result<(), SsmError> {
        let d = self.a.nrows();
        let checks = [
            ("A", self.a.shape(), (d, d)),
            ("B", (self.b.nrows(), 0), (d, 0)),
            ("C", (0, self.c.ncols()), (0, d)),
            ("x0", self.x0.shape(), (d, 1)),
        ];
        for (what, got, want) in checks {
            if got != want {
                return Err(SsmError::Shape {
                    what,
                    expected: shape(want.0, want.1),
                    actual: shape(got.0, got.1),
                });
            }
        }
        for (name, data) in [
            ("A", self.a.as_slice()),
            ("B", self.b.as_slice()),
            ("C", self.c.as_slice()),
            ("x0", self.x0.as_slice()),
        ] {
            if data.iter().any(|v| !v.is_finite()) {
                return Err(SsmError::NonFinite(name));
            }
        }
        Ok(())
    }

    pub fn readout(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.c * x
    }
}

/// `x ⊗ a`, laid out so that entry `i * a.len() + j` is `x[i] * a[j]`.
pub fn kron_input(x: &DVector<f64>, a: &DVector<f64>) -> DVector<f64> {
    let l = a.len();
    DVector::from_fn(x.len() * l, |k, _| x[k / l] * a[k % l])
}

pub fn one_hot(len: usize, index: usize) -> DVector<f64> {
    let mut v = DVector::zeros(len);
    v[index] = 1.0;
    v
}

/// `φ(A x + B μ)`.
pub fn ssm_step(
    p: &SsmParams,
    x: &DVector<f64>,
    mu: &DVector<f64>,
    nonlinearity: Nonlinearity,
) -> Result<DVector<f64>, SsmError> {
    if x.len() != p.state_dim() {
        return Err(SsmError::Shape {
            what: "state",
            expected: p.state_dim().to_string(),
            actual: x.len().to_string(),
        });
    }
    if mu.len() != p.input_dim() {
        return Err(SsmError::Shape {
            what: "input",
            expected: p.input_dim().to_string(),
            actual: mu.len().to_string(),
        });
    }
    let mut pre = &p.a * x;
    pre.gemv(1.0, &p.b, mu, 1.0);
    Ok(pre.map(|v| nonlinearity.apply(v)))
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(v: &DVector<f64>) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}
