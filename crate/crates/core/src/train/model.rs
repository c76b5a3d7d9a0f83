//! The two trainable recurrences and their reverse-mode gradients.
//!
//! Baseline: `μ_t = relu(W u_t + b)`, `x_t = φ(A x_{t-1} + B μ_t)`,
//! logits `C x_t` over output bits, `u_t` the input bits.
//!
//! Bilinear: `x_t = φ(A x_{t-1} + B (x_{t-1} ⊗ e_{a_t}))`, logits `C x_t` over
//! the one-hot output letters. No embedding stage.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::AlphabetSpec;
use crate::machine::Trace;
use crate::ssm::{argmax, Nonlinearity, SsmError, SsmParams};

use super::loss::{bce_term, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    BaselineEmbedded,
    WarmstartBilinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub hidden_dim: usize,
    /// Width of the learned input embedding (baseline only).
    pub embed_dim: usize,
    pub nonlinearity: Nonlinearity,
    pub input_width: usize,
    pub output_width: usize,
}

impl ModelConfig {
    pub fn baseline(ab: &AlphabetSpec) -> Self {
        Self {
            architecture: Architecture::BaselineEmbedded,
            hidden_dim: 32,
            embed_dim: 32,
            nonlinearity: Nonlinearity::Tanh,
            input_width: ab.input_width(),
            output_width: ab.output_width(),
        }
    }

    /// Hidden size equals the number of states of the symbolic source.
    pub fn bilinear(ab: &AlphabetSpec, states: usize) -> Self {
        Self {
            architecture: Architecture::WarmstartBilinear,
            hidden_dim: states,
            embed_dim: 0,
            nonlinearity: Nonlinearity::Tanh,
            input_width: ab.input_width(),
            output_width: ab.output_width(),
        }
    }

    pub fn letters(&self) -> usize {
        1 << self.input_width
    }

    /// Columns of `B`.
    pub fn mu_dim(&self) -> usize {
        match self.architecture {
            Architecture::BaselineEmbedded => self.embed_dim,
            Architecture::WarmstartBilinear => self.hidden_dim * self.letters(),
        }
    }

    /// Rows of `C`: output bits, or output letters for the bilinear model.
    pub fn output_dim(&self) -> usize {
        match self.architecture {
            Architecture::BaselineEmbedded => self.output_width,
            Architecture::WarmstartBilinear => 1 << self.output_width,
        }
    }
}

/// A training sequence as letter indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Example {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl From<&Trace> for Example {
    fn from(t: &Trace) -> Self {
        Self {
            inputs: t.steps().iter().map(|s| s.0.index()).collect(),
            outputs: t.steps().iter().map(|s| s.1.index()).collect(),
        }
    }
}

pub fn examples(traces: &[Trace]) -> Vec<Example> {
    traces.iter().map(Example::from).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub ssm: SsmParams,
    /// `embed_dim × input_width`; empty for the bilinear model.
    pub embed_w: DMatrix<f64>,
    pub embed_b: DVector<f64>,
}

/// Values retained by [`Model::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `states[0]` is `x0`; `states[t]` follows input `t`.
    pub states: Vec<DVector<f64>>,
    pub logits: Vec<DVector<f64>>,
    embed_pre: Vec<DVector<f64>>,
    embed_act: Vec<DVector<f64>>,
}

/// Gradients with the same layout as the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub x0: DVector<f64>,
    pub embed_w: DMatrix<f64>,
    pub embed_b: DVector<f64>,
}

impl Grads {
    pub fn zeros_like(m: &Model) -> Self {
        Self {
            a: DMatrix::zeros(m.ssm.a.nrows(), m.ssm.a.ncols()),
            b: DMatrix::zeros(m.ssm.b.nrows(), m.ssm.b.ncols()),
            c: DMatrix::zeros(m.ssm.c.nrows(), m.ssm.c.ncols()),
            x0: DVector::zeros(m.ssm.x0.len()),
            embed_w: DMatrix::zeros(m.embed_w.nrows(), m.embed_w.ncols()),
            embed_b: DVector::zeros(m.embed_b.len()),
        }
    }

    pub fn add_assign(&mut self, other: &Grads) {
        self.a += &other.a;
        self.b += &other.b;
        self.c += &other.c;
        self.x0 += &other.x0;
        self.embed_w += &other.embed_w;
        self.embed_b += &other.embed_b;
    }

    pub fn slices(&self) -> [&[f64]; 6] {
        [
            self.a.as_slice(),
            self.b.as_slice(),
            self.c.as_slice(),
            self.x0.as_slice(),
            self.embed_w.as_slice(),
            self.embed_b.as_slice(),
        ]
    }
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize, fan_in: usize) -> DMatrix<f64> {
    let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..=bound))
}

impl Model {
    /// Uniform `±1/sqrt(fan_in)` initialization of every parameter.
    pub fn random(config: ModelConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.hidden_dim;
        let e = if config.architecture == Architecture::BaselineEmbedded {
            config.embed_dim
        } else {
            0
        };
        let a = uniform(&mut rng, d, d, d);
        let b = uniform(&mut rng, d, config.mu_dim(), config.mu_dim());
        let c = uniform(&mut rng, config.output_dim(), d, d);
        let x0 = uniform(&mut rng, d, 1, d).column(0).into_owned();
        let embed_w = uniform(&mut rng, e, config.input_width, config.input_width);
        let embed_b = uniform(&mut rng, e, 1, config.input_width)
            .column(0)
            .into_owned();
        Self {
            config,
            ssm: SsmParams { a, b, c, x0 },
            embed_w,
            embed_b,
        }
    }

    /// Bilinear model with the given recurrence parameters.
    pub fn from_ssm(config: ModelConfig, ssm: SsmParams) -> Result<Self, SsmError> {
        ssm.validate()?;
        let want = (config.hidden_dim, config.mu_dim(), config.output_dim());
        let got = (ssm.state_dim(), ssm.input_dim(), ssm.output_dim());
        if config.architecture != Architecture::WarmstartBilinear || want != got {
            return Err(SsmError::Shape {
                what: "bilinear parameters",
                expected: format!("{want:?}"),
                actual: format!("{got:?}"),
            });
        }
        Ok(Self {
            config,
            ssm,
            embed_w: DMatrix::zeros(0, config.input_width),
            embed_b: DVector::zeros(0),
        })
    }

    pub fn with_nonlinearity(mut self, nl: Nonlinearity) -> Self {
        self.config.nonlinearity = nl;
        self
    }

    pub fn param_slices_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.ssm.a.as_mut_slice(),
            self.ssm.b.as_mut_slice(),
            self.ssm.c.as_mut_slice(),
            self.ssm.x0.as_mut_slice(),
            self.embed_w.as_mut_slice(),
            self.embed_b.as_mut_slice(),
        ]
    }

    pub fn num_params(&self) -> usize {
        self.ssm.a.len()
            + self.ssm.b.len()
            + self.ssm.c.len()
            + self.ssm.x0.len()
            + self.embed_w.len()
            + self.embed_b.len()
    }

    fn input_bits(&self, letter: usize) -> DVector<f64> {
        DVector::from_fn(self.config.input_width, |k, _| ((letter >> k) & 1) as f64)
    }

    /// Training target for one output letter.
    pub fn target(&self, letter: usize) -> DVector<f64> {
        match self.config.architecture {
            Architecture::BaselineEmbedded => {
                DVector::from_fn(self.config.output_width, |k, _| ((letter >> k) & 1) as f64)
            }
            Architecture::WarmstartBilinear => {
                let mut v = DVector::zeros(self.config.output_dim());
                v[letter] = 1.0;
                v
            }
        }
    }

    /// Output letter predicted by one logit vector.
    pub fn decode(&self, logits: &DVector<f64>) -> usize {
        match self.config.architecture {
            Architecture::BaselineEmbedded => logits
                .iter()
                .enumerate()
                .fold(0, |acc, (k, &z)| acc | (usize::from(z > 0.0) << k)),
            Architecture::WarmstartBilinear => argmax(logits),
        }
    }

    pub fn forward(&self, inputs: &[usize]) -> ForwardCache {
        let p = &self.ssm;
        let nl = self.config.nonlinearity;
        let l = self.config.letters();
        let mut states = Vec::with_capacity(inputs.len() + 1);
        let mut logits = Vec::with_capacity(inputs.len());
        let mut embed_pre = Vec::new();
        let mut embed_act = Vec::new();
        states.push(p.x0.clone());
        for &j in inputs {
            let x = states.last().expect("x0 pushed");
            let mut pre = &p.a * x;
            match self.config.architecture {
                Architecture::BaselineEmbedded => {
                    let mut h = self.embed_b.clone();
                    h.gemv(1.0, &self.embed_w, &self.input_bits(j), 1.0);
                    let m = h.map(|v| v.max(0.0));
                    pre.gemv(1.0, &p.b, &m, 1.0);
                    embed_pre.push(h);
                    embed_act.push(m);
                }
                Architecture::WarmstartBilinear => {
                    for i in 0..x.len() {
                        pre.axpy(x[i], &p.b.column(i * l + j), 1.0);
                    }
                }
            }
            let x_new = pre.map(|v| nl.apply(v));
            logits.push(&p.c * &x_new);
            states.push(x_new);
        }
        ForwardCache {
            states,
            logits,
            embed_pre,
            embed_act,
        }
    }

    pub fn predict(&self, inputs: &[usize]) -> Vec<usize> {
        self.forward(inputs)
            .logits
            .iter()
            .map(|z| self.decode(z))
            .collect()
    }

    /// Accumulates `scale * d(sum of BCE terms)/d(params)` into `grads` and
    /// returns the unscaled sum of BCE terms.
    pub fn accumulate_gradients(
        &self,
        cache: &ForwardCache,
        ex: &Example,
        scale: f64,
        grads: &mut Grads,
    ) -> f64 {
        let p = &self.ssm;
        let nl = self.config.nonlinearity;
        let l = self.config.letters();
        let d = self.config.hidden_dim;
        let steps = ex.inputs.len();
        let mut loss = 0.0;
        let mut carry = DVector::zeros(d);
        for t in (0..steps).rev() {
            let z = &cache.logits[t];
            let y = self.target(ex.outputs[t]);
            let mut dz = DVector::zeros(z.len());
            for k in 0..z.len() {
                loss += bce_term(z[k], y[k]);
                dz[k] = scale * (sigmoid(z[k]) - y[k]);
            }
            let x_t = &cache.states[t + 1];
            let x_prev = &cache.states[t];
            grads.c.ger(1.0, &dz, x_t, 1.0);
            // dL/dx_t
            let mut dx = carry;
            dx.gemv_tr(1.0, &p.c, &dz, 1.0);
            let dpre = dx.zip_map(x_t, |g, xv| g * nl.derivative_from_output(xv));
            grads.a.ger(1.0, &dpre, x_prev, 1.0);
            let mut next_carry = DVector::zeros(d);
            next_carry.gemv_tr(1.0, &p.a, &dpre, 0.0);
            match self.config.architecture {
                Architecture::BaselineEmbedded => {
                    let m = &cache.embed_act[t];
                    grads.b.ger(1.0, &dpre, m, 1.0);
                    let mut dm = DVector::zeros(m.len());
                    dm.gemv_tr(1.0, &p.b, &dpre, 0.0);
                    let h = &cache.embed_pre[t];
                    let dh = dm.zip_map(h, |g, hv| if hv > 0.0 { g } else { 0.0 });
                    grads
                        .embed_w
                        .ger(1.0, &dh, &self.input_bits(ex.inputs[t]), 1.0);
                    grads.embed_b += &dh;
                }
                Architecture::WarmstartBilinear => {
                    let j = ex.inputs[t];
                    for i in 0..d {
                        let col = i * l + j;
                        grads.b.column_mut(col).axpy(x_prev[i], &dpre, 1.0);
                        next_carry[i] += p.b.column(col).dot(&dpre);
                    }
                }
            }
            carry = next_carry;
        }
        grads.x0 += &carry;
        loss
    }

    /// Mean BCE of one example and its gradient.
    pub fn backward(&self, cache: &ForwardCache, ex: &Example) -> (f64, Grads) {
        let n = (ex.inputs.len() * self.config.output_dim()).max(1) as f64;
        let mut g = Grads::zeros_like(self);
        let loss = self.accumulate_gradients(cache, ex, 1.0 / n, &mut g);
        (loss / n, g)
    }

    /// Mean BCE over a set of examples.
    pub fn mean_loss(&self, set: &[Example]) -> f64 {
        let mut total = 0.0;
        let mut count = 0usize;
        for ex in set {
            let cache = self.forward(&ex.inputs);
            for (t, z) in cache.logits.iter().enumerate() {
                let y = self.target(ex.outputs[t]);
                for k in 0..z.len() {
                    total += bce_term(z[k], y[k]);
                }
                count += z.len();
            }
        }
        if count == 0 {
            0.0
        } else {
            total / count as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::machine::Transducer;
    use crate::ssm::{encode_moore_as_ssm, warm_start_init};
    use crate::trace_gen::walk::{random_walk, WalkConfig};

    fn small_baseline(ab: &AlphabetSpec) -> ModelConfig {
        ModelConfig {
            hidden_dim: 4,
            embed_dim: 3,
            ..ModelConfig::baseline(ab)
        }
    }

    #[test]
    fn exact_bilinear_reproduces_machine() {
        let m = fixtures::round_robin_arbiter(2);
        let (p, _) = encode_moore_as_ssm(&m);
        let model = Model::from_ssm(ModelConfig::bilinear(m.alphabet(), m.num_states()), p)
            .unwrap()
            .with_nonlinearity(Nonlinearity::Identity);
        for t in random_walk(&m, &WalkConfig::new(20, 50, 2).unwrap()) {
            let ex = Example::from(&t);
            assert_eq!(model.predict(&ex.inputs), ex.outputs);
        }
    }

    #[test]
    fn empty_sequence() {
        let m = fixtures::figure4();
        let model = Model::random(ModelConfig::baseline(m.alphabet()), 0);
        assert!(model.forward(&[]).logits.is_empty());
        let (loss, g) = model.backward(
            &model.forward(&[]),
            &Example {
                inputs: vec![],
                outputs: vec![],
            },
        );
        assert_eq!(loss, 0.0);
        assert!(g.slices().iter().all(|s| s.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn forward_is_deterministic() {
        let m = fixtures::mod3_counter();
        let a = Model::random(ModelConfig::baseline(m.alphabet()), 9);
        let b = Model::random(ModelConfig::baseline(m.alphabet()), 9);
        let inputs = [0, 1, 2, 3, 1, 1];
        let za = a.forward(&inputs).logits;
        let zb = b.forward(&inputs).logits;
        for (x, y) in za.iter().zip(&zb) {
            assert!(x
                .iter()
                .zip(y.iter())
                .all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    fn finite_difference_check(model: &Model, ex: &Example) {
        let (_, g) = model.backward(&model.forward(&ex.inputs), ex);
        let h = 1e-5;
        let grads: Vec<Vec<f64>> = g.slices().iter().map(|s| s.to_vec()).collect();
        let mut probe = model.clone();
        for (pi, grad) in grads.iter().enumerate() {
            for (k, &gk) in grad.iter().enumerate() {
                let orig = probe.param_slices_mut()[pi][k];
                probe.param_slices_mut()[pi][k] = orig + h;
                let up = probe.mean_loss(std::slice::from_ref(ex));
                probe.param_slices_mut()[pi][k] = orig - h;
                let down = probe.mean_loss(std::slice::from_ref(ex));
                probe.param_slices_mut()[pi][k] = orig;
                let fd = (up - down) / (2.0 * h);
                let err = (fd - gk).abs() / fd.abs().max(gk.abs()).max(1e-3);
                assert!(
                    err < 1e-4,
                    "param {pi}[{k}]: analytic {} vs fd {fd}",
                    grad[k]
                );
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = fixtures::mod3_counter();
        let ex = Example::from(&random_walk(&m, &WalkConfig::new(6, 1, 3).unwrap())[0]);
        finite_difference_check(&Model::random(small_baseline(m.alphabet()), 1), &ex);
        let warm = warm_start_init(&m, 0.1, 2).unwrap();
        let bil = Model::from_ssm(ModelConfig::bilinear(m.alphabet(), 3), warm).unwrap();
        finite_difference_check(&bil, &ex);
        finite_difference_check(
            &Model::random(ModelConfig::bilinear(m.alphabet(), 3), 5),
            &ex,
        );
    }

    #[test]
    fn unread_letters_get_zero_gradient() {
        // columns of B for letters absent from the input never affect the loss
        let m = fixtures::mod3_counter();
        let model = Model::random(ModelConfig::bilinear(m.alphabet(), 3), 5);
        let ex = Example {
            inputs: vec![0, 0, 0],
            outputs: vec![0, 0, 0],
        };
        let (_, g) = model.backward(&model.forward(&ex.inputs), &ex);
        for i in 0..3 {
            for j in 1..4 {
                assert!(g.b.column(i * 4 + j).iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn gradient_scales_linearly() {
        let m = fixtures::mod3_counter();
        let model = Model::random(small_baseline(m.alphabet()), 4);
        let ex = Example::from(&random_walk(&m, &WalkConfig::new(5, 1, 0).unwrap())[0]);
        let cache = model.forward(&ex.inputs);
        let mut g1 = Grads::zeros_like(&model);
        let mut g2 = Grads::zeros_like(&model);
        model.accumulate_gradients(&cache, &ex, 1.0, &mut g1);
        model.accumulate_gradients(&cache, &ex, 2.0, &mut g2);
        for (x, y) in g1.slices().iter().zip(g2.slices().iter()) {
            for (a, b) in x.iter().zip(y.iter()) {
                assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}
