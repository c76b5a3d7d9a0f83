//! Minibatch BPTT training with Adam.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ssm::{SsmError, SsmParams};

use super::adam::{Adam, AdamConfig};
use super::eval::accuracies;
use super::model::{Architecture, Example, Grads, Model, ModelConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("learning rate must be positive, got {0}")]
    LearningRate(f64),
    #[error("convergence threshold must lie in (0, 1], got {0}")]
    Threshold(f64),
    #[error("batch size and evaluation cadence must be positive")]
    ZeroSize,
    #[error("an initial parameter set is only accepted by the bilinear architecture")]
    InitialForBaseline,
    #[error(transparent)]
    Ssm(#[from] SsmError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub adam: AdamConfig,
    pub max_epochs: usize,
    /// `None` trains full-batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub convergence_threshold: f64,
    /// Record every this many epochs (the last epoch is always recorded).
    pub eval_every: usize,
    /// Stop after the first record whose test trace acceptance reaches this.
    pub stop_at: Option<f64>,
    /// Examples per gradient work unit.
    pub chunk_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            max_epochs: 1000,
            batch_size: None,
            seed: 0,
            convergence_threshold: 0.9,
            eval_every: 100,
            stop_at: None,
            chunk_size: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let lr = self.adam.learning_rate;
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(TrainError::LearningRate(lr));
        }
        let th = self.convergence_threshold;
        if !(th > 0.0 && th <= 1.0) {
            return Err(TrainError::Threshold(th));
        }
        if self.batch_size == Some(0) || self.eval_every == 0 || self.chunk_size == 0 {
            return Err(TrainError::ZeroSize);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub test_step_acc: f64,
    pub test_trace_acc: f64,
}

/// Why a run stopped before `max_epochs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericalAbort {
    pub epoch: usize,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub history: Vec<EpochRecord>,
    pub abort: Option<NumericalAbort>,
}

/// First 90% for training, the rest for testing.
pub fn split_train_test<T: Clone>(items: &[T]) -> (Vec<T>, Vec<T>) {
    let cut = items.len() - items.len() / 10;
    (items[..cut].to_vec(), items[cut..].to_vec())
}

fn record(model: &Model, epoch: usize, loss: f64, test: &[Example]) -> EpochRecord {
    let (test_step_acc, test_trace_acc) = accuracies(model, test);
    EpochRecord {
        epoch,
        loss,
        test_step_acc,
        test_trace_acc,
    }
}

/// Gradient of the mean BCE over `batch`, plus that mean. Chunks are fixed
/// and summed in order so the result does not depend on thread scheduling.
fn batch_gradient(model: &Model, batch: &[&Example], chunk: usize) -> (f64, Grads) {
    let terms: usize =
        batch.iter().map(|ex| ex.inputs.len()).sum::<usize>() * model.config.output_dim();
    let scale = 1.0 / terms.max(1) as f64;
    let parts: Vec<(f64, Grads)> = batch
        .par_chunks(chunk)
        .map(|ch| {
            let mut g = Grads::zeros_like(model);
            let mut loss = 0.0;
            for ex in ch {
                let cache = model.forward(&ex.inputs);
                loss += model.accumulate_gradients(&cache, ex, scale, &mut g);
            }
            (loss, g)
        })
        .collect();
    let mut parts = parts.into_iter();
    let (mut loss, mut grads) = parts
        .next()
        .unwrap_or_else(|| (0.0, Grads::zeros_like(model)));
    for (l, g) in parts {
        loss += l;
        grads.add_assign(&g);
    }
    (loss * scale, grads)
}

fn all_finite(g: &Grads) -> bool {
    g.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
}

/// Trains from `initial` (bilinear only) or from a seeded random start.
/// Epoch 0 is recorded before any update, with the mean training loss; later
/// records carry the mean minibatch loss of their epoch.
pub fn train(
    train_set: &[Example],
    test_set: &[Example],
    model_cfg: ModelConfig,
    cfg: &TrainConfig,
    initial: Option<SsmParams>,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    let model = match initial {
        Some(p) if model_cfg.architecture == Architecture::WarmstartBilinear => {
            Model::from_ssm(model_cfg, p)?
        }
        Some(_) => return Err(TrainError::InitialForBaseline),
        None => Model::random(model_cfg, cfg.seed),
    };
    Ok(train_model(model, train_set, test_set, cfg))
}

/// Continues training an existing model.
pub fn train_model(
    mut model: Model,
    train_set: &[Example],
    test_set: &[Example],
    cfg: &TrainConfig,
) -> TrainOutcome {
    let shapes: Vec<usize> = Grads::zeros_like(&model)
        .slices()
        .iter()
        .map(|s| s.len())
        .collect();
    let mut adam = Adam::new(cfg.adam, &shapes);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0005_4ee1_5eed);
    let mut order: Vec<&Example> = train_set.iter().collect();
    let batch = cfg.batch_size.unwrap_or(order.len()).max(1);

    let start = record(&model, 0, model.mean_loss(train_set), test_set);
    let mut history = vec![start];
    let stop = |r: &EpochRecord| cfg.stop_at.is_some_and(|s| r.test_trace_acc >= s);
    if !start.loss.is_finite() {
        return TrainOutcome {
            model,
            history,
            abort: Some(NumericalAbort {
                epoch: 0,
                loss: start.loss,
            }),
        };
    }
    if stop(&start) {
        return TrainOutcome {
            model,
            history,
            abort: None,
        };
    }

    for epoch in 1..=cfg.max_epochs {
        if cfg.batch_size.is_some() {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        let mut batches = 0usize;
        for b in order.chunks(batch) {
            let (loss, grads) = batch_gradient(&model, b, cfg.chunk_size);
            if !loss.is_finite() || !all_finite(&grads) {
                return TrainOutcome {
                    model,
                    history,
                    abort: Some(NumericalAbort { epoch, loss }),
                };
            }
            adam.step(&mut model.param_slices_mut(), &grads.slices());
            total += loss;
            batches += 1;
        }
        if epoch % cfg.eval_every == 0 || epoch == cfg.max_epochs {
            let r = record(&model, epoch, total / batches.max(1) as f64, test_set);
            history.push(r);
            if stop(&r) {
                break;
            }
        }
    }
    TrainOutcome {
        model,
        history,
        abort: None,
    }
}
