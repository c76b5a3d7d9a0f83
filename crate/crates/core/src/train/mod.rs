//! Gradient training of the baseline and bilinear recurrences.

pub mod adam;
pub mod checkpoint;
pub mod eval;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod trainer;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{Checkpoint, CheckpointError, MatrixPayload, CHECKPOINT_VERSION};
pub use eval::{
    accuracies, eval_step_accuracy, eval_trace_acceptance, model_acceptance_percentage,
};
pub use loss::{bce_grad, bce_term, bce_with_logits, sigmoid};
pub use metrics::{convergence_epoch, sample_complexity};
pub use model::{examples, Architecture, Example, ForwardCache, Grads, Model, ModelConfig};
pub use trainer::{
    split_train_test, train, train_model, EpochRecord, NumericalAbort, TrainConfig, TrainError,
    TrainOutcome,
};
