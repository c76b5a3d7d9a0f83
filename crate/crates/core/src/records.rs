//! JSON run records and the schemas they conform to.

use serde::{Deserialize, Serialize};

use crate::passive::SweepPoint;
use crate::train::{convergence_epoch, EpochRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Success,
    Failed,
}

/// One active-learning trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveTrialRecord {
    pub tlsf_file: String,
    pub trial: usize,
    pub sample_size: u64,
    pub accuracy: f64,
    pub status: Status,
}

/// One passive-learning sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassiveTrialRecord {
    pub tlsf_file: String,
    pub trial: usize,
    pub trace_length: usize,
    pub results: Vec<SweepPoint>,
    pub final_accuracy: f64,
    pub final_traces: usize,
    pub status: Status,
}

impl PassiveTrialRecord {
    /// Final fields come from the last sweep point; an empty sweep fails.
    pub fn from_sweep(
        tlsf_file: &str,
        trial: usize,
        trace_length: usize,
        results: Vec<SweepPoint>,
    ) -> Self {
        let last = results.last().copied();
        Self {
            tlsf_file: tlsf_file.to_string(),
            trial,
            trace_length,
            final_accuracy: last.map_or(0.0, |p| p.accuracy),
            final_traces: last.map_or(0, |p| p.num_traces),
            status: if last.is_some() {
                Status::Success
            } else {
                Status::Failed
            },
            results,
        }
    }
}

/// One gradient-training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub file: String,
    pub training_samples: usize,
    pub converged_epoch: Option<usize>,
    pub test_trace_acc: f64,
    pub epoch_history: Vec<EpochRecord>,
}

impl TrainingLog {
    pub fn new(
        file: &str,
        training_samples: usize,
        threshold: f64,
        epoch_history: Vec<EpochRecord>,
    ) -> Self {
        Self {
            file: file.to_string(),
            training_samples,
            converged_epoch: convergence_epoch(&epoch_history, threshold),
            test_trace_acc: epoch_history.last().map_or(0.0, |r| r.test_trace_acc),
            epoch_history,
        }
    }
}

/// Trace acceptance of a candidate against a reference machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub candidate: String,
    pub reference: String,
    pub num_traces: usize,
    pub trace_length: usize,
    pub seed: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEntry {
    pub trial: usize,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub status: Status,
}

/// Index of a multi-trial suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub method: String,
    pub machine: String,
    pub seed: u64,
    pub trials: Vec<TrialEntry>,
}

pub const MANIFEST_VERSION: u32 = 1;

/// Schema name and JSON text for every emitted record kind.
pub const SCHEMAS: &[(&str, &str)] = &[
    (
        "active_trial",
        include_str!("../schemas/active_trial.schema.json"),
    ),
    (
        "passive_trial",
        include_str!("../schemas/passive_trial.schema.json"),
    ),
    (
        "training_log",
        include_str!("../schemas/training_log.schema.json"),
    ),
    ("eval", include_str!("../schemas/eval.schema.json")),
    (
        "latent_metrics",
        include_str!("../schemas/latent_metrics.schema.json"),
    ),
    (
        "comparison",
        include_str!("../schemas/comparison.schema.json"),
    ),
    ("manifest", include_str!("../schemas/manifest.schema.json")),
];

pub fn schema(name: &str) -> Option<&'static str> {
    SCHEMAS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Serializes an infinite value as the string `"inf"`.
pub mod finite_or_inf {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(D::Error::custom(format!(
                "expected a number or \"inf\", got {t:?}"
            ))),
        }
    }
}
