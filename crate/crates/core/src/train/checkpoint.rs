//! JSON parameter checkpoints.
//!
//! Matrices are stored row-major with explicit shapes. Bilinear checkpoints
//! built from a machine also carry the encoding's index maps.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ssm::{MooreEncoding, SsmParams};

use super::model::{Model, ModelConfig};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("matrix `{name}` declares {rows}x{cols} but holds {len} values")]
    Payload {
        name: String,
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("missing matrix `{0}`")]
    Missing(&'static str),
    #[error("parameters do not match the stored configuration")]
    Shape,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixPayload {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixPayload {
    fn from_matrix(name: &str, m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            data.extend(m.row(r).iter());
        }
        Self {
            name: name.to_string(),
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    fn to_matrix(&self) -> Result<DMatrix<f64>, CheckpointError> {
        if self.rows * self.cols != self.data.len() {
            return Err(CheckpointError::Payload {
                name: self.name.clone(),
                rows: self.rows,
                cols: self.cols,
                len: self.data.len(),
            });
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: ModelConfig,
    pub matrices: Vec<MatrixPayload>,
    pub encoding: Option<MooreEncoding>,
}

const NAMES: [&str; 6] = ["A", "B", "C", "x0", "embed_W", "embed_b"];

impl Checkpoint {
    pub fn from_model(model: &Model, encoding: Option<&MooreEncoding>) -> Self {
        let col = |v: &DVector<f64>| DMatrix::from_column_slice(v.len(), 1, v.as_slice());
        let mats = [
            model.ssm.a.clone(),
            model.ssm.b.clone(),
            model.ssm.c.clone(),
            col(&model.ssm.x0),
            model.embed_w.clone(),
            col(&model.embed_b),
        ];
        Self {
            version: CHECKPOINT_VERSION,
            config: model.config,
            matrices: NAMES
                .iter()
                .zip(&mats)
                .map(|(n, m)| MatrixPayload::from_matrix(n, m))
                .collect(),
            encoding: encoding.cloned(),
        }
    }

    fn matrix(&self, name: &'static str) -> Result<DMatrix<f64>, CheckpointError> {
        self.matrices
            .iter()
            .find(|m| m.name == name)
            .ok_or(CheckpointError::Missing(name))?
            .to_matrix()
    }

    pub fn to_model(&self) -> Result<Model, CheckpointError> {
        if self.version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(self.version));
        }
        let vec = |m: DMatrix<f64>| DVector::from_column_slice(m.as_slice());
        let ssm = SsmParams {
            a: self.matrix("A")?,
            b: self.matrix("B")?,
            c: self.matrix("C")?,
            x0: vec(self.matrix("x0")?),
        };
        let model = Model {
            config: self.config,
            ssm,
            embed_w: self.matrix("embed_W")?,
            embed_b: vec(self.matrix("embed_b")?),
        };
        let reference = Model::random(self.config, 0);
        let shapes = |m: &Model| {
            [
                m.ssm.a.shape(),
                m.ssm.b.shape(),
                m.ssm.c.shape(),
                m.ssm.x0.shape(),
                m.embed_w.shape(),
                m.embed_b.shape(),
            ]
        };
        if shapes(&model) != shapes(&reference) {
            return Err(CheckpointError::Shape);
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, CheckpointError> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::machine::Transducer;
    use crate::ssm::warm_start_init;

    #[test]
    fn baseline_round_trip() {
        let m = fixtures::mod3_counter();
        let model = Model::random(ModelConfig::baseline(m.alphabet()), 3);
        let ck = Checkpoint::from_model(&model, None);
        let back = Checkpoint::from_json(&ck.to_json())
            .unwrap()
            .to_model()
            .unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn bilinear_round_trip_with_encoding() {
        let m = fixtures::round_robin_arbiter(2);
        let p = warm_start_init(&m, 0.1, 2).unwrap();
        let (_, enc) = crate::ssm::encode_moore_as_ssm(&m);
        let model = Model::from_ssm(ModelConfig::bilinear(m.alphabet(), 4), p).unwrap();
        let ck = Checkpoint::from_model(&model, Some(&enc));
        let back = Checkpoint::from_json(&ck.to_json()).unwrap();
        assert_eq!(back.encoding.as_ref(), Some(&enc));
        assert_eq!(back.to_model().unwrap(), model);
    }

    #[test]
    fn row_major_payload() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let p = MatrixPayload::from_matrix("M", &m);
        assert_eq!(p.data, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(p.to_matrix().unwrap(), m);
    }

    #[test]
    fn corrupt_payloads_rejected() {
        let m = fixtures::figure4();
        let model = Model::random(ModelConfig::baseline(m.alphabet()), 0);
        let mut ck = Checkpoint::from_model(&model, None);
        ck.matrices[0].data.pop();
        assert!(matches!(
            ck.to_model(),
            Err(CheckpointError::Payload { .. })
        ));
        let mut ck = Checkpoint::from_model(&model, None);
        ck.version = 9;
        assert!(matches!(ck.to_model(), Err(CheckpointError::Version(9))));
        let mut ck = Checkpoint::from_model(&model, None);
        ck.config.hidden_dim = 5;
        assert!(matches!(ck.to_model(), Err(CheckpointError::Shape)));
    }
}
