//! State-space parameters, the exact Moore encoding and warm starts.

pub mod encoding;
pub mod params;
pub mod warm_start;

pub use encoding::{encode_moore_as_ssm, simulate_encoded, simulate_encoded_states, MooreEncoding};
pub use params::{argmax, kron_input, one_hot, ssm_step, Nonlinearity, SsmError, SsmParams};
pub use warm_start::warm_start_init;
