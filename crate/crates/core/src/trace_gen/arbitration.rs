//! Dynamic arbitration: a per-channel grant cap layered on a base arbiter.
//!
//! Channel `i` may be granted at a step only while its cumulative grant count
//! is below `floor(G / n) + k`, where `G` is the total grant count before the
//! step and `n` the number of grant channels. A blocked grant is cleared and
//! not handed to another channel.

use thiserror::Error;

use crate::alphabet::Valuation;
use crate::machine::{MachineError, MooreMachine, Trace, Transducer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArbitrationError {
    #[error("dynamic arbitration needs at least two grant channels, got {0}")]
    TooFewChannels(usize),
    #[error("`{0}` is not an output proposition")]
    UnknownGrant(String),
    #[error("grant proposition `{0}` is listed twice")]
    DuplicateGrant(String),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

/// Running counters of the cap rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrantCap {
    channels: Vec<usize>,
    k: u64,
    counts: Vec<u64>,
    total: u64,
}

impl GrantCap {
    /// `channels` are output bit positions of the grant propositions.
    pub fn new(channels: Vec<usize>, k: u64) -> Result<Self, ArbitrationError> {
        if channels.len() < 2 {
            return Err(ArbitrationError::TooFewChannels(channels.len()));
        }
        let n = channels.len();
        Ok(Self {
            channels,
            k,
            counts: vec![0; n],
            total: 0,
        })
    }

    pub fn cap(&self) -> u64 {
        self.total / self.channels.len() as u64 + self.k
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Filters one step's output and advances the counters.
    pub fn apply(&mut self, base: Valuation) -> Valuation {
        let cap = self.cap();
        let mut out = base;
        for (c, &bit) in self.channels.iter().enumerate() {
            if base.get(bit) {
                if self.counts[c] >= cap {
                    out = out.with(bit, false);
                } else {
                    self.counts[c] += 1;
                    self.total += 1;
                }
            }
        }
        out
    }
}

pub fn grant_channels<S: AsRef<str>>(
    m: &MooreMachine,
    grant_aps: &[S],
) -> Result<Vec<usize>, ArbitrationError> {
    let mut out = Vec::with_capacity(grant_aps.len());
    for g in grant_aps {
        let g = g.as_ref();
        let bit = m
            .alphabet()
            .output_index(g)
            .ok_or_else(|| ArbitrationError::UnknownGrant(g.to_string()))?;
        if out.contains(&bit) {
            return Err(ArbitrationError::DuplicateGrant(g.to_string()));
        }
        out.push(bit);
    }
    Ok(out)
}

/// Rewrites each trace's outputs: the base machine is run on the trace's
/// inputs and its outputs are filtered through a fresh [`GrantCap`].
pub fn dynamic_arbitration_transform<S: AsRef<str>>(
    m: &MooreMachine,
    traces: &[Trace],
    k: u64,
    grant_aps: &[S],
) -> Result<Vec<Trace>, ArbitrationError> {
    let channels = grant_channels(m, grant_aps)?;
    GrantCap::new(channels.clone(), k)?;
    traces
        .iter()
        .map(|t| {
            let inputs = t.inputs();
            let base = m.run(&inputs)?;
            let mut cap = GrantCap::new(channels.clone(), k)?;
            let outputs: Vec<Valuation> = base.into_iter().map(|o| cap.apply(o)).collect();
            let mut out = Trace::from_parts(&inputs, &outputs)?;
            out.suffix_marker = t.suffix_marker;
            Ok(out)
        })
        .collect()
}

/// Checks `count_i <= floor(total / n) + k` after every prefix.
pub fn satisfies_cap(trace: &Trace, channels: &[usize], k: u64) -> bool {
    let n = channels.len() as u64;
    let mut counts = vec![0u64; channels.len()];
    let mut total = 0u64;
    for &(_, o) in trace.steps() {
        for (c, &bit) in channels.iter().enumerate() {
            if o.get(bit) {
                counts[c] += 1;
                total += 1;
            }
        }
        if counts.iter().any(|&c| c > total / n + k) {
            return false;
        }
    }
    true
}
