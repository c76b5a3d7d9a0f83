//! Prefix-closed samples: every input prefix of a trace mapped to the output
//! at its last step.
//!
//! Text layout, one entry per line:
//! `( !c_0 & r_0 ; c_0 & !r_0 ),(!g_0 & g_1 )`.

use std::collections::HashMap;

use thiserror::Error;

use crate::alphabet::{AlphabetSpec, Side, Valuation};
use crate::machine::Trace;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("input prefix of length {len} is assigned conflicting outputs")]
    Conflict { len: usize },
    #[error("sample is not prefix-closed: a prefix of length {len} is missing")]
    NotPrefixClosed { len: usize },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixClosedSample {
    entries: Vec<(Vec<Valuation>, Valuation)>,
    index: HashMap<Vec<Valuation>, usize>,
}

impl PrefixClosedSample {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry, ignoring exact duplicates. Does not check closure.
    pub fn insert(&mut self, inputs: Vec<Valuation>, output: Valuation) -> Result<(), SampleError> {
        match self.index.get(&inputs) {
            Some(&i) if self.entries[i].1 == output => Ok(()),
            Some(_) => Err(SampleError::Conflict { len: inputs.len() }),
            None => {
                self.index.insert(inputs.clone(), self.entries.len());
                self.entries.push((inputs, output));
                Ok(())
            }
        }
    }

    pub fn entries(&self) -> &[(Vec<Valuation>, Valuation)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, inputs: &[Valuation]) -> Option<Valuation> {
        self.index.get(inputs).map(|&i| self.entries[i].1)
    }

    /// Verifies that every nonempty proper prefix of every entry is present.
    pub fn check_prefix_closed(&self) -> Result<(), SampleError> {
        for (inputs, _) in &self.entries {
            for len in 1..inputs.len() {
                if !self.index.contains_key(&inputs[..len]) {
                    return Err(SampleError::NotPrefixClosed { len });
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self, ab: &AlphabetSpec) -> String {
        let mut s = String::new();
        for (inputs, output) in &self.entries {
            let steps: Vec<String> = inputs
                .iter()
                .map(|&v| ab.format_valuation(Side::Input, v, " & "))
                .collect();
            s.push_str(&format!(
                "( {} ),({} )\n",
                steps.join(" ; "),
                ab.format_valuation(Side::Output, *output, " & ")
            ));
        }
        s
    }

    pub fn from_text(text: &str, ab: &AlphabetSpec) -> Result<Self, SampleError> {
        let mut sample = Self::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| SampleError::Syntax {
                line: n + 1,
                msg: msg.to_string(),
            };
            let body = line.strip_prefix('(').ok_or_else(|| err("expected `(`"))?;
            let (ins, rest) = body
                .split_once(')')
                .ok_or_else(|| err("expected `(inputs),(outputs)`"))?;
            let outs = rest
                .trim_start()
                .strip_prefix(',')
                .map(str::trim)
                .and_then(|o| o.strip_prefix('('))
                .and_then(|o| o.strip_suffix(')'))
                .ok_or_else(|| err("expected `,(outputs)`"))?;
            let inputs = ins
                .split(';')
                .map(|step| parse_conjunction(step, ab, Side::Input).map_err(|m| err(&m)))
                .collect::<Result<Vec<_>, _>>()?;
            let output = parse_conjunction(outs, ab, Side::Output).map_err(|m| err(&m))?;
            sample.insert(inputs, output)?;
        }
        sample.check_prefix_closed()?;
        Ok(sample)
    }
}

fn parse_conjunction(text: &str, ab: &AlphabetSpec, side: Side) -> Result<Valuation, String> {
    let names = ab.names(side);
    let mut v = Valuation::zero(names.len());
    let mut seen = vec![false; names.len()];
    for lit in text.split('&') {
        let lit = lit.trim();
        let (name, value) = match lit.strip_prefix('!') {
            Some(rest) => (rest.trim(), false),
            None => (lit, true),
        };
        let k = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| format!("unknown {side} proposition `{name}`"))?;
        if std::mem::replace(&mut seen[k], true) {
            return Err(format!("proposition `{name}` appears twice"));
        }
        v = v.with(k, value);
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(format!("proposition `{}` is missing", names[k]));
    }
    Ok(v)
}

/// Every prefix of every trace, deduplicated, in first-seen order.
pub fn to_prefix_closed(traces: &[Trace]) -> Result<PrefixClosedSample, SampleError> {
    let mut sample = PrefixClosedSample::new();
    for t in traces {
        let mut prefix = Vec::with_capacity(t.len());
        for &(i, o) in t.steps() {
            prefix.push(i);
            sample.insert(prefix.clone(), o)?;
        }
    }
    Ok(sample)
}
