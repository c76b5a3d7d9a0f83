//! Spot-style finite traces: `a&!b&g;!a&b&!g;cycle{1}`.

use thiserror::Error;

use crate::alphabet::{literal, AlphabetSpec, Side, Valuation};
use crate::machine::Trace;

pub const CYCLE: &str = "cycle{1}";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpotError {
    #[error("trace does not end in `{CYCLE}`")]
    MissingCycle,
    #[error("step {step}: unknown proposition `{name}`")]
    UnknownLiteral { step: usize, name: String },
    #[error("step {step}: proposition `{name}` is missing")]
    MissingLiteral { step: usize, name: String },
    #[error("step {step}: proposition `{name}` appears twice")]
    DuplicateLiteral { step: usize, name: String },
    #[error("step {step}: empty literal")]
    EmptyLiteral { step: usize },
}

/// Serializes one trace. Literals are laid out in the alphabet's serial order.
/// Traces without the suffix marker omit the terminator.
pub fn serialize_spot(t: &Trace, ab: &AlphabetSpec) -> String {
    let mut parts: Vec<String> = t
        .steps()
        .iter()
        .map(|&(i, o)| {
            ab.serial_order()
                .iter()
                .map(|&(side, k)| {
                    let v = if side == Side::Input { i } else { o };
                    literal(&ab.names(side)[k], v.get(k))
                })
                .collect::<Vec<_>>()
                .join("&")
        })
        .collect();
    if t.suffix_marker {
        parts.push(CYCLE.to_string());
    }
    parts.join(";")
}

/// Parses a trace terminated by `cycle{1}`. Whitespace and literal order are
/// free; every declared proposition must appear exactly once per step.
pub fn parse_spot(s: &str, ab: &AlphabetSpec) -> Result<Trace, SpotError> {
    let mut parts: Vec<&str> = s.split(';').map(str::trim).collect();
    if parts.last() != Some(&CYCLE) {
        return Err(SpotError::MissingCycle);
    }
    parts.pop();
    let mut steps = Vec::with_capacity(parts.len());
    for (step, part) in parts.iter().enumerate() {
        let mut seen = vec![[false; 2]; ab.input_width().max(ab.output_width())];
        let mut input = Valuation::zero(ab.input_width());
        let mut output = Valuation::zero(ab.output_width());
        for lit in part.split('&') {
            let lit = lit.trim();
            let (name, value) = match lit.strip_prefix('!') {
                Some(rest) => (rest.trim(), false),
                None => (lit, true),
            };
            if name.is_empty() {
                return Err(SpotError::EmptyLiteral { step });
            }
            let (side, k) = ab.lookup(name).ok_or_else(|| SpotError::UnknownLiteral {
                step,
                name: name.to_string(),
            })?;
            let slot = &mut seen[k][usize::from(side == Side::Output)];
            if *slot {
                return Err(SpotError::DuplicateLiteral {
                    step,
                    name: name.to_string(),
                });
            }
            *slot = true;
            match side {
                Side::Input => input = input.with(k, value),
                Side::Output => output = output.with(k, value),
            }
        }
        for &(side, k) in ab.serial_order() {
            if !seen[k][usize::from(side == Side::Output)] {
                return Err(SpotError::MissingLiteral {
                    step,
                    name: ab.names(side)[k].clone(),
                });
            }
        }
        steps.push((input, output));
    }
    Ok(Trace::new(steps))
}

/// One trace per line; blank lines and `#` comments are skipped.
pub fn parse_spot_lines(text: &str, ab: &AlphabetSpec) -> Result<Vec<Trace>, (usize, SpotError)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| parse_spot(l, ab).map_err(|e| (n + 1, e)))
        .collect()
}
