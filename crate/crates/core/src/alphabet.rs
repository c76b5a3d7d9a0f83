//! Atomic propositions and boolean valuations over them.
//!
//! A letter of the input (or output) alphabet is a full truth assignment over
//! the input (or output) atomic propositions. Bit `i` of a [`Valuation`]
//! holds the value of the `i`-th proposition in declaration order, so the
//! unsigned value of the bit vector doubles as the letter's one-hot index.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Widest supported proposition list on either side.
pub const MAX_APS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("{side} proposition list is empty")]
    Empty { side: Side },
    #[error("duplicate {side} proposition `{name}`")]
    Duplicate { side: Side, name: String },
    #[error("proposition `{name}` is declared as both input and output")]
    Shared { name: String },
    #[error("{side} side has {count} propositions, at most {MAX_APS} are supported")]
    TooWide { side: Side, count: usize },
    #[error("invalid proposition name `{0}`")]
    BadName(String),
    #[error("valuation bits {bits:#b} do not fit in width {width}")]
    Overflow { bits: u32, width: usize },
    #[error("expected a valuation of width {expected}, got width {actual}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("serialization order must list every proposition exactly once")]
    BadSerialOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Input,
    Output,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Input => f.write_str("input"),
            Side::Output => f.write_str("output"),
        }
    }
}

/// A truth assignment over one side of an [`AlphabetSpec`].
///
/// Ordering is by unsigned value, which is also the letter index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Valuation {
    bits: u32,
    width: u8,
}

impl Valuation {
    pub fn new(bits: u32, width: usize) -> Result<Self, AlphabetError> {
        if width > MAX_APS || (width < 32 && bits >> width != 0) {
            return Err(AlphabetError::Overflow { bits, width });
        }
        Ok(Self {
            bits,
            width: width as u8,
        })
    }

    /// All-false valuation.
    pub fn zero(width: usize) -> Self {
        Self::new(0, width).expect("width checked by caller")
    }

    pub fn from_bools(values: &[bool]) -> Result<Self, AlphabetError> {
        let bits = values
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &b)| acc | (u32::from(b) << i));
        Self::new(bits, values.len())
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn width(self) -> usize {
        usize::from(self.width)
    }

    /// Position of this letter in the `2^width` one-hot space.
    pub fn index(self) -> usize {
        self.bits as usize
    }

    pub fn get(self, ap: usize) -> bool {
        (self.bits >> ap) & 1 == 1
    }

    #[must_use]
    pub fn with(self, ap: usize, value: bool) -> Self {
        let bits = if value {
            self.bits | (1 << ap)
        } else {
            self.bits & !(1 << ap)
        };
        Self { bits, ..self }
    }

    pub fn to_bools(self) -> Vec<bool> {
        (0..self.width()).map(|i| self.get(i)).collect()
    }

    pub fn count_ones(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn check_width(self, expected: usize) -> Result<(), AlphabetError> {
        if self.width() == expected {
            Ok(())
        } else {
            Err(AlphabetError::WidthMismatch {
                expected,
                actual: self.width(),
            })
        }
    }
}

/// Names of the input and output atomic propositions.
///
/// The declaration order fixes bit positions. `serial_order` only affects how
/// literals are laid out in serialized traces; it is a permutation of all
/// propositions and defaults to inputs followed by outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphabetSpec {
    input_aps: Vec<String>,
    output_aps: Vec<String>,
    serial_order: Vec<(Side, usize)>,
}

impl AlphabetSpec {
    pub fn new<I, O, S, T>(inputs: I, outputs: O) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        O: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let input_aps: Vec<String> = inputs.into_iter().map(Into::into).collect();
        let output_aps: Vec<String> = outputs.into_iter().map(Into::into).collect();
        check_side(Side::Input, &input_aps)?;
        check_side(Side::Output, &output_aps)?;
        let inputs_seen: HashSet<&str> = input_aps.iter().map(String::as_str).collect();
        if let Some(name) = output_aps.iter().find(|n| inputs_seen.contains(n.as_str())) {
            return Err(AlphabetError::Shared { name: name.clone() });
        }
        let serial_order = (0..input_aps.len())
            .map(|i| (Side::Input, i))
            .chain((0..output_aps.len()).map(|i| (Side::Output, i)))
            .collect();
        Ok(Self {
            input_aps,
            output_aps,
            serial_order,
        })
    }

    /// Replace the literal layout used by trace serialization.
    pub fn with_serial_order<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self, AlphabetError> {
        let mut order = Vec::with_capacity(names.len());
        let mut seen = HashSet::new();
        for name in names {
            let r = self
                .lookup(name.as_ref())
                .ok_or(AlphabetError::BadSerialOrder)?;
            if !seen.insert(r) {
                return Err(AlphabetError::BadSerialOrder);
            }
            order.push(r);
        }
        if order.len() != self.input_aps.len() + self.output_aps.len() {
            return Err(AlphabetError::BadSerialOrder);
        }
        self.serial_order = order;
        Ok(self)
    }

    pub fn input_aps(&self) -> &[String] {
        &self.input_aps
    }

    pub fn output_aps(&self) -> &[String] {
        &self.output_aps
    }

    pub fn serial_order(&self) -> &[(Side, usize)] {
        &self.serial_order
    }

    pub fn input_width(&self) -> usize {
        self.input_aps.len()
    }

    pub fn output_width(&self) -> usize {
        self.output_aps.len()
    }

    /// Number of input letters, `2^|input_aps|`.
    pub fn num_input_letters(&self) -> usize {
        1 << self.input_aps.len()
    }

    /// Number of output letters, `2^|output_aps|`.
    pub fn num_output_letters(&self) -> usize {
        1 << self.output_aps.len()
    }

    pub fn input_letter(&self, index: usize) -> Valuation {
        debug_assert!(index < self.num_input_letters());
        Valuation {
            bits: index as u32,
            width: self.input_aps.len() as u8,
        }
    }

    pub fn output_letter(&self, index: usize) -> Valuation {
        debug_assert!(index < self.num_output_letters());
        Valuation {
            bits: index as u32,
            width: self.output_aps.len() as u8,
        }
    }

    pub fn input_letters(&self) -> impl Iterator<Item = Valuation> + '_ {
        (0..self.num_input_letters()).map(|i| self.input_letter(i))
    }

    pub fn lookup(&self, name: &str) -> Option<(Side, usize)> {
        if let Some(i) = self.input_aps.iter().position(|n| n == name) {
            return Some((Side::Input, i));
        }
        self.output_aps
            .iter()
            .position(|n| n == name)
            .map(|i| (Side::Output, i))
    }

    pub fn output_index(&self, name: &str) -> Option<usize> {
        self.output_aps.iter().position(|n| n == name)
    }

    pub fn names(&self, side: Side) -> &[String] {
        match side {
            Side::Input => &self.input_aps,
            Side::Output => &self.output_aps,
        }
    }

    /// Renders a valuation as a `&`-joined conjunction of all literals on
    /// one side, e.g. `g_0&!g_1`.
    pub fn format_valuation(&self, side: Side, v: Valuation, sep: &str) -> String {
        self.names(side)
            .iter()
            .enumerate()
            .map(|(i, n)| literal(n, v.get(i)))
            .collect::<Vec<_>>()
            .join(sep)
    }
}

pub(crate) fn literal(name: &str, value: bool) -> String {
    if value {
        name.to_string()
    } else {
        format!("!{name}")
    }
}

pub(crate) fn is_valid_ap_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    name != "cycle" && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn check_side(side: Side, names: &[String]) -> Result<(), AlphabetError> {
    if names.is_empty() {
        return Err(AlphabetError::Empty { side });
    }
    if names.len() > MAX_APS {
        return Err(AlphabetError::TooWide {
            side,
            count: names.len(),
        });
    }
    let mut seen = HashSet::new();
    for n in names {
        if !is_valid_ap_name(n) {
            return Err(AlphabetError::BadName(n.clone()));
        }
        if !seen.insert(n.as_str()) {
            return Err(AlphabetError::Duplicate {
                side,
                name: n.clone(),
            });
        }
    }
    Ok(())
}
