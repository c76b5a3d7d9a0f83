//! Error classes and their exit codes.

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unparseable inputs, inconsistent alphabets.
    Validation(anyhow::Error),
    /// A learner ran out of its time or query budget.
    Timeout(String),
    /// Training hit a non-finite loss.
    Numerical(String),
    /// Filesystem problems.
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Timeout(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(e) => write!(f, "invalid input: {e:#}"),
            Failure::Timeout(m) => write!(f, "timeout: {m}"),
            Failure::Numerical(m) => write!(f, "numerical abort: {m}"),
            Failure::Io(e) => write!(f, "i/o error: {e:#}"),
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

pub trait Classify<T> {
    fn invalid(self) -> Outcome<T>;
    fn io(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn invalid(self) -> Outcome<T> {
        self.map_err(|e| Failure::Validation(e.into()))
    }

    fn io(self) -> Outcome<T> {
        self.map_err(|e| Failure::Io(e.into()))
    }
}

pub fn invalid<T>(msg: impl fmt::Display) -> Outcome<T> {
    Err(Failure::Validation(anyhow::anyhow!("{msg}")))
}
