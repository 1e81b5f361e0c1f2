//! Error type shared by all modules.

use std::fmt;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by parameter validation, kernel generation and the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical or discretization parameter is out of range.
    InvalidParameter { name: &'static str, message: String },
    /// An initial profile violates the compact-support requirement.
    UnsupportedProfile(String),
    /// A polynomial root computation did not meet its contract.
    RootFinding(String),
    /// The expected stable/unstable root separation failed.
    RootSeparation(String),
    /// Kernel generation failed (singular recurrence matrix, complex residue, ...).
    KernelGeneration(String),
    /// Kernel sequences are too short for the requested step.
    KernelTooShort { have: usize, need: usize },
    /// Matrix assembly or factorization failed.
    Factorization(String),
    /// The time stepper produced non-finite values.
    Unstable { step: usize, message: String },
    /// A reference-solution computation cannot be carried out as requested.
    Reference(String),
    /// A diagnostic computation received unusable input.
    Diagnostics(String),
    /// Configuration file / CLI input problems.
    Config(String),
    /// I/O wrapper.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, message } => {
                write!(f, "invalid parameter `{name}`: {message}")
            }
            Error::UnsupportedProfile(m) => write!(f, "unsupported initial profile: {m}"),
            Error::RootFinding(m) => write!(f, "root finding failed: {m}"),
            Error::RootSeparation(m) => write!(f, "root separation failed: {m}"),
            Error::KernelGeneration(m) => write!(f, "kernel generation failed: {m}"),
            Error::KernelTooShort { have, need } => {
                write!(f, "kernel sequences too short: have {have}, need {need}; extend kernels first")
            }
            Error::Factorization(m) => write!(f, "factorization failed: {m}"),
            Error::Unstable { step, message } => {
                write!(f, "solver unstable at step {step}: {message}")
            }
            Error::Reference(m) => write!(f, "reference solution: {m}"),
            Error::Diagnostics(m) => write!(f, "diagnostics: {m}"),
            Error::Config(m) => write!(f, "configuration: {m}"),
            Error::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
