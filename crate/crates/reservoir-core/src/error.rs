use alloc::string::String;
use core::fmt;

/// Errors reported by this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Model or simulation parameters violate their domain constraints.
    InvalidParams(String),
    /// An argument (evaluation point, index) lies outside its domain.
    Domain(String),
    /// The alpha linear system is singular or too ill-conditioned to trust.
    IllConditioned { condition: f64 },
    /// An optimizer bracket does not contain the sought point.
    Bracket(String),
    /// A quadrature or iteration failed to reach its tolerance.
    Numerical(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::IllConditioned { condition } => {
                write!(f, "alpha system ill-conditioned (estimate {condition:.3e} > 1e12)")
            }
            Error::Bracket(msg) => write!(f, "bracket error: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
