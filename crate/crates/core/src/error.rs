//! Crate-wide error type.
//!
//! The numeric kernels treat violated *mathematical* contracts (a Hermite
//! index below `-1`, mismatched jet dimensions, …) as programming errors and
//! panic; the variants here cover conditions that arrive with runtime data:
//! parameter domains, grid geometry and ensemble sizes.

use core::fmt;

/// Errors reported by the field, excursion and geometry kernels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter violated its documented domain (message names the offender).
    InvalidParameter(&'static str),
    /// Grid shapes or spacings of related fields disagree.
    ShapeMismatch,
    /// The requested grid cannot hold the padded convolution kernel.
    GridTooSmall,
    /// An ensemble aggregate needs at least two realizations.
    EnsembleTooSmall,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::ShapeMismatch => write!(f, "field grids have mismatched shape or spacing"),
            Error::GridTooSmall => {
                write!(f, "grid too small for the padded convolution kernel")
            }
            Error::EnsembleTooSmall => {
                write!(f, "ensemble statistics need at least two realizations")
            }
        }
    }
}

impl core::error::Error for Error {}

/// Shorthand for results carrying [`Error`].
pub type Result<T> = core::result::Result<T, Error>;
