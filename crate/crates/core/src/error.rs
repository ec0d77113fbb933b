use alloc::boxed::Box;
use core::fmt;

use crate::flrta::IndexSelection;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by tensor and approximation routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Mode index outside `1..=3`.
    InvalidMode(usize),
    /// A dimension was zero or a value buffer had the wrong length.
    InvalidShape(&'static str),
    /// A constructor received NaN or an infinity at the given flat index.
    NonFinite(usize),
    /// Operand shapes are incompatible.
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    /// A target rank is zero or exceeds the ambient dimension of its mode.
    RankBound { mode: usize, rank: usize, dim: usize },
    /// Columns handed to `Subspace::from_columns` are numerically dependent.
    RankDeficient { rank: usize, cols: usize },
    /// An index set entry is out of range, unsorted or repeated.
    InvalidIndex { mode: usize, index: usize, len: usize },
    /// Every sampled cross selection was singular. Carries the least bad one.
    SingularSelection(Box<IndexSelection>),
    /// An option value is out of its admissible range.
    InvalidOption(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMode(m) => write!(f, "invalid mode {m}, expected 1, 2 or 3"),
            Error::InvalidShape(what) => write!(f, "invalid shape: {what}"),
            Error::NonFinite(at) => write!(f, "non-finite value at flat index {at}"),
            Error::DimensionMismatch { op, expected, found } => {
                write!(f, "{op}: dimension mismatch, expected {expected}, found {found}")
            }
            Error::RankBound { mode, rank, dim } => write!(f, "rank {rank} for mode {mode} must lie in 1..={dim}"),
            Error::RankDeficient { rank, cols } => {
                write!(f, "columns are linearly dependent: numerical rank {rank} < {cols}")
            }
            Error::InvalidIndex { mode, index, len } => write!(
                f,
                "mode {mode} index set entry {index} invalid for length {len} (must be sorted, distinct, in range)"
            ),
            Error::SingularSelection(sel) => write!(
                f,
                "all sampled index selections are singular (best: I={:?} J={:?} K={:?})",
                sel.i_set(),
                sel.j_set(),
                sel.k_set()
            ),
            Error::InvalidOption(what) => write!(f, "invalid option: {what}"),
        }
    }
}

impl core::error::Error for Error {}
