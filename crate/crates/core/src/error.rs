//! Error types shared by the interpreters and executors.

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::lang::{Ident, Side};

/// Violations of the structural invariants of relational objects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructError {
    /// Two memories to be merged bind different identifiers.
    DomainMismatch,
    /// An array has different lengths in the two runs.
    LengthMismatch(Ident),
    /// A pair occurs inside a pair.
    NestedPair,
}

impl fmt::Display for StructError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructError::DomainMismatch => f.write_str("memories have different domains"),
            StructError::LengthMismatch(a) => {
                write!(f, "array `{a}` has different lengths in the two runs")
            }
            StructError::NestedPair => f.write_str("nested pair"),
        }
    }
}

/// Failures of expression evaluation and command execution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    Unbound(Ident),
    NotAnArray(Ident),
    NotAScalar(Ident),
    OutOfBounds { array: Ident, index: i64, len: usize },
    Overflow,
    /// The interpreter ran out of fuel (FOR programs always terminate, so
    /// this indicates a bug or an unreasonably large input).
    OutOfFuel,
    /// A plain `for` loop whose bounds are not concrete.
    SymbolicBound,
    /// A loop whose bound expressions mention variables the body updates.
    BoundUpdated(Ident),
    /// A symbolic value where the concrete semantics needs an integer.
    Symbolic,
    /// A pair where the unary semantics needs a single value.
    UnexpectedPair,
    /// An indexed identifier or other relational construct in a unary
    /// context.
    Relational(String),
    Struct(StructError),
    /// An error raised while executing one side of a relational command.
    OnSide(Side, Box<EvalError>),
}

impl From<StructError> for EvalError {
    fn from(e: StructError) -> Self {
        EvalError::Struct(e)
    }
}

impl EvalError {
    pub fn on_side(self, side: Side) -> EvalError {
        match self {
            e @ EvalError::OnSide(..) => e,
            e => EvalError::OnSide(side, Box::new(e)),
        }
    }
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Unbound(x) => write!(f, "unbound identifier `{x}`"),
            EvalError::NotAnArray(x) => write!(f, "`{x}` is not an array"),
            EvalError::NotAScalar(x) => write!(f, "`{x}` is an array, not a scalar"),
            EvalError::OutOfBounds { array, index, len } => {
                write!(f, "index {index} out of bounds for `{array}` of length {len}")
            }
            EvalError::Overflow => f.write_str("integer overflow"),
            EvalError::OutOfFuel => f.write_str("interpreter ran out of fuel"),
            EvalError::SymbolicBound => {
                f.write_str("loop bound is symbolic; annotate with inv")
            }
            EvalError::BoundUpdated(x) => {
                write!(f, "loop bound depends on `{x}`, which the loop body updates")
            }
            EvalError::Symbolic => f.write_str("symbolic value in concrete context"),
            EvalError::UnexpectedPair => f.write_str("pair value in unary context"),
            EvalError::Relational(what) => write!(f, "relational construct in unary context: {what}"),
            EvalError::Struct(e) => write!(f, "{e}"),
            EvalError::OnSide(side, e) => write!(f, "run {}: {e}", side.index()),
        }
    }
}
