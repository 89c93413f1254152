//! Relational symbolic execution for a small imperative language with
//! integer arrays and bounded `for` loops.
//!
//! The crate stacks four semantics on one AST:
//!
//! * FOR — concrete unary execution ([`concrete::unary`]);
//! * RFOR — concrete relational execution over pairs of runs
//!   ([`concrete::relational`]);
//! * SFOR — unary symbolic execution with path constraints ([`symbolic`]);
//! * RSFOR — relational symbolic execution ([`relsym`]).
//!
//! On top of them, [`engine`] implements the collecting semantics, the
//! prove/disprove drivers, invariant-strength checking and counterexample
//! replay. [`baselines`] provides self-composition and product programs so
//! that relational specifications can also be checked with unary symbolic
//! execution.
//!
//! Satisfiability queries go through the [`solver::Solver`] trait; the
//! crate itself performs no I/O and is `no_std` (it needs `alloc`).

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assertion;
pub mod baselines;
pub mod concrete;
pub mod constraint;
pub mod engine;
pub mod error;
pub mod lang;
pub mod relsym;
pub mod solver;
pub mod symbolic;

pub use assertion::{AExp, ArrExp, Assertion, CmpOp};
pub use error::{EvalError, StructError};
pub use lang::{BinOp, Cmd, Expr, Ident, Side, UnOp};
