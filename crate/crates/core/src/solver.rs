//! The interface to satisfiability checkers.
//!
//! The core never talks to a solver process itself; the engine is handed a
//! `&mut dyn Solver`. Every query is self-contained: implementations may
//! keep a persistent session but must not let one query's assertions leak
//! into the next.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::constraint::{Formula, Term};

/// Outcome of a satisfiability query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatStatus {
    Sat,
    Unsat,
    /// The solver gave up (timeout, incompleteness); carries its reason.
    Unknown(String),
}

/// Outcome of a validity query `⊨ S ⇒ φ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// `S ∪ {¬φ}` is satisfiable.
    Invalid,
    Unknown(String),
}

/// A failure of the solver itself (crash, protocol error). Fatal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverError(pub String);

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "solver failure: {}", self.0)
    }
}

/// Access to the model of the last satisfiable query.
pub trait Model {
    /// Values of integer terms in the model.
    fn eval(&mut self, terms: &[Term]) -> Result<Vec<i64>, SolverError>;
}

pub trait Solver {
    /// Checks the conjunction of `fs`. On `Sat`, `probe` is called while
    /// the model is available.
    fn check_with(
        &mut self,
        fs: &[Formula],
        probe: &mut dyn FnMut(&mut dyn Model) -> Result<(), SolverError>,
    ) -> Result<SatStatus, SolverError>;

    fn check(&mut self, fs: &[Formula]) -> Result<SatStatus, SolverError> {
        self.check_with(fs, &mut |_| Ok(()))
    }

    /// `⊨ ⋀hyps ⇒ ⋀defs ⇒ goal`, i.e. `hyps ∪ defs ∪ {¬goal}` is unsat.
    fn check_valid(&mut self, hyps: &[Formula], defs: &[Formula], goal: &Formula) -> Result<Validity, SolverError> {
        let mut fs: Vec<Formula> = hyps.to_vec();
        fs.extend(defs.iter().cloned());
        fs.push(Formula::not(goal.clone()));
        Ok(match self.check(&fs)? {
            SatStatus::Unsat => Validity::Valid,
            SatStatus::Sat => Validity::Invalid,
            SatStatus::Unknown(r) => Validity::Unknown(r),
        })
    }
}

/// Counts the queries passed through to another solver.
pub struct Counting<'s> {
    pub inner: &'s mut dyn Solver,
    pub calls: u64,
}

impl<'s> Counting<'s> {
    pub fn new(inner: &'s mut dyn Solver) -> Self {
        Counting { inner, calls: 0 }
    }
}

impl Solver for Counting<'_> {
    fn check_with(
        &mut self,
        fs: &[Formula],
        probe: &mut dyn FnMut(&mut dyn Model) -> Result<(), SolverError>,
    ) -> Result<SatStatus, SolverError> {
        self.calls += 1;
        self.inner.check_with(fs, probe)
    }
}
