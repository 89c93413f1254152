//! Witness extraction and concrete replay.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{Engine, EngineError, Triple};
use crate::concrete::assert_eval::{describe, eval_rel_assertion, eval_unary_assertion};
use crate::concrete::relational::run_r;
use crate::concrete::unary::run_u;
use crate::constraint::{Formula, GroundArray, GroundSubstitution, Term};
use crate::error::EvalError;
use crate::lang::{ConcMem, Ident, RelConcMem, Scalar, Sort, Sym};
use crate::solver::{SatStatus, SolverError};
use crate::symbolic::AnyMem;

/// Upper bound on the number of cells materialized per array.
const MAX_CELLS: i64 = 4096;

/// A concrete memory of either level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConcState {
    Unary(ConcMem),
    Rel(RelConcMem),
}

impl fmt::Display for ConcState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcState::Unary(m) => write!(f, "{m}"),
            ConcState::Rel(m) => write!(f, "{m}"),
        }
    }
}

/// The concrete re-execution of a candidate counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub initial: ConcState,
    /// Values of the free logical variables.
    pub lvars: BTreeMap<Ident, i64>,
    /// The precondition on the initial memory.
    pub pre: Result<bool, EvalError>,
    pub outcome: Result<ConcState, EvalError>,
    /// The postcondition on the final memory, if the run finished.
    pub post: Option<Result<bool, EvalError>>,
}

impl Transcript {
    /// The run starts in the precondition, terminates and violates the
    /// postcondition.
    pub fn confirms(&self) -> bool {
        self.pre == Ok(true) && self.outcome.is_ok() && self.post == Some(Ok(false))
    }

    /// The run failed for lack of resources rather than by disagreeing with
    /// the symbolic path.
    pub fn resource_failure(&self) -> bool {
        fn resource(e: &EvalError) -> bool {
            match e {
                EvalError::OutOfFuel | EvalError::Overflow => true,
                EvalError::OnSide(_, inner) => resource(inner),
                _ => false,
            }
        }
        matches!(&self.outcome, Err(e) if resource(e))
    }

    pub fn summary(&self) -> String {
        let outcome = match &self.outcome {
            Ok(m) => format!("final {m}"),
            Err(e) => format!("run failed: {e}"),
        };
        let post = match &self.post {
            Some(r) => describe(r),
            None => String::from("not evaluated"),
        };
        format!("initial {}; precondition {}; {}; postcondition {}", self.initial, describe(&self.pre), outcome, post)
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

fn length_of(len: Scalar, ints: &BTreeMap<Sym, i64>) -> i64 {
    match len {
        Scalar::Int(n) => n,
        Scalar::Sym(s) => ints.get(&s).copied().unwrap_or(0),
    }
}

impl Engine<'_> {
    /// A ground substitution satisfying `fs`, covering every symbol of the
    /// given memories and every rigid symbol. Symbolic lengths of `init`
    /// are first bounded to `1..=lmax`, then to `0..=lmax`; `None` if
    /// neither query is satisfiable.
    pub fn extract(
        &mut self,
        fs: &[Formula],
        init: &AnyMem,
        others: &[&AnyMem],
    ) -> Result<Option<GroundSubstitution>, EngineError> {
        let mut syms: BTreeSet<Sym> = init.symbols();
        let mut arrays = init.array_values();
        for m in others {
            syms.extend(m.symbols());
            arrays.extend(m.array_values());
        }
        for f in fs {
            f.collect_symbols(&mut syms);
        }
        syms.extend(self.rigid.values().copied());
        let ints: Vec<Sym> = syms.iter().copied().filter(|s| s.sort == Sort::Int).collect();
        let lens: Vec<Sym> = init
            .array_values()
            .iter()
            .filter_map(|a| match a.len {
                Scalar::Sym(l) => Some(l),
                Scalar::Int(_) => None,
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let lows: &[i64] = if lens.is_empty() { &[0] } else { &[1, 0] };
        for &low in lows {
            let mut query = fs.to_vec();
            for l in &lens {
                query.push(Formula::le(Term::Int(low), Term::Sym(*l)));
                query.push(Formula::le(Term::Sym(*l), Term::Int(self.config.lmax)));
            }
            let mut sigma = GroundSubstitution::new();
            let mut probe = |model: &mut dyn crate::solver::Model| -> Result<(), SolverError> {
                let terms: Vec<Term> = ints.iter().map(|s| Term::Sym(*s)).collect();
                let vals = model.eval(&terms)?;
                sigma.ints = ints.iter().copied().zip(vals).collect();
                let mut extent: BTreeMap<Sym, i64> = BTreeMap::new();
                for a in &arrays {
                    let n = length_of(a.len, &sigma.ints).clamp(0, MAX_CELLS);
                    let e = extent.entry(a.content).or_insert(0);
                    *e = (*e).max(n);
                }
                let mut cells = Vec::new();
                for (a, n) in &extent {
                    for i in 1..=*n {
                        cells.push(Term::select(Term::Sym(*a), Term::Int(i)));
                    }
                }
                let vals = model.eval(&cells)?;
                let mut it = vals.into_iter();
                for (a, n) in &extent {
                    let v: Vec<i64> = it.by_ref().take(*n as usize).collect();
                    sigma.arrays.insert(*a, GroundArray::from_slice(&v));
                }
                Ok(())
            };
            if self.sat_with(&query, &mut probe)? == SatStatus::Sat {
                return Ok(Some(sigma));
            }
        }
        Ok(None)
    }

    /// Re-executes a triple concretely from `init` grounded by `sigma`.
    pub fn replay(&self, t: &Triple, init: &AnyMem, sigma: &GroundSubstitution) -> Result<Transcript, EngineError> {
        let mismatch = |e: crate::constraint::ground::GroundError| {
            EngineError::ReplayMismatch(format!("cannot ground initial memory: {e}"))
        };
        let mut lvars = BTreeMap::new();
        for lv in t.pre.free_lvars().into_iter().chain(t.post.free_lvars()) {
            let v = self.rigid.get(&lv).and_then(|s| sigma.ints.get(s)).copied().unwrap_or(0);
            lvars.insert(lv, v);
        }
        let fuel = self.config.fuel;
        Ok(match init {
            AnyMem::Unary(m) => {
                let m0 = sigma.apply_mem(m).map_err(mismatch)?;
                let pre = eval_unary_assertion(&m0, &t.pre, &lvars);
                let run = run_u(&m0, &t.body, fuel, t.ghost);
                let post = run.as_ref().ok().map(|m1| eval_unary_assertion(m1, &t.post, &lvars));
                Transcript { initial: ConcState::Unary(m0), lvars, pre, outcome: run.map(ConcState::Unary), post }
            }
            AnyMem::Rel(m) => {
                let m0 = sigma.apply_rel_mem(m).map_err(mismatch)?;
                let pre = eval_rel_assertion(&m0, &t.pre, &lvars);
                let run = run_r(&m0, &t.body, fuel, t.ghost);
                let post = run.as_ref().ok().map(|m1| eval_rel_assertion(m1, &t.post, &lvars));
                Transcript { initial: ConcState::Rel(m0), lvars, pre, outcome: run.map(ConcState::Rel), post }
            }
        })
    }
}
