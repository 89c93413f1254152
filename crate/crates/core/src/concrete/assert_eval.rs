//! Evaluation of assertions in concrete memories.
//!
//! Quantifiers range over a finite window `[-B, B]` of integers, where `B`
//! exceeds every literal of the assertion, every array length and every
//! absolute value stored in the memory. Assertions whose quantifiers are
//! guarded by such bounds (the usual `1 <= t <= len(a) ==> ...`) are
//! decided exactly.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::assertion::{AExp, ArrExp, Assertion};
use crate::error::EvalError;
use crate::lang::{ConcArray, ConcMem, Ident, Rel, RelConcMem, Side};

/// Upper limit on the quantifier window radius.
pub const MAX_WINDOW: i64 = 4096;

/// Read access to a concrete memory by (possibly indexed) identifier.
pub trait ConcView {
    fn scalar(&self, x: &Ident, side: Option<Side>) -> Result<i64, EvalError>;
    fn array(&self, a: &Ident, side: Option<Side>) -> Result<&ConcArray, EvalError>;
    /// Largest absolute value or length stored.
    fn magnitude(&self) -> i64;
}

fn unindexed(x: &Ident, side: Option<Side>) -> Result<(), EvalError> {
    match side {
        None => Ok(()),
        Some(s) => Err(EvalError::Relational(alloc::format!("{x}@{}", s.index()))),
    }
}

impl ConcView for ConcMem {
    fn scalar(&self, x: &Ident, side: Option<Side>) -> Result<i64, EvalError> {
        unindexed(x, side)?;
        self.scalars.get(x).copied().ok_or_else(|| EvalError::Unbound(x.clone()))
    }

    fn array(&self, a: &Ident, side: Option<Side>) -> Result<&ConcArray, EvalError> {
        unindexed(a, side)?;
        self.arrays.get(a).ok_or_else(|| EvalError::Unbound(a.clone()))
    }

    fn magnitude(&self) -> i64 {
        let s = self.scalars.values().map(|v| v.saturating_abs()).max().unwrap_or(0);
        let a = self
            .arrays
            .values()
            .map(|arr| arr.0.iter().map(|v| v.saturating_abs()).max().unwrap_or(0).max(arr.len() as i64))
            .max()
            .unwrap_or(0);
        s.max(a)
    }
}

/// Unindexed identifiers resolve to the left run; the shared-value side
/// conditions are checked separately by [`eval_rel_assertion`].
impl ConcView for RelConcMem {
    fn scalar(&self, x: &Ident, side: Option<Side>) -> Result<i64, EvalError> {
        self.scalars
            .get(x)
            .map(|v| *v.proj(side.unwrap_or(Side::Left)))
            .ok_or_else(|| EvalError::Unbound(x.clone()))
    }

    fn array(&self, a: &Ident, side: Option<Side>) -> Result<&ConcArray, EvalError> {
        self.arrays
            .get(a)
            .map(|v| v.proj(side.unwrap_or(Side::Left)))
            .ok_or_else(|| EvalError::Unbound(a.clone()))
    }

    fn magnitude(&self) -> i64 {
        Side::BOTH.iter().map(|s| self.proj(*s).magnitude()).max().unwrap_or(0)
    }
}

struct Evaluator<'a, V: ConcView> {
    view: &'a V,
    lvars: &'a BTreeMap<Ident, i64>,
    bound: Vec<(Ident, i64)>,
    window: i64,
}

impl<V: ConcView> Evaluator<'_, V> {
    fn lvar(&self, x: &Ident) -> Result<i64, EvalError> {
        if let Some((_, v)) = self.bound.iter().rev().find(|(n, _)| n == x) {
            return Ok(*v);
        }
        self.lvars.get(x).copied().ok_or_else(|| EvalError::Unbound(x.clone()))
    }

    fn arr(&mut self, e: &ArrExp) -> Result<ConcArray, EvalError> {
        match e {
            ArrExp::Name(a, s) => Ok(self.view.array(a, *s)?.clone()),
            ArrExp::Update(b, i, v) => {
                let base = self.arr(b)?;
                let idx = self.aexp(i)?;
                let val = self.aexp(v)?;
                let (name, _) = e.base();
                base.set(idx, val).ok_or_else(|| EvalError::OutOfBounds {
                    array: name.clone(),
                    index: idx,
                    len: base.len(),
                })
            }
        }
    }

    fn read(&mut self, e: &ArrExp, idx: i64) -> Result<i64, EvalError> {
        let arr = self.arr(e)?;
        arr.get(idx).ok_or_else(|| EvalError::OutOfBounds {
            array: e.base().0.clone(),
            index: idx,
            len: arr.len(),
        })
    }

    fn aexp(&mut self, e: &AExp) -> Result<i64, EvalError> {
        match e {
            AExp::Int(v) => Ok(*v),
            AExp::Var(x, s) => self.view.scalar(x, *s),
            AExp::LVar(x) => self.lvar(x),
            AExp::Len(a, s) => Ok(self.view.array(a, *s)?.len() as i64),
            AExp::Read(a, i) => {
                let idx = self.aexp(i)?;
                self.read(a, idx)
            }
            AExp::Bin(op, a, b) => {
                let va = self.aexp(a)?;
                let vb = self.aexp(b)?;
                op.apply(va, vb).ok_or(EvalError::Overflow)
            }
            AExp::Un(op, a) => {
                let v = self.aexp(a)?;
                op.apply(v).ok_or(EvalError::Overflow)
            }
            AExp::Abs(a) => self.aexp(a)?.checked_abs().ok_or(EvalError::Overflow),
            AExp::FirstDiff(a, b, n) => {
                let n = self.aexp(n)?;
                let x = self.arr(a)?;
                let y = self.arr(b)?;
                for h in 1..=n.max(0) {
                    let oob = |arr: &ConcArray, e: &ArrExp| EvalError::OutOfBounds {
                        array: e.base().0.clone(),
                        index: h,
                        len: arr.len(),
                    };
                    let vx = x.get(h).ok_or_else(|| oob(&x, a))?;
                    let vy = y.get(h).ok_or_else(|| oob(&y, b))?;
                    if vx != vy {
                        return Ok(h);
                    }
                }
                Ok(0)
            }
        }
    }

    fn holds(&mut self, a: &Assertion) -> Result<bool, EvalError> {
        match a {
            Assertion::True => Ok(true),
            Assertion::False => Ok(false),
            Assertion::Cmp(op, x, y) => {
                let vx = self.aexp(x)?;
                let vy = self.aexp(y)?;
                Ok(op.holds(vx, vy))
            }
            Assertion::Not(x) => Ok(!self.holds(x)?),
            Assertion::And(x, y) => Ok(self.holds(x)? && self.holds(y)?),
            Assertion::Or(x, y) => Ok(self.holds(x)? || self.holds(y)?),
            Assertion::Implies(x, y) => Ok(!self.holds(x)? || self.holds(y)?),
            Assertion::Iff(x, y) => Ok(self.holds(x)? == self.holds(y)?),
            Assertion::Forall(v, body) | Assertion::Exists(v, body) => {
                let universal = matches!(a, Assertion::Forall(..));
                for k in -self.window..=self.window {
                    self.bound.push((v.clone(), k));
                    let r = self.holds(body);
                    self.bound.pop();
                    if r? != universal {
                        return Ok(!universal);
                    }
                }
                Ok(universal)
            }
        }
    }
}

fn window<V: ConcView>(view: &V, a: &Assertion, lvars: &BTreeMap<Ident, i64>) -> i64 {
    let lv = lvars.values().map(|v| v.saturating_abs()).max().unwrap_or(0);
    a.max_literal().max(view.magnitude()).max(lv).saturating_add(2).min(MAX_WINDOW)
}

/// `M ⊨_I Φ` for any concrete view; unindexed identifiers are read from
/// the left run of relational memories without any side condition.
pub fn eval_assertion<V: ConcView>(
    view: &V,
    a: &Assertion,
    lvars: &BTreeMap<Ident, i64>,
) -> Result<bool, EvalError> {
    let mut ev = Evaluator { view, lvars, bound: Vec::new(), window: window(view, a, lvars) };
    ev.holds(a)
}

/// Unary validity `M ⊨_I Φ`.
pub fn eval_unary_assertion(m: &ConcMem, a: &Assertion, lvars: &BTreeMap<Ident, i64>) -> Result<bool, EvalError> {
    eval_assertion(m, a, lvars)
}

/// Relational validity. An identifier used without index denotes the same
/// value in both runs, so it must actually agree across the runs.
pub fn eval_rel_assertion(m: &RelConcMem, a: &Assertion, lvars: &BTreeMap<Ident, i64>) -> Result<bool, EvalError> {
    let shared = a.shared_uses();
    for x in &shared.scalars {
        match m.scalars.get(x) {
            Some(Rel::Pair(..)) => return Ok(false),
            Some(Rel::One(_)) => {}
            None => return Err(EvalError::Unbound(x.clone())),
        }
    }
    for arr in &shared.arrays {
        match m.arrays.get(arr) {
            Some(Rel::Pair(..)) => return Ok(false),
            Some(Rel::One(_)) => {}
            None => return Err(EvalError::Unbound(arr.clone())),
        }
    }
    for arr in &shared.lengths {
        match m.arrays.get(arr) {
            Some(v) if v.proj(Side::Left).len() != v.proj(Side::Right).len() => return Ok(false),
            Some(_) => {}
            None => return Err(EvalError::Unbound(arr.clone())),
        }
    }
    eval_assertion(m, a, lvars)
}

/// Describes an assertion failure for transcripts.
pub fn describe(result: &Result<bool, EvalError>) -> alloc::string::String {
    match result {
        Ok(true) => "holds".to_string(),
        Ok(false) => "fails".to_string(),
        Err(e) => alloc::format!("error: {e}"),
    }
}
