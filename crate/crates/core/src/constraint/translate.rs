//! `⟨M⟩(Φ)`: translation of assertions into constraints through a memory.
//!
//! Program identifiers are replaced by the values the memory maps them to;
//! array reads become `select`, functional updates become `store`, and
//! free logical variables become rigid symbols shared by the whole run.
//!
//! In a relational memory an identifier without run index denotes a value
//! shared by both runs: it is read from the left run and the equality of
//! both runs is conjoined to the translation.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::{ArithOp, Formula, Term};
use crate::assertion::{AExp, ArrExp, Assertion, CmpOp};
use crate::error::EvalError;
use crate::lang::{BinOp, Ident, Rel, RelSymMem, Side, SymArray, SymGen, SymMem, UnOp};

/// State shared by all translations of one engine run.
pub struct Translator<'a> {
    pub gen: &'a mut SymGen,
    /// Free logical variables and the rigid symbols standing for them.
    pub rigid: &'a mut BTreeMap<Ident, crate::lang::Sym>,
}

#[derive(Clone, Copy)]
pub enum MemRef<'a> {
    Unary(&'a SymMem),
    Rel(&'a RelSymMem),
}

/// A memory, plus scalar overrides (used for `I[e/x]`).
#[derive(Clone)]
pub struct TransEnv<'a> {
    pub mem: MemRef<'a>,
    pub overrides: BTreeMap<Ident, Rel<Term>>,
}

impl<'a> TransEnv<'a> {
    pub fn unary(m: &'a SymMem) -> Self {
        TransEnv { mem: MemRef::Unary(m), overrides: BTreeMap::new() }
    }

    pub fn rel(m: &'a RelSymMem) -> Self {
        TransEnv { mem: MemRef::Rel(m), overrides: BTreeMap::new() }
    }

    pub fn with_override(mut self, x: &Ident, v: Rel<Term>) -> Self {
        self.overrides.insert(x.clone(), v);
        self
    }

    fn is_rel(&self) -> bool {
        matches!(self.mem, MemRef::Rel(_))
    }

    /// Value of scalar `x` in both runs (equal components for unary).
    fn scalar_rel(&self, x: &Ident) -> Result<Rel<Term>, EvalError> {
        if let Some(v) = self.overrides.get(x) {
            return Ok(v.clone());
        }
        match self.mem {
            MemRef::Unary(m) => m
                .scalars
                .get(x)
                .map(|v| Rel::One(Term::from(*v)))
                .ok_or_else(|| unbound(x, m.arrays.contains_key(x))),
            MemRef::Rel(m) => m
                .scalars
                .get(x)
                .map(|v| v.map(|s| Term::from(*s)))
                .ok_or_else(|| unbound(x, m.arrays.contains_key(x))),
        }
    }

    fn array_rel(&self, a: &Ident) -> Result<Rel<SymArray>, EvalError> {
        match self.mem {
            MemRef::Unary(m) => m.arrays.get(a).map(|v| Rel::One(*v)).ok_or_else(|| unbound_arr(a, m.scalars.contains_key(a))),
            MemRef::Rel(m) => m.arrays.get(a).cloned().ok_or_else(|| unbound_arr(a, m.scalars.contains_key(a))),
        }
    }

    fn check_side(&self, x: &Ident, side: Option<Side>) -> Result<Side, EvalError> {
        match (side, self.is_rel()) {
            (Some(s), true) => Ok(s),
            (None, _) => Ok(Side::Left),
            (Some(s), false) => Err(EvalError::Relational(format!("{x}@{}", s.index()))),
        }
    }

    fn scalar(&self, x: &Ident, side: Option<Side>) -> Result<Term, EvalError> {
        let s = self.check_side(x, side)?;
        Ok(self.scalar_rel(x)?.proj(s).clone())
    }

    fn array(&self, a: &Ident, side: Option<Side>) -> Result<SymArray, EvalError> {
        let s = self.check_side(a, side)?;
        Ok(*self.array_rel(a)?.proj(s))
    }
}

fn unbound(x: &Ident, is_array: bool) -> EvalError {
    if is_array {
        EvalError::NotAScalar(x.clone())
    } else {
        EvalError::Unbound(x.clone())
    }
}

fn unbound_arr(a: &Ident, is_scalar: bool) -> EvalError {
    if is_scalar {
        EvalError::NotAnArray(a.clone())
    } else {
        EvalError::Unbound(a.clone())
    }
}

/// Result of a translation: definitional constraints for auxiliary symbols
/// (which hold regardless of the truth of the assertion) and the body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Translated {
    pub defs: Vec<Formula>,
    pub body: Formula,
}

impl Translated {
    /// Constraints asserting the assertion.
    pub fn asserted(self) -> Vec<Formula> {
        let mut v = self.defs;
        v.push(self.body);
        v
    }

    /// Constraints asserting the negation of the assertion.
    pub fn negated(self) -> Vec<Formula> {
        let mut v = self.defs;
        v.push(Formula::not(self.body));
        v
    }
}

struct Ctx<'t, 'a, 'e> {
    tr: &'t mut Translator<'a>,
    env: &'t TransEnv<'e>,
    bound: Vec<Ident>,
    defs: Vec<Formula>,
}

fn fold_arith(op: ArithOp, a: Term, b: Term) -> Term {
    if let (Some(x), Some(y)) = (a.as_int(), b.as_int()) {
        if let Some(v) = op.apply(x, y) {
            return Term::Int(v);
        }
    }
    Term::arith(op, a, b)
}

/// Definition of `f = firstdiff(a, b, n)`.
fn firstdiff_def(f: Term, a: &Term, b: &Term, n: &Term, h: &Ident) -> Formula {
    let hv = Term::Bound(h.clone());
    let same = Formula::eq(Term::select(a.clone(), hv.clone()), Term::select(b.clone(), hv.clone()));
    let all_same_upto = |upper: Formula| {
        Formula::Forall(
            h.clone(),
            Box::new(Formula::implies(
                Formula::and([Formula::le(Term::Int(1), hv.clone()), upper]),
                same.clone(),
            )),
        )
    };
    let none = Formula::and([
        Formula::eq(f.clone(), Term::Int(0)),
        all_same_upto(Formula::le(hv.clone(), n.clone())),
    ]);
    let first = Formula::and([
        Formula::le(Term::Int(1), f.clone()),
        Formula::le(f.clone(), n.clone()),
        Formula::ne(Term::select(a.clone(), f.clone()), Term::select(b.clone(), f.clone())),
        all_same_upto(Formula::lt(hv.clone(), f.clone())),
    ]);
    Formula::or([none, first])
}

impl Ctx<'_, '_, '_> {
    fn arr(&mut self, e: &ArrExp, locals: &mut Vec<(Ident, Formula)>) -> Result<Term, EvalError> {
        match e {
            ArrExp::Name(a, s) => Ok(Term::Sym(self.env.array(a, *s)?.content)),
            ArrExp::Update(b, i, v) => {
                let tb = self.arr(b, locals)?;
                let ti = self.aexp(i, locals)?;
                let tv = self.aexp(v, locals)?;
                Ok(Term::store(tb, ti, tv))
            }
        }
    }

    fn aexp(&mut self, e: &AExp, locals: &mut Vec<(Ident, Formula)>) -> Result<Term, EvalError> {
        Ok(match e {
            AExp::Int(v) => Term::Int(*v),
            AExp::Var(x, s) => self.env.scalar(x, *s)?,
            AExp::LVar(x) => {
                if self.bound.contains(x) {
                    Term::Bound(x.clone())
                } else {
                    let gen = &mut *self.tr.gen;
                    Term::Sym(*self.tr.rigid.entry(x.clone()).or_insert_with(|| gen.fresh_int()))
                }
            }
            AExp::Len(a, s) => Term::from(self.env.array(a, *s)?.len),
            AExp::Read(a, i) => {
                let ta = self.arr(a, locals)?;
                let ti = self.aexp(i, locals)?;
                Term::select(ta, ti)
            }
            AExp::Bin(op, a, b) => {
                let ta = self.aexp(a, locals)?;
                let tb = self.aexp(b, locals)?;
                bin_term(*op, ta, tb)
            }
            AExp::Un(UnOp::Neg, a) => {
                let t = self.aexp(a, locals)?;
                match t.as_int().and_then(i64::checked_neg) {
                    Some(v) => Term::Int(v),
                    None => Term::Neg(Box::new(t)),
                }
            }
            AExp::Un(UnOp::Not, a) => {
                let t = self.aexp(a, locals)?;
                Term::flag(Formula::falsy(t))
            }
            AExp::Abs(a) => {
                let t = self.aexp(a, locals)?;
                if let Some(v) = t.as_int().and_then(i64::checked_abs) {
                    Term::Int(v)
                } else {
                    Term::ite(Formula::cmp(CmpOp::Ge, t.clone(), Term::Int(0)), t.clone(), Term::Neg(Box::new(t)))
                }
            }
            AExp::FirstDiff(a, b, n) => {
                let ta = self.arr(a, locals)?;
                let tb = self.arr(b, locals)?;
                let tn = self.aexp(n, locals)?;
                let id = self.tr.gen.fresh_int();
                let h = Ident::new(&format!("fdh{}", id.id));
                if self.bound.is_empty() {
                    self.defs.push(firstdiff_def(Term::Sym(id), &ta, &tb, &tn, &h));
                    Term::Sym(id)
                } else {
                    let name = Ident::new(&format!("fd{}", id.id));
                    let def = firstdiff_def(Term::Bound(name.clone()), &ta, &tb, &tn, &h);
                    locals.push((name.clone(), def));
                    Term::Bound(name)
                }
            }
        })
    }

    fn formula(&mut self, a: &Assertion) -> Result<Formula, EvalError> {
        Ok(match a {
            Assertion::True => Formula::True,
            Assertion::False => Formula::False,
            Assertion::Cmp(op, x, y) => {
                let mut locals = Vec::new();
                let tx = self.aexp(x, &mut locals)?;
                let ty = self.aexp(y, &mut locals)?;
                let mut atom = match (tx.as_int(), ty.as_int()) {
                    (Some(u), Some(v)) => {
                        if op.holds(u, v) {
                            Formula::True
                        } else {
                            Formula::False
                        }
                    }
                    _ => Formula::cmp(*op, tx, ty),
                };
                for (name, def) in locals.into_iter().rev() {
                    atom = Formula::Exists(name, Box::new(Formula::and([def, atom])));
                }
                atom
            }
            Assertion::Not(x) => Formula::not(self.formula(x)?),
            Assertion::And(x, y) => {
                let fx = self.formula(x)?;
                let fy = self.formula(y)?;
                Formula::and([fx, fy])
            }
            Assertion::Or(x, y) => {
                let fx = self.formula(x)?;
                let fy = self.formula(y)?;
                Formula::or([fx, fy])
            }
            Assertion::Implies(x, y) => {
                let fx = self.formula(x)?;
                let fy = self.formula(y)?;
                Formula::implies(fx, fy)
            }
            Assertion::Iff(x, y) => {
                let fx = self.formula(x)?;
                let fy = self.formula(y)?;
                Formula::Iff(Box::new(fx), Box::new(fy))
            }
            Assertion::Forall(v, body) | Assertion::Exists(v, body) => {
                self.bound.push(v.clone());
                let fb = self.formula(body);
                self.bound.pop();
                let fb = fb?;
                if matches!(a, Assertion::Forall(..)) {
                    Formula::Forall(v.clone(), Box::new(fb))
                } else {
                    Formula::Exists(v.clone(), Box::new(fb))
                }
            }
        })
    }
}

/// Integer-valued program operator applied to terms.
pub fn bin_term(op: BinOp, a: Term, b: Term) -> Term {
    match op {
        BinOp::Add => fold_arith(ArithOp::Add, a, b),
        BinOp::Sub => fold_arith(ArithOp::Sub, a, b),
        BinOp::Mul => fold_arith(ArithOp::Mul, a, b),
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let cmp = match op {
                BinOp::Eq => CmpOp::Eq,
                BinOp::Ne => CmpOp::Ne,
                BinOp::Lt => CmpOp::Lt,
                BinOp::Le => CmpOp::Le,
                BinOp::Gt => CmpOp::Gt,
                _ => CmpOp::Ge,
            };
            Term::flag(Formula::cmp(cmp, a, b))
        }
        BinOp::And => Term::flag(Formula::and([Formula::truthy(a), Formula::truthy(b)])),
        BinOp::Or => Term::flag(Formula::or([Formula::truthy(a), Formula::truthy(b)])),
    }
}

/// Equality of two runs' versions of a shared identifier.
fn shared_scalar_eq(v: &Rel<Term>) -> Formula {
    match v {
        Rel::One(_) => Formula::True,
        Rel::Pair(l, r) => Formula::eq(l.clone(), r.clone()),
    }
}

fn shared_length_eq(v: &Rel<SymArray>) -> Formula {
    let (l, r) = (v.proj(Side::Left), v.proj(Side::Right));
    if l.len == r.len {
        Formula::True
    } else {
        Formula::eq(Term::from(l.len), Term::from(r.len))
    }
}

fn shared_array_eq(v: &Rel<SymArray>, h: &Ident) -> Formula {
    let (l, r) = (v.proj(Side::Left), v.proj(Side::Right));
    if l == r {
        return Formula::True;
    }
    let hv = Term::Bound(h.clone());
    Formula::and([
        shared_length_eq(v),
        Formula::Forall(
            h.clone(),
            Box::new(Formula::implies(
                Formula::and([Formula::le(Term::Int(1), hv.clone()), Formula::le(hv.clone(), Term::from(l.len))]),
                Formula::eq(Term::select(Term::Sym(l.content), hv.clone()), Term::select(Term::Sym(r.content), hv)),
            )),
        ),
    ])
}

/// `⟨M⟩(Φ)`.
pub fn translate(tr: &mut Translator<'_>, env: &TransEnv<'_>, a: &Assertion) -> Result<Translated, EvalError> {
    let mut side = Vec::new();
    if env.is_rel() {
        let shared = a.shared_uses();
        for x in &shared.scalars {
            side.push(shared_scalar_eq(&env.scalar_rel(x)?));
        }
        for arr in &shared.arrays {
            let h = Ident::new(&format!("sh{}", tr.gen.fresh_int().id));
            side.push(shared_array_eq(&env.array_rel(arr)?, &h));
        }
        for arr in shared.lengths.difference(&shared.arrays) {
            side.push(shared_length_eq(&env.array_rel(arr)?));
        }
    }
    let mut ctx = Ctx { tr, env, bound: Vec::new(), defs: Vec::new() };
    let main = ctx.formula(a)?;
    let defs = ctx.defs;
    side.push(main);
    Ok(Translated { defs, body: Formula::and(side) })
}
