//! Ground substitutions: from symbolic values to integers and arrays.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use super::{Formula, Term};
use crate::error::EvalError;
use crate::lang::{
    merge_mem, Cmd, ConcArray, ConcMem, Expr, Ident, RelConcMem, RelSymMem, Scalar, Side, Sort, Sym, SymArray, SymMem,
};

/// A total function `ℤ → ℤ` given by finitely many cells and a default.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundArray {
    pub cells: BTreeMap<i64, i64>,
    pub default: i64,
}

impl GroundArray {
    pub fn from_slice(vals: &[i64]) -> GroundArray {
        GroundArray {
            cells: vals.iter().enumerate().map(|(i, v)| (i as i64 + 1, *v)).collect(),
            default: 0,
        }
    }

    pub fn get(&self, idx: i64) -> i64 {
        self.cells.get(&idx).copied().unwrap_or(self.default)
    }

    pub fn set(&self, idx: i64, v: i64) -> GroundArray {
        let mut out = self.clone();
        out.cells.insert(idx, v);
        out
    }

    /// Restriction to `{1..len}`.
    pub fn restrict(&self, len: i64) -> ConcArray {
        ConcArray((1..=len.max(0)).map(|i| self.get(i)).collect())
    }
}

/// `σ ∈ Symval → ℤ ∪ Array`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundSubstitution {
    pub ints: BTreeMap<Sym, i64>,
    pub arrays: BTreeMap<Sym, GroundArray>,
}

/// Why a substitution cannot be applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundError {
    Uncovered(Sym),
    /// A length grounded to a negative integer.
    NegativeLength(Sym, i64),
    Eval(EvalError),
}

impl fmt::Display for GroundError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundError::Uncovered(s) => write!(f, "substitution does not cover {s}"),
            GroundError::NegativeLength(s, v) => write!(f, "length {s} grounded to negative value {v}"),
            GroundError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl From<EvalError> for GroundError {
    fn from(e: EvalError) -> Self {
        GroundError::Eval(e)
    }
}

impl GroundSubstitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.ints.is_empty() && self.arrays.is_empty()
    }

    pub fn int(&self, s: Sym) -> Result<i64, GroundError> {
        self.ints.get(&s).copied().ok_or(GroundError::Uncovered(s))
    }

    pub fn array(&self, s: Sym) -> Result<&GroundArray, GroundError> {
        self.arrays.get(&s).ok_or(GroundError::Uncovered(s))
    }

    pub fn covers(&self, s: Sym) -> bool {
        match s.sort {
            Sort::Int => self.ints.contains_key(&s),
            Sort::Array => self.arrays.contains_key(&s),
        }
    }

    /// `self ⪯ other`: every binding of `self` is also in `other`.
    pub fn extended_by(&self, other: &GroundSubstitution) -> bool {
        self.ints.iter().all(|(k, v)| other.ints.get(k) == Some(v))
            && self.arrays.iter().all(|(k, v)| other.arrays.get(k) == Some(v))
    }

    pub fn scalar(&self, v: Scalar) -> Result<i64, GroundError> {
        match v {
            Scalar::Int(i) => Ok(i),
            Scalar::Sym(s) => self.int(s),
        }
    }

    fn length(&self, v: Scalar) -> Result<i64, GroundError> {
        let l = self.scalar(v)?;
        if l < 0 {
            return Err(match v {
                Scalar::Sym(s) => GroundError::NegativeLength(s, l),
                Scalar::Int(_) => GroundError::Eval(EvalError::Overflow),
            });
        }
        Ok(l)
    }

    pub fn sym_array(&self, a: &SymArray) -> Result<ConcArray, GroundError> {
        let len = self.length(a.len)?;
        Ok(self.array(a.content)?.restrict(len))
    }

    /// `Mσ` for a unary symbolic memory.
    pub fn apply_mem(&self, m: &SymMem) -> Result<ConcMem, GroundError> {
        let mut out = ConcMem::new();
        for (k, v) in &m.scalars {
            out.scalars.insert(k.clone(), self.scalar(*v)?);
        }
        for (k, v) in &m.arrays {
            out.arrays.insert(k.clone(), self.sym_array(v)?);
        }
        Ok(out)
    }

    /// `Mσ` for a relational symbolic memory (both projections, merged).
    pub fn apply_rel_mem(&self, m: &RelSymMem) -> Result<RelConcMem, GroundError> {
        let l = self.apply_mem(&m.proj(Side::Left))?;
        let r = self.apply_mem(&m.proj(Side::Right))?;
        Ok(merge_mem(&l, &r).map_err(EvalError::from)?)
    }

    /// `eσ`: symbols replaced by their integers.
    pub fn apply_expr(&self, e: &Expr) -> Result<Expr, GroundError> {
        Ok(match e {
            Expr::Sym(s) => Expr::Int(self.int(*s)?),
            Expr::Int(_) | Expr::Var(_) | Expr::Len(_) => e.clone(),
            Expr::Read(a, i) => Expr::Read(a.clone(), Box::new(self.apply_expr(i)?)),
            Expr::Bin(op, a, b) => Expr::bin(*op, self.apply_expr(a)?, self.apply_expr(b)?),
            Expr::Un(op, a) => Expr::Un(*op, Box::new(self.apply_expr(a)?)),
            Expr::Pair(a, b) => Expr::Pair(Box::new(self.apply_expr(a)?), Box::new(self.apply_expr(b)?)),
        })
    }

    /// `cσ`.
    pub fn apply_cmd(&self, c: &Cmd) -> Result<Cmd, GroundError> {
        Ok(match c {
            Cmd::Skip => Cmd::Skip,
            Cmd::Seq(a, b) => Cmd::seq(self.apply_cmd(a)?, self.apply_cmd(b)?),
            Cmd::Assign(x, e) => Cmd::Assign(x.clone(), self.apply_expr(e)?),
            Cmd::ArrAssign(a, i, v) => Cmd::ArrAssign(a.clone(), self.apply_expr(i)?, self.apply_expr(v)?),
            Cmd::If(g, t, f) => Cmd::if_(self.apply_expr(g)?, self.apply_cmd(t)?, self.apply_cmd(f)?),
            Cmd::For(x, lo, hi, b) => {
                Cmd::For(x.clone(), self.apply_expr(lo)?, self.apply_expr(hi)?, Box::new(self.apply_cmd(b)?))
            }
            Cmd::ForInv(x, lo, hi, inv, b) => Cmd::ForInv(
                x.clone(),
                self.apply_expr(lo)?,
                self.apply_expr(hi)?,
                inv.clone(),
                Box::new(self.apply_cmd(b)?),
            ),
            Cmd::Pair(a, b) => Cmd::pair(self.apply_cmd(a)?, self.apply_cmd(b)?),
        })
    }

    /// Evaluates an integer term. `bound` gives the values of bound logical
    /// variables (innermost last).
    pub fn eval_term(&self, t: &Term, bound: &[(Ident, i64)], window: i64) -> Result<i64, GroundError> {
        Ok(match t {
            Term::Int(v) => *v,
            Term::Sym(s) => self.int(*s)?,
            Term::Bound(x) => bound
                .iter()
                .rev()
                .find(|(n, _)| n == x)
                .map(|(_, v)| *v)
                .ok_or_else(|| GroundError::Eval(EvalError::Unbound(x.clone())))?,
            Term::Arith(op, a, b) => {
                let va = self.eval_term(a, bound, window)?;
                let vb = self.eval_term(b, bound, window)?;
                op.apply(va, vb).ok_or(GroundError::Eval(EvalError::Overflow))?
            }
            Term::Neg(a) => self
                .eval_term(a, bound, window)?
                .checked_neg()
                .ok_or(GroundError::Eval(EvalError::Overflow))?,
            Term::Select(a, i) => {
                let arr = self.eval_array(a, bound, window)?;
                arr.get(self.eval_term(i, bound, window)?)
            }
            Term::Ite(c, x, y) => {
                if self.eval_formula_in(c, &mut bound.to_vec(), window)? {
                    self.eval_term(x, bound, window)?
                } else {
                    self.eval_term(y, bound, window)?
                }
            }
            Term::Store(..) => return Err(GroundError::Eval(EvalError::NotAScalar(Ident::new("store")))),
        })
    }

    /// Evaluates an array term.
    pub fn eval_array(&self, t: &Term, bound: &[(Ident, i64)], window: i64) -> Result<GroundArray, GroundError> {
        match t {
            Term::Sym(s) if s.sort == Sort::Array => Ok(self.array(*s)?.clone()),
            Term::Store(a, i, v) => {
                let base = self.eval_array(a, bound, window)?;
                let vi = self.eval_term(i, bound, window)?;
                let vv = self.eval_term(v, bound, window)?;
                Ok(base.set(vi, vv))
            }
            Term::Ite(c, x, y) => {
                if self.eval_formula_in(c, &mut bound.to_vec(), window)? {
                    self.eval_array(x, bound, window)
                } else {
                    self.eval_array(y, bound, window)
                }
            }
            _ => Err(GroundError::Eval(EvalError::NotAnArray(Ident::new("term")))),
        }
    }

    fn eval_formula_in(&self, f: &Formula, bound: &mut Vec<(Ident, i64)>, window: i64) -> Result<bool, GroundError> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Cmp(op, a, b) => {
                let va = self.eval_term(a, bound, window)?;
                let vb = self.eval_term(b, bound, window)?;
                op.holds(va, vb)
            }
            Formula::Not(a) => !self.eval_formula_in(a, bound, window)?,
            Formula::And(xs) => {
                for x in xs {
                    if !self.eval_formula_in(x, bound, window)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(xs) => {
                for x in xs {
                    if self.eval_formula_in(x, bound, window)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !self.eval_formula_in(a, bound, window)? || self.eval_formula_in(b, bound, window)?,
            Formula::Iff(a, b) => self.eval_formula_in(a, bound, window)? == self.eval_formula_in(b, bound, window)?,
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let universal = matches!(f, Formula::Forall(..));
                for k in -window..=window {
                    bound.push((v.clone(), k));
                    let r = self.eval_formula_in(body, bound, window);
                    bound.pop();
                    if r? != universal {
                        return Ok(!universal);
                    }
                }
                universal
            }
        })
    }

    /// `σ ⊨ f`, with quantifiers ranging over `[-window, window]`.
    pub fn eval_formula(&self, f: &Formula, window: i64) -> Result<bool, GroundError> {
        self.eval_formula_in(f, &mut Vec::new(), window)
    }

    /// `σ ⊨ S` for every formula of `fs`.
    pub fn satisfies<'f>(&self, fs: impl IntoIterator<Item = &'f Formula>, window: i64) -> Result<bool, GroundError> {
        for f in fs {
            if !self.eval_formula(f, window)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for GroundSubstitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (k, v) in &self.ints {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{k} -> {v}")?;
        }
        for (k, v) in &self.arrays {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{k} -> [")?;
            for (i, (idx, val)) in v.cells.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{idx}: {val}")?;
            }
            write!(f, "; else {}]", v.default)?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::SymGen;

    #[test]
    fn apply_to_memory_restricts_arrays() {
        let mut gen = SymGen::new();
        let (a, l, x) = (gen.fresh_array(), gen.fresh_int(), gen.fresh_int());
        let m = SymMem::new()
            .with_scalar("x", Scalar::Sym(x))
            .with_array("s", SymArray { content: a, len: Scalar::Sym(l) });
        let mut sigma = GroundSubstitution::new();
        sigma.ints.insert(x, 3);
        sigma.ints.insert(l, 1);
        sigma.arrays.insert(a, GroundArray::from_slice(&[0, 9]));
        let c = sigma.apply_mem(&m).unwrap();
        assert_eq!(c.scalars[&Ident::new("x")], 3);
        assert_eq!(c.arrays[&Ident::new("s")], ConcArray(alloc::vec![0]));
    }

    #[test]
    fn read_over_write() {
        let mut gen = SymGen::new();
        let a = gen.fresh_array();
        let mut sigma = GroundSubstitution::new();
        sigma.arrays.insert(a, GroundArray::default());
        let t = Term::select(Term::store(Term::Sym(a), Term::Int(1), Term::Int(5)), Term::Int(1));
        assert_eq!(sigma.eval_term(&t, &[], 0), Ok(5));
    }
}
