//! Constraints over symbolic values.
//!
//! Constraint terms mention symbols, bound logical variables, integer
//! arithmetic and the array theory (`select`/`store`); they never mention
//! program identifiers.

pub mod ground;
pub mod translate;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::assertion::CmpOp;
use crate::lang::{Ident, Scalar, Sort, Sym};

pub use ground::{GroundArray, GroundSubstitution};
pub use translate::{translate, MemRef, TransEnv, Translated, Translator};

/// Arithmetic operators of constraint terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }

    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        match self {
            ArithOp::Add => a.checked_add(b),
            ArithOp::Sub => a.checked_sub(b),
            ArithOp::Mul => a.checked_mul(b),
        }
    }
}

/// Constraint terms. `Sym` of sort `Array`, `Store` and `Ite` over array
/// terms denote arrays; everything else denotes integers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Int(i64),
    Sym(Sym),
    /// A logical variable bound by an enclosing quantifier.
    Bound(Ident),
    Arith(ArithOp, Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Select(Box<Term>, Box<Term>),
    Store(Box<Term>, Box<Term>, Box<Term>),
    Ite(Box<Formula>, Box<Term>, Box<Term>),
}

/// Constraint formulas.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Cmp(CmpOp, Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Ident, Box<Formula>),
    Exists(Ident, Box<Formula>),
}

impl From<Scalar> for Term {
    fn from(s: Scalar) -> Term {
        match s {
            Scalar::Int(v) => Term::Int(v),
            Scalar::Sym(x) => Term::Sym(x),
        }
    }
}

impl From<Sym> for Term {
    fn from(s: Sym) -> Term {
        Term::Sym(s)
    }
}

impl Term {
    pub fn arith(op: ArithOp, a: Term, b: Term) -> Term {
        Term::Arith(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::arith(ArithOp::Add, a, b)
    }

    pub fn select(a: Term, i: Term) -> Term {
        Term::Select(Box::new(a), Box::new(i))
    }

    pub fn store(a: Term, i: Term, v: Term) -> Term {
        Term::Store(Box::new(a), Box::new(i), Box::new(v))
    }

    pub fn ite(c: Formula, t: Term, e: Term) -> Term {
        match c {
            Formula::True => t,
            Formula::False => e,
            c => Term::Ite(Box::new(c), Box::new(t), Box::new(e)),
        }
    }

    /// `1` if `c` holds, `0` otherwise.
    pub fn flag(c: Formula) -> Term {
        Term::ite(c, Term::Int(1), Term::Int(0))
    }

    pub fn bound(name: &str) -> Term {
        Term::Bound(Ident::new(name))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Term::Int(_) | Term::Bound(_) => {}
            Term::Sym(s) => {
                out.insert(*s);
            }
            Term::Arith(_, a, b) | Term::Select(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Term::Neg(a) => a.collect_symbols(out),
            Term::Store(a, i, v) => {
                a.collect_symbols(out);
                i.collect_symbols(out);
                v.collect_symbols(out);
            }
            Term::Ite(c, t, e) => {
                c.collect_symbols(out);
                t.collect_symbols(out);
                e.collect_symbols(out);
            }
        }
    }

    pub fn rename(&self, map: &BTreeMap<Sym, Sym>) -> Term {
        match self {
            Term::Int(_) | Term::Bound(_) => self.clone(),
            Term::Sym(s) => Term::Sym(*map.get(s).unwrap_or(s)),
            Term::Arith(op, a, b) => Term::arith(*op, a.rename(map), b.rename(map)),
            Term::Neg(a) => Term::Neg(Box::new(a.rename(map))),
            Term::Select(a, i) => Term::select(a.rename(map), i.rename(map)),
            Term::Store(a, i, v) => Term::store(a.rename(map), i.rename(map), v.rename(map)),
            Term::Ite(c, t, e) => Term::ite(c.rename(map), t.rename(map), e.rename(map)),
        }
    }

    /// Sort of the term, given that bound variables are integers.
    pub fn sort(&self) -> Sort {
        match self {
            Term::Sym(s) => s.sort,
            Term::Store(..) => Sort::Array,
            Term::Ite(_, t, _) => t.sort(),
            _ => Sort::Int,
        }
    }
}

impl Formula {
    /// Comparison; comparisons of two literals fold to `true`/`false`.
    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Formula {
        match (a.as_int(), b.as_int()) {
            (Some(x), Some(y)) if op.holds(x, y) => Formula::True,
            (Some(_), Some(_)) => Formula::False,
            _ => Formula::Cmp(op, a, b),
        }
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::cmp(CmpOp::Eq, a, b)
    }

    pub fn le(a: Term, b: Term) -> Formula {
        Formula::cmp(CmpOp::Le, a, b)
    }

    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::cmp(CmpOp::Lt, a, b)
    }

    pub fn gt(a: Term, b: Term) -> Formula {
        Formula::cmp(CmpOp::Gt, a, b)
    }

    pub fn ne(a: Term, b: Term) -> Formula {
        Formula::cmp(CmpOp::Ne, a, b)
    }

    /// Negation with trivial simplification of constants and double
    /// negation.
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            g => Formula::Not(Box::new(g)),
        }
    }

    /// Conjunction, flattening nested conjunctions and dropping `true`.
    pub fn and(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction, flattening nested disjunctions and dropping `false`.
    pub fn or(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for f in items {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, b) => b,
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    /// `v > 0`: the encoding of "true" for integer-valued guards.
    pub fn truthy(v: Term) -> Formula {
        Formula::gt(v, Term::Int(0))
    }

    /// `v <= 0`.
    pub fn falsy(v: Term) -> Formula {
        Formula::le(v, Term::Int(0))
    }

    pub fn symbols(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    pub fn collect_symbols(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Cmp(_, a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.collect_symbols(out),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    /// Renames symbols according to `map` (symbols not in the map are kept).
    pub fn rename(&self, map: &BTreeMap<Sym, Sym>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, a.rename(map), b.rename(map)),
            Formula::Not(a) => Formula::Not(Box::new(a.rename(map))),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| x.rename(map)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| x.rename(map)).collect()),
            Formula::Implies(a, b) => Formula::Implies(Box::new(a.rename(map)), Box::new(b.rename(map))),
            Formula::Iff(a, b) => Formula::Iff(Box::new(a.rename(map)), Box::new(b.rename(map))),
            Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(a.rename(map))),
            Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(a.rename(map))),
        }
    }

    pub fn has_quantifiers(&self) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Cmp(_, a, b) => a.has_quantifiers() || b.has_quantifiers(),
            Formula::Forall(..) | Formula::Exists(..) => true,
            Formula::Not(a) => a.has_quantifiers(),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().any(Formula::has_quantifiers),
            Formula::Implies(a, b) | Formula::Iff(a, b) => a.has_quantifiers() || b.has_quantifiers(),
        }
    }
}

impl Term {
    fn has_quantifiers(&self) -> bool {
        match self {
            Term::Ite(c, t, e) => c.has_quantifiers() || t.has_quantifiers() || e.has_quantifiers(),
            Term::Arith(_, a, b) | Term::Select(a, b) => a.has_quantifiers() || b.has_quantifiers(),
            Term::Neg(a) => a.has_quantifiers(),
            Term::Store(a, i, v) => a.has_quantifiers() || i.has_quantifiers() || v.has_quantifiers(),
            Term::Int(_) | Term::Sym(_) | Term::Bound(_) => false,
        }
    }
}

/// The path condition: an insertion-ordered conjunction of formulas.
/// Cloning is cheap; formulas are shared.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    items: Vec<Arc<Formula>>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        ConstraintSet { items: Vec::new() }
    }

    /// Adds `f` unless it is literally `true`.
    pub fn push(&mut self, f: Formula) {
        if f != Formula::True {
            self.items.push(Arc::new(f));
        }
    }

    pub fn extend(&mut self, fs: impl IntoIterator<Item = Formula>) {
        for f in fs {
            self.push(f);
        }
    }

    pub fn with(&self, f: Formula) -> ConstraintSet {
        let mut s = self.clone();
        s.push(f);
        s
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.items.iter().map(|f| &**f)
    }

    pub fn to_vec(&self) -> Vec<Formula> {
        self.iter().cloned().collect()
    }

    /// Whether the set syntactically contains `false`.
    pub fn has_false(&self) -> bool {
        self.iter().any(|f| *f == Formula::False)
    }

    pub fn symbols(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for f in self.iter() {
            f.collect_symbols(&mut out);
        }
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(v) => write!(f, "{v}"),
            Term::Sym(s) => write!(f, "{s}"),
            Term::Bound(x) => write!(f, "${x}"),
            Term::Arith(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Term::Neg(a) => write!(f, "-{a}"),
            Term::Select(a, i) => write!(f, "select({a}, {i})"),
            Term::Store(a, i, v) => write!(f, "store({a}, {i}, {v})"),
            Term::Ite(c, t, e) => write!(f, "ite({c}, {t}, {e})"),
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, xs: &[Formula], sep: &str) -> fmt::Result {
    f.write_str("(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{x}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Formula::Not(a) => write!(f, "!({a})"),
            Formula::And(xs) => join(f, xs, " && "),
            Formula::Or(xs) => join(f, xs, " || "),
            Formula::Implies(a, b) => write!(f, "({a} ==> {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <=> {b})"),
            Formula::Forall(v, a) => write!(f, "(forall ${v}. {a})"),
            Formula::Exists(v, a) => write!(f, "(exists ${v}. {a})"),
        }
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}
