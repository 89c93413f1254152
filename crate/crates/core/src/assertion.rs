//! Unary and relational assertions.
//!
//! Assertions mention program variables and array names (optionally indexed
//! by run, `x@1`), integer logical variables, and array update expressions.
//! They never mention symbolic values.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::lang::{BinOp, Expr, Ident, Side, UnOp};

/// Array expressions: names and functional updates `α{i -> v}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArrExp {
    Name(Ident, Option<Side>),
    Update(Box<ArrExp>, Box<AExp>, Box<AExp>),
}

/// Arithmetic expressions of assertions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AExp {
    Int(i64),
    Var(Ident, Option<Side>),
    LVar(Ident),
    Read(Box<ArrExp>, Box<AExp>),
    Len(Ident, Option<Side>),
    Bin(BinOp, Box<AExp>, Box<AExp>),
    Un(UnOp, Box<AExp>),
    Abs(Box<AExp>),
    /// Smallest `h` in `1..=n` with `a[h] != b[h]`, or 0 if there is none.
    FirstDiff(Box<ArrExp>, Box<ArrExp>, Box<AExp>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    True,
    False,
    Cmp(CmpOp, AExp, AExp),
    Not(Box<Assertion>),
    And(Box<Assertion>, Box<Assertion>),
    Or(Box<Assertion>, Box<Assertion>),
    Implies(Box<Assertion>, Box<Assertion>),
    Iff(Box<Assertion>, Box<Assertion>),
    Forall(Ident, Box<Assertion>),
    Exists(Ident, Box<Assertion>),
}

/// Set of run indices occurring in a term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IdxSet {
    pub left: bool,
    pub right: bool,
}

impl IdxSet {
    pub fn is_empty(self) -> bool {
        !self.left && !self.right
    }

    pub fn only(side: Side) -> IdxSet {
        match side {
            Side::Left => IdxSet { left: true, right: false },
            Side::Right => IdxSet { left: false, right: true },
        }
    }

    pub fn union(self, other: IdxSet) -> IdxSet {
        IdxSet {
            left: self.left || other.left,
            right: self.right || other.right,
        }
    }

    pub fn subset_of(self, other: IdxSet) -> bool {
        (!self.left || other.left) && (!self.right || other.right)
    }

    fn add(&mut self, side: Option<Side>) {
        match side {
            Some(Side::Left) => self.left = true,
            Some(Side::Right) => self.right = true,
            None => {}
        }
    }
}

impl ArrExp {
    pub fn name(a: &str) -> ArrExp {
        ArrExp::Name(Ident::new(a), None)
    }

    pub fn base(&self) -> (&Ident, Option<Side>) {
        match self {
            ArrExp::Name(a, s) => (a, *s),
            ArrExp::Update(b, _, _) => b.base(),
        }
    }

    fn idx_into(&self, acc: &mut IdxSet) {
        match self {
            ArrExp::Name(_, s) => acc.add(*s),
            ArrExp::Update(b, i, v) => {
                b.idx_into(acc);
                i.idx_into(acc);
                v.idx_into(acc);
            }
        }
    }

    fn map_ids(&self, f: &mut impl FnMut(&Ident, Option<Side>, bool) -> AExpOrName) -> ArrExp {
        match self {
            ArrExp::Name(a, s) => match f(a, *s, true) {
                AExpOrName::Name(n, s) => ArrExp::Name(n, s),
                AExpOrName::Exp(_) => ArrExp::Name(a.clone(), *s),
            },
            ArrExp::Update(b, i, v) => ArrExp::Update(
                Box::new(b.map_ids(f)),
                Box::new(i.map_ids(f)),
                Box::new(v.map_ids(f)),
            ),
        }
    }

    fn collect_ids(&self, scalars: &mut BTreeSet<(Ident, Option<Side>)>, arrays: &mut BTreeSet<(Ident, Option<Side>)>) {
        match self {
            ArrExp::Name(a, s) => {
                arrays.insert((a.clone(), *s));
            }
            ArrExp::Update(b, i, v) => {
                b.collect_ids(scalars, arrays);
                i.collect_ids(scalars, arrays);
                v.collect_ids(scalars, arrays);
            }
        }
    }

    fn has_lvar(&self, lv: &Ident) -> bool {
        match self {
            ArrExp::Name(..) => false,
            ArrExp::Update(b, i, v) => b.has_lvar(lv) || i.has_lvar(lv) || v.has_lvar(lv),
        }
    }
}

/// Result of an identifier rewrite: a renamed identifier or a replacement
/// expression (only meaningful in scalar position).
pub enum AExpOrName {
    Name(Ident, Option<Side>),
    Exp(AExp),
}

impl AExp {
    pub fn var(x: &str) -> AExp {
        AExp::Var(Ident::new(x), None)
    }

    pub fn var_at(x: &str, side: Side) -> AExp {
        AExp::Var(Ident::new(x), Some(side))
    }

    pub fn lvar(x: &str) -> AExp {
        AExp::LVar(Ident::new(x))
    }

    pub fn bin(op: BinOp, a: AExp, b: AExp) -> AExp {
        AExp::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: AExp, b: AExp) -> AExp {
        AExp::bin(BinOp::Add, a, b)
    }

    pub fn read(arr: ArrExp, i: AExp) -> AExp {
        AExp::Read(Box::new(arr), Box::new(i))
    }

    /// Converts a pair-free, symbol-free program expression, attaching
    /// `side` to every identifier.
    pub fn from_expr(e: &Expr, side: Option<Side>) -> Option<AExp> {
        Some(match e {
            Expr::Int(v) => AExp::Int(*v),
            Expr::Var(x) => AExp::Var(x.clone(), side),
            Expr::Len(a) => AExp::Len(a.clone(), side),
            Expr::Read(a, i) => AExp::Read(
                Box::new(ArrExp::Name(a.clone(), side)),
                Box::new(AExp::from_expr(i, side)?),
            ),
            Expr::Bin(op, a, b) => AExp::bin(*op, AExp::from_expr(a, side)?, AExp::from_expr(b, side)?),
            Expr::Un(op, a) => AExp::Un(*op, Box::new(AExp::from_expr(a, side)?)),
            Expr::Sym(_) | Expr::Pair(..) => return None,
        })
    }

    pub fn idx(&self) -> IdxSet {
        let mut acc = IdxSet::default();
        self.idx_into(&mut acc);
        acc
    }

    fn idx_into(&self, acc: &mut IdxSet) {
        match self {
            AExp::Int(_) | AExp::LVar(_) => {}
            AExp::Var(_, s) | AExp::Len(_, s) => acc.add(*s),
            AExp::Read(a, i) => {
                a.idx_into(acc);
                i.idx_into(acc);
            }
            AExp::Bin(_, a, b) => {
                a.idx_into(acc);
                b.idx_into(acc);
            }
            AExp::Un(_, a) | AExp::Abs(a) => a.idx_into(acc),
            AExp::FirstDiff(a, b, n) => {
                a.idx_into(acc);
                b.idx_into(acc);
                n.idx_into(acc);
            }
        }
    }

    /// Rewrites every program identifier. `f` receives the identifier, its
    /// index, and whether it is in array position.
    pub fn map_ids(&self, f: &mut impl FnMut(&Ident, Option<Side>, bool) -> AExpOrName) -> AExp {
        match self {
            AExp::Int(_) | AExp::LVar(_) => self.clone(),
            AExp::Var(x, s) => match f(x, *s, false) {
                AExpOrName::Name(n, s) => AExp::Var(n, s),
                AExpOrName::Exp(e) => e,
            },
            AExp::Len(a, s) => match f(a, *s, true) {
                AExpOrName::Name(n, s) => AExp::Len(n, s),
                AExpOrName::Exp(_) => self.clone(),
            },
            AExp::Read(a, i) => AExp::Read(Box::new(a.map_ids(f)), Box::new(i.map_ids(f))),
            AExp::Bin(op, a, b) => AExp::bin(*op, a.map_ids(f), b.map_ids(f)),
            AExp::Un(op, a) => AExp::Un(*op, Box::new(a.map_ids(f))),
            AExp::Abs(a) => AExp::Abs(Box::new(a.map_ids(f))),
            AExp::FirstDiff(a, b, n) => AExp::FirstDiff(
                Box::new(a.map_ids(f)),
                Box::new(b.map_ids(f)),
                Box::new(n.map_ids(f)),
            ),
        }
    }

    fn collect_ids(&self, scalars: &mut BTreeSet<(Ident, Option<Side>)>, arrays: &mut BTreeSet<(Ident, Option<Side>)>) {
        match self {
            AExp::Int(_) | AExp::LVar(_) => {}
            AExp::Var(x, s) => {
                scalars.insert((x.clone(), *s));
            }
            AExp::Len(a, s) => {
                arrays.insert((a.clone(), *s));
            }
            AExp::Read(a, i) => {
                a.collect_ids(scalars, arrays);
                i.collect_ids(scalars, arrays);
            }
            AExp::Bin(_, a, b) => {
                a.collect_ids(scalars, arrays);
                b.collect_ids(scalars, arrays);
            }
            AExp::Un(_, a) | AExp::Abs(a) => a.collect_ids(scalars, arrays),
            AExp::FirstDiff(a, b, n) => {
                a.collect_ids(scalars, arrays);
                b.collect_ids(scalars, arrays);
                n.collect_ids(scalars, arrays);
            }
        }
    }

    fn has_lvar(&self, lv: &Ident) -> bool {
        match self {
            AExp::LVar(x) => x == lv,
            AExp::Int(_) | AExp::Var(..) | AExp::Len(..) => false,
            AExp::Read(a, i) => a.has_lvar(lv) || i.has_lvar(lv),
            AExp::Bin(_, a, b) => a.has_lvar(lv) || b.has_lvar(lv),
            AExp::Un(_, a) | AExp::Abs(a) => a.has_lvar(lv),
            AExp::FirstDiff(a, b, n) => a.has_lvar(lv) || b.has_lvar(lv) || n.has_lvar(lv),
        }
    }

    fn map_lvars(&self, f: &impl Fn(&Ident) -> Option<AExp>) -> AExp {
        match self {
            AExp::LVar(x) => f(x).unwrap_or_else(|| self.clone()),
            AExp::Int(_) | AExp::Var(..) | AExp::Len(..) => self.clone(),
            AExp::Read(a, i) => AExp::Read(Box::new(a.map_lvars(f)), Box::new(i.map_lvars(f))),
            AExp::Bin(op, a, b) => AExp::bin(*op, a.map_lvars(f), b.map_lvars(f)),
            AExp::Un(op, a) => AExp::Un(*op, Box::new(a.map_lvars(f))),
            AExp::Abs(a) => AExp::Abs(Box::new(a.map_lvars(f))),
            AExp::FirstDiff(a, b, n) => AExp::FirstDiff(
                Box::new(a.map_lvars(f)),
                Box::new(b.map_lvars(f)),
                Box::new(n.map_lvars(f)),
            ),
        }
    }
}

impl ArrExp {
    fn map_lvars(&self, f: &impl Fn(&Ident) -> Option<AExp>) -> ArrExp {
        match self {
            ArrExp::Name(..) => self.clone(),
            ArrExp::Update(b, i, v) => ArrExp::Update(
                Box::new(b.map_lvars(f)),
                Box::new(i.map_lvars(f)),
                Box::new(v.map_lvars(f)),
            ),
        }
    }
}

impl Assertion {
    pub fn cmp(op: CmpOp, a: AExp, b: AExp) -> Assertion {
        Assertion::Cmp(op, a, b)
    }

    pub fn and(a: Assertion, b: Assertion) -> Assertion {
        match (a, b) {
            (Assertion::True, b) => b,
            (a, Assertion::True) => a,
            (a, b) => Assertion::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn and_all(items: impl IntoIterator<Item = Assertion>) -> Assertion {
        items.into_iter().fold(Assertion::True, Assertion::and)
    }

    pub fn not(a: Assertion) -> Assertion {
        Assertion::Not(Box::new(a))
    }

    pub fn implies(a: Assertion, b: Assertion) -> Assertion {
        Assertion::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(lv: &str, body: Assertion) -> Assertion {
        Assertion::Forall(Ident::new(lv), Box::new(body))
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Assertion> {
        let mut out = Vec::new();
        fn go<'a>(a: &'a Assertion, out: &mut Vec<&'a Assertion>) {
            match a {
                Assertion::And(l, r) => {
                    go(l, out);
                    go(r, out);
                }
                Assertion::True => {}
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn idx(&self) -> IdxSet {
        match self {
            Assertion::True | Assertion::False => IdxSet::default(),
            Assertion::Cmp(_, a, b) => a.idx().union(b.idx()),
            Assertion::Not(a) | Assertion::Forall(_, a) | Assertion::Exists(_, a) => a.idx(),
            Assertion::And(a, b) | Assertion::Or(a, b) | Assertion::Implies(a, b) | Assertion::Iff(a, b) => {
                a.idx().union(b.idx())
            }
        }
    }

    pub fn is_unary(&self) -> bool {
        self.idx().is_empty()
    }

    /// Structural map over atoms.
    pub fn map_atoms(&self, f: &mut impl FnMut(CmpOp, &AExp, &AExp) -> Assertion) -> Assertion {
        match self {
            Assertion::True | Assertion::False => self.clone(),
            Assertion::Cmp(op, a, b) => f(*op, a, b),
            Assertion::Not(a) => Assertion::Not(Box::new(a.map_atoms(f))),
            Assertion::And(a, b) => Assertion::And(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Assertion::Or(a, b) => Assertion::Or(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Assertion::Implies(a, b) => {
                Assertion::Implies(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f)))
            }
            Assertion::Iff(a, b) => Assertion::Iff(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Assertion::Forall(x, a) => Assertion::Forall(x.clone(), Box::new(a.map_atoms(f))),
            Assertion::Exists(x, a) => Assertion::Exists(x.clone(), Box::new(a.map_atoms(f))),
        }
    }

    /// Rewrites every program identifier (see [`AExp::map_ids`]).
    pub fn map_ids(&self, f: &mut impl FnMut(&Ident, Option<Side>, bool) -> AExpOrName) -> Assertion {
        self.map_atoms(&mut |op, a, b| Assertion::Cmp(op, a.map_ids(f), b.map_ids(f)))
    }

    /// Projection onto one run. Atoms mentioning only run `side` (or no run
    /// at all) lose their indices; atoms that mention the other run become
    /// `true`.
    pub fn proj(&self, side: Side) -> Assertion {
        let want = IdxSet::only(side);
        self.map_atoms(&mut |op, a, b| {
            let (ia, ib) = (a.idx(), b.idx());
            let keep = (ia.is_empty() && ib.is_empty())
                || (ia == want && ib.subset_of(ia))
                || (ib == want && ia.subset_of(ib));
            if keep {
                Assertion::Cmp(op, strip(a), strip(b))
            } else {
                Assertion::True
            }
        })
    }

    /// Substitutes `x` (under every index) by `f(index)`.
    pub fn subst_var(&self, x: &Ident, f: &impl Fn(Option<Side>) -> AExp) -> Assertion {
        self.map_ids(&mut |id, s, is_arr| {
            if !is_arr && id == x {
                AExpOrName::Exp(f(s))
            } else {
                AExpOrName::Name(id.clone(), s)
            }
        })
    }

    /// `self[x+1/x]` for every index of `x`.
    pub fn shift_counter(&self, x: &Ident) -> Assertion {
        self.subst_var(x, &|s| AExp::add(AExp::Var(x.clone(), s), AExp::Int(1)))
    }

    /// Program identifiers mentioned, as (scalars, arrays), each with index.
    pub fn identifiers(&self) -> (BTreeSet<(Ident, Option<Side>)>, BTreeSet<(Ident, Option<Side>)>) {
        let mut scalars = BTreeSet::new();
        let mut arrays = BTreeSet::new();
        self.map_atoms(&mut |op, a, b| {
            a.collect_ids(&mut scalars, &mut arrays);
            b.collect_ids(&mut scalars, &mut arrays);
            Assertion::Cmp(op, AExp::Int(0), AExp::Int(0))
        });
        (scalars, arrays)
    }

    /// Logical variables occurring free.
    pub fn free_lvars(&self) -> BTreeSet<Ident> {
        let mut out = BTreeSet::new();
        fn aexp(e: &AExp, bound: &[Ident], out: &mut BTreeSet<Ident>) {
            match e {
                AExp::LVar(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                AExp::Int(_) | AExp::Var(..) | AExp::Len(..) => {}
                AExp::Read(a, i) => {
                    arr(a, bound, out);
                    aexp(i, bound, out);
                }
                AExp::Bin(_, a, b) => {
                    aexp(a, bound, out);
                    aexp(b, bound, out);
                }
                AExp::Un(_, a) | AExp::Abs(a) => aexp(a, bound, out),
                AExp::FirstDiff(a, b, n) => {
                    arr(a, bound, out);
                    arr(b, bound, out);
                    aexp(n, bound, out);
                }
            }
        }
        fn arr(e: &ArrExp, bound: &[Ident], out: &mut BTreeSet<Ident>) {
            if let ArrExp::Update(b, i, v) = e {
                arr(b, bound, out);
                aexp(i, bound, out);
                aexp(v, bound, out);
            }
        }
        fn go(a: &Assertion, bound: &mut Vec<Ident>, out: &mut BTreeSet<Ident>) {
            match a {
                Assertion::True | Assertion::False => {}
                Assertion::Cmp(_, x, y) => {
                    aexp(x, bound, out);
                    aexp(y, bound, out);
                }
                Assertion::Not(x) => go(x, bound, out),
                Assertion::And(x, y) | Assertion::Or(x, y) | Assertion::Implies(x, y) | Assertion::Iff(x, y) => {
                    go(x, bound, out);
                    go(y, bound, out);
                }
                Assertion::Forall(v, x) | Assertion::Exists(v, x) => {
                    bound.push(v.clone());
                    go(x, bound, out);
                    bound.pop();
                }
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Whether the logical variable `lv` occurs (free or bound) anywhere.
    pub fn mentions_lvar(&self, lv: &Ident) -> bool {
        match self {
            Assertion::True | Assertion::False => false,
            Assertion::Cmp(_, a, b) => a.has_lvar(lv) || b.has_lvar(lv),
            Assertion::Not(a) => a.mentions_lvar(lv),
            Assertion::And(a, b) | Assertion::Or(a, b) | Assertion::Implies(a, b) | Assertion::Iff(a, b) => {
                a.mentions_lvar(lv) || b.mentions_lvar(lv)
            }
            Assertion::Forall(x, a) | Assertion::Exists(x, a) => x == lv || a.mentions_lvar(lv),
        }
    }

    /// Replaces free occurrences of logical variables.
    pub fn subst_lvars(&self, f: &impl Fn(&Ident) -> Option<AExp>) -> Assertion {
        match self {
            Assertion::True | Assertion::False => self.clone(),
            Assertion::Cmp(op, a, b) => Assertion::Cmp(*op, a.map_lvars(f), b.map_lvars(f)),
            Assertion::Not(a) => Assertion::Not(Box::new(a.subst_lvars(f))),
            Assertion::And(a, b) => Assertion::And(Box::new(a.subst_lvars(f)), Box::new(b.subst_lvars(f))),
            Assertion::Or(a, b) => Assertion::Or(Box::new(a.subst_lvars(f)), Box::new(b.subst_lvars(f))),
            Assertion::Implies(a, b) => {
                Assertion::Implies(Box::new(a.subst_lvars(f)), Box::new(b.subst_lvars(f)))
            }
            Assertion::Iff(a, b) => Assertion::Iff(Box::new(a.subst_lvars(f)), Box::new(b.subst_lvars(f))),
            Assertion::Forall(x, a) | Assertion::Exists(x, a) => {
                let bound = x.clone();
                let inner = a.subst_lvars(&|v: &Ident| if *v == bound { None } else { f(v) });
                if matches!(self, Assertion::Forall(..)) {
                    Assertion::Forall(x.clone(), Box::new(inner))
                } else {
                    Assertion::Exists(x.clone(), Box::new(inner))
                }
            }
        }
    }
}

/// Identifiers an assertion mentions without a run index, split by use.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SharedUses {
    /// Scalars `x`.
    pub scalars: BTreeSet<Ident>,
    /// Arrays whose contents are read, `a[e]` or `firstdiff(a, ..)`.
    pub arrays: BTreeSet<Ident>,
    /// Arrays whose length is read, `len(a)`.
    pub lengths: BTreeSet<Ident>,
}

impl Assertion {
    /// Unindexed identifiers. In a relational assertion these denote values
    /// shared by both runs.
    pub fn shared_uses(&self) -> SharedUses {
        let mut out = SharedUses::default();
        fn arr(e: &ArrExp, out: &mut SharedUses) {
            match e {
                ArrExp::Name(a, None) => {
                    out.arrays.insert(a.clone());
                }
                ArrExp::Name(_, Some(_)) => {}
                ArrExp::Update(b, i, v) => {
                    arr(b, out);
                    aexp(i, out);
                    aexp(v, out);
                }
            }
        }
        fn aexp(e: &AExp, out: &mut SharedUses) {
            match e {
                AExp::Var(x, None) => {
                    out.scalars.insert(x.clone());
                }
                AExp::Len(a, None) => {
                    out.lengths.insert(a.clone());
                }
                AExp::Int(_) | AExp::LVar(_) | AExp::Var(..) | AExp::Len(..) => {}
                AExp::Read(a, i) => {
                    arr(a, out);
                    aexp(i, out);
                }
                AExp::Bin(_, a, b) => {
                    aexp(a, out);
                    aexp(b, out);
                }
                AExp::Un(_, a) | AExp::Abs(a) => aexp(a, out),
                AExp::FirstDiff(a, b, n) => {
                    arr(a, out);
                    arr(b, out);
                    aexp(n, out);
                }
            }
        }
        self.map_atoms(&mut |op, a, b| {
            aexp(a, &mut out);
            aexp(b, &mut out);
            Assertion::Cmp(op, AExp::Int(0), AExp::Int(0))
        });
        out
    }

    /// Integer literals occurring anywhere (used to size evaluation windows).
    pub fn max_literal(&self) -> i64 {
        fn aexp(e: &AExp) -> i64 {
            match e {
                AExp::Int(v) => v.saturating_abs(),
                AExp::LVar(_) | AExp::Var(..) | AExp::Len(..) => 0,
                AExp::Read(a, i) => arr(a).max(aexp(i)),
                AExp::Bin(_, a, b) => aexp(a).max(aexp(b)),
                AExp::Un(_, a) | AExp::Abs(a) => aexp(a),
                AExp::FirstDiff(a, b, n) => arr(a).max(arr(b)).max(aexp(n)),
            }
        }
        fn arr(e: &ArrExp) -> i64 {
            match e {
                ArrExp::Name(..) => 0,
                ArrExp::Update(b, i, v) => arr(b).max(aexp(i)).max(aexp(v)),
            }
        }
        let mut best = 0;
        self.map_atoms(&mut |op, a, b| {
            best = best.max(aexp(a)).max(aexp(b));
            Assertion::Cmp(op, AExp::Int(0), AExp::Int(0))
        });
        best
    }
}

/// Removes every run index from an expression.
pub fn strip(e: &AExp) -> AExp {
    e.map_ids(&mut |id, _, _| AExpOrName::Name(id.clone(), None))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn le(a: AExp, b: AExp) -> Assertion {
        Assertion::cmp(CmpOp::Le, a, b)
    }

    #[test]
    fn idx_collects_indices() {
        let e = AExp::add(AExp::var_at("x", Side::Left), AExp::Int(3));
        assert_eq!(e.idx(), IdxSet::only(Side::Left));
        assert!(AExp::var("x").idx().is_empty());
        let atom = le(
            AExp::read(ArrExp::Name("a".into(), Some(Side::Left)), AExp::var("i")),
            AExp::read(ArrExp::Name("a".into(), Some(Side::Right)), AExp::var("i")),
        );
        assert_eq!(atom.idx(), IdxSet { left: true, right: true });
    }

    #[test]
    fn projection_of_mixed_atom_is_true() {
        let atom = le(AExp::var_at("x", Side::Left), AExp::var_at("x", Side::Right));
        assert_eq!(atom.proj(Side::Left), Assertion::True);
        assert_eq!(atom.proj(Side::Right), Assertion::True);
    }

    #[test]
    fn projection_strips_matching_index() {
        let atom = le(AExp::var_at("x", Side::Left), AExp::Int(4));
        assert_eq!(atom.proj(Side::Left), le(AExp::var("x"), AExp::Int(4)));
        assert_eq!(atom.proj(Side::Right), Assertion::True);
        // an unindexed side is not a subset of {1} unless empty; `x@1 <= y`
        // has idx(y) = {} which is a subset of {1}
        let mixed = le(AExp::var_at("x", Side::Left), AExp::var("y"));
        assert_eq!(mixed.proj(Side::Left), le(AExp::var("x"), AExp::var("y")));
        let plain = le(AExp::var("x"), AExp::var("y"));
        assert_eq!(plain.proj(Side::Right), plain);
    }

    #[test]
    fn shift_counter_rewrites_all_indices() {
        let a = le(AExp::var_at("i", Side::Left), AExp::var("i"));
        let shifted = a.shift_counter(&Ident::new("i"));
        assert_eq!(
            shifted,
            le(
                AExp::add(AExp::var_at("i", Side::Left), AExp::Int(1)),
                AExp::add(AExp::var("i"), AExp::Int(1))
            )
        );
    }

    #[test]
    fn free_lvars_respect_binders() {
        let a = Assertion::forall("t", le(AExp::lvar("t"), AExp::lvar("k")));
        let fv = a.free_lvars();
        assert!(fv.contains(&Ident::new("k")));
        assert!(!fv.contains(&Ident::new("t")));
    }
}
