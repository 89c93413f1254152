//! SFOR: unary symbolic execution.
//!
//! Configurations are `(M, c, S)` triples. Every non-literal value computed
//! by an expression gets a fresh symbol with a defining equation in `S`, so
//! memories only ever hold integers and symbols.
//!
//! Steps never call a solver. Branching successors are flagged for an
//! eager satisfiability check, and the invariant rule returns its proof
//! obligations (entry condition and inductiveness of the invariant) for the
//! engine to discharge.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::assertion::{AExp, Assertion, CmpOp};
use crate::concrete::unary::{unroll, with_lower};
use crate::concrete::{Ghost, Rule};
use crate::constraint::translate::bin_term;
use crate::constraint::{translate, ConstraintSet, Formula, TransEnv, Translated, Translator, Term};
use crate::error::EvalError;
use crate::lang::{
    updated_vars, BinOp, Cmd, Expr, Ident, Rel, RelSymMem, Scalar, Side, Sym, SymArray, SymGen, SymMem, SymView,
    UnOp,
};

/// Executor state shared by all steps of one engine run.
pub struct Exec<'a> {
    pub gen: &'a mut SymGen,
    /// Rigid symbols standing for free logical variables.
    pub rigid: &'a mut BTreeMap<Ident, Sym>,
    pub ghost: Ghost,
    /// Number of big-step expression evaluations performed.
    pub big_steps: u64,
}

impl<'a> Exec<'a> {
    pub fn new(gen: &'a mut SymGen, rigid: &'a mut BTreeMap<Ident, Sym>, ghost: Ghost) -> Self {
        Exec { gen, rigid, ghost, big_steps: 0 }
    }

    pub fn translator(&mut self) -> Translator<'_> {
        Translator { gen: &mut *self.gen, rigid: &mut *self.rigid }
    }

    pub fn translate(&mut self, env: &TransEnv<'_>, a: &Assertion) -> Result<Translated, EvalError> {
        translate(&mut self.translator(), env, a)
    }

    fn fresh_int(&mut self) -> Sym {
        self.gen.fresh_int()
    }

    /// A fresh symbol `Z` with `Z = t` added to `cs`.
    fn name(&mut self, t: Term, cs: &mut ConstraintSet) -> Scalar {
        if let Some(v) = t.as_int() {
            return Scalar::Int(v);
        }
        let z = self.fresh_int();
        cs.push(Formula::eq(Term::Sym(z), t));
        Scalar::Sym(z)
    }

    /// `v + 1`, used for ghost counters.
    pub(crate) fn bump(&mut self, v: Scalar, cs: &mut ConstraintSet) -> Result<Scalar, EvalError> {
        match v {
            Scalar::Int(n) => n.checked_add(1).map(Scalar::Int).ok_or(EvalError::Overflow),
            Scalar::Sym(_) => Ok(self.name(Term::add(Term::from(v), Term::Int(1)), cs)),
        }
    }
}

/// Outcome of a conditional, for metrics and pruning diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Unary(bool),
    Rel(bool, bool),
}

/// Which branch a successor of a conditional (or of a loop with invariant:
/// entered / empty) took.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub guard: Expr,
    pub outcome: Outcome,
}

/// A memory of either level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyMem {
    Unary(SymMem),
    Rel(RelSymMem),
}

impl AnyMem {
    pub fn env(&self) -> TransEnv<'_> {
        match self {
            AnyMem::Unary(m) => TransEnv::unary(m),
            AnyMem::Rel(m) => TransEnv::rel(m),
        }
    }

    pub fn is_rel(&self) -> bool {
        matches!(self, AnyMem::Rel(_))
    }

    /// Every symbol the memory mentions.
    pub fn symbols(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        let mut scalar = |s: &Scalar| {
            if let Scalar::Sym(x) = s {
                out.insert(*x);
            }
        };
        let mut arrays = Vec::new();
        match self {
            AnyMem::Unary(m) => {
                m.scalars.values().for_each(&mut scalar);
                arrays.extend(m.arrays.values().copied());
            }
            AnyMem::Rel(m) => {
                for v in m.scalars.values() {
                    Side::BOTH.iter().for_each(|s| scalar(v.proj(*s)));
                }
                for v in m.arrays.values() {
                    arrays.push(*v.proj(Side::Left));
                    arrays.push(*v.proj(Side::Right));
                }
            }
        }
        for a in arrays {
            out.insert(a.content);
            if let Scalar::Sym(l) = a.len {
                out.insert(l);
            }
        }
        out
    }

    /// All array values stored (both runs for relational memories).
    pub fn array_values(&self) -> Vec<SymArray> {
        match self {
            AnyMem::Unary(m) => m.arrays.values().copied().collect(),
            AnyMem::Rel(m) => m
                .arrays
                .values()
                .flat_map(|v| [*v.proj(Side::Left), *v.proj(Side::Right)])
                .collect(),
        }
    }
}

/// What the engine needs to know about one application of the invariant
/// rule in order to check the invariant's strength later.
#[derive(Clone, Debug)]
pub struct LoopSite {
    pub counter: Ident,
    pub lo: Expr,
    pub hi: Expr,
    pub inv: Assertion,
    /// `S_f`.
    pub cs_f: ConstraintSet,
    /// `M_f`.
    pub mem_f: AnyMem,
    /// The symbols `F` generated by the havoc.
    pub fresh: Vec<Sym>,
    /// The value `v2 + 1` the invariant is instantiated at on exit.
    pub exit: Rel<Term>,
}

/// `⊨ {pre} body {post}`, to be established by a recursive proof.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub pre: Assertion,
    pub body: Cmd,
    pub post: Assertion,
    pub relational: bool,
    pub ghost: Ghost,
}

/// Side conditions of the invariant rule.
#[derive(Clone, Debug)]
pub enum Obligation {
    /// `⊨ hyps ⇒ goal`: the invariant holds on entry.
    Entry { counter: Ident, hyps: ConstraintSet, goal: Translated },
    /// The invariant is inductive.
    Body { counter: Ident, triple: Triple },
}

/// One successor configuration.
#[derive(Clone, Debug)]
pub struct Succ<M> {
    pub mem: M,
    pub cmd: Cmd,
    pub cs: ConstraintSet,
    pub rule: Rule,
    pub branch: Option<Branch>,
    /// The step added constraints that may have made `cs` unsatisfiable.
    pub check: bool,
    pub site: Option<LoopSite>,
    pub obligations: Vec<Obligation>,
}

impl<M> Succ<M> {
    pub(crate) fn plain(mem: M, cmd: Cmd, cs: ConstraintSet, rule: Rule) -> Self {
        Succ { mem, cmd, cs, rule, branch: None, check: false, site: None, obligations: Vec::new() }
    }

    pub fn map_mem<N>(self, f: impl FnOnce(M) -> N) -> Succ<N> {
        Succ {
            mem: f(self.mem),
            cmd: self.cmd,
            cs: self.cs,
            rule: self.rule,
            branch: self.branch,
            check: self.check,
            site: self.site,
            obligations: self.obligations,
        }
    }

    pub(crate) fn map_cmd(mut self, f: impl FnOnce(Cmd) -> Cmd) -> Self {
        self.cmd = f(self.cmd);
        self
    }
}

/// An SFOR configuration.
#[derive(Clone, Debug)]
pub struct UConfig {
    pub mem: SymMem,
    pub cmd: Cmd,
    pub cs: ConstraintSet,
}

fn lookup_scalar(m: &impl SymView, x: &Ident) -> Result<Scalar, EvalError> {
    m.scalar(x).ok_or_else(|| {
        if m.array(x).is_some() {
            EvalError::NotAScalar(x.clone())
        } else {
            EvalError::Unbound(x.clone())
        }
    })
}

fn lookup_array(m: &impl SymView, a: &Ident) -> Result<SymArray, EvalError> {
    m.array(a).ok_or_else(|| {
        if m.scalar(a).is_some() {
            EvalError::NotAnArray(a.clone())
        } else {
            EvalError::Unbound(a.clone())
        }
    })
}

/// Bounds constraints `1 <= i <= len` for an access.
fn in_bounds(i: Scalar, len: Scalar) -> [Formula; 2] {
    [
        Formula::le(Term::Int(1), Term::from(i)),
        Formula::le(Term::from(i), Term::from(len)),
    ]
}

fn eval_inner(ex: &mut Exec<'_>, m: &impl SymView, e: &Expr, cs: &mut ConstraintSet) -> Result<Scalar, EvalError> {
    match e {
        Expr::Int(v) => Ok(Scalar::Int(*v)),
        Expr::Sym(s) => Ok(Scalar::Sym(*s)),
        Expr::Var(x) => lookup_scalar(m, x),
        Expr::Len(a) => Ok(lookup_array(m, a)?.len),
        Expr::Read(a, i) => {
            let vi = eval_inner(ex, m, i, cs)?;
            let arr = lookup_array(m, a)?;
            let y = ex.fresh_int();
            cs.push(Formula::eq(Term::Sym(y), Term::select(Term::Sym(arr.content), Term::from(vi))));
            cs.extend(in_bounds(vi, arr.len));
            Ok(Scalar::Sym(y))
        }
        Expr::Bin(op, a, b) => {
            let va = eval_inner(ex, m, a, cs)?;
            let vb = eval_inner(ex, m, b, cs)?;
            if let (Scalar::Int(x), Scalar::Int(y)) = (va, vb) {
                return op.apply(x, y).map(Scalar::Int).ok_or(EvalError::Overflow);
            }
            Ok(ex.name(bin_term(*op, Term::from(va), Term::from(vb)), cs))
        }
        Expr::Un(op, a) => {
            let va = eval_inner(ex, m, a, cs)?;
            if let Scalar::Int(x) = va {
                return op.apply(x).map(Scalar::Int).ok_or(EvalError::Overflow);
            }
            let t = match op {
                UnOp::Neg => Term::Neg(Box::new(Term::from(va))),
                UnOp::Not => Term::flag(Formula::falsy(Term::from(va))),
            };
            Ok(ex.name(t, cs))
        }
        Expr::Pair(..) => Err(EvalError::UnexpectedPair),
    }
}

/// `⟨M, e, S⟩ ⇓SF ⟨v, S'⟩`; the new constraints are appended to `cs`.
pub fn eval_expr_s(ex: &mut Exec<'_>, m: &impl SymView, e: &Expr, cs: &mut ConstraintSet) -> Result<Scalar, EvalError> {
    ex.big_steps += 1;
    eval_inner(ex, m, e, cs)
}

/// Possible truth values of a guard value.
pub(crate) fn truth_values(v: Scalar) -> &'static [bool] {
    match v {
        Scalar::Int(n) if n > 0 => &[true],
        Scalar::Int(_) => &[false],
        Scalar::Sym(_) => &[true, false],
    }
}

/// The literal recording that `v` took truth value `b` (`true` for
/// concrete values).
pub(crate) fn guard_literal(v: Scalar, b: bool) -> Formula {
    match v {
        Scalar::Int(_) => Formula::True,
        Scalar::Sym(_) if b => Formula::truthy(Term::from(v)),
        Scalar::Sym(_) => Formula::falsy(Term::from(v)),
    }
}

/// Rejects loops whose bound expressions (or counter) the body updates.
pub(crate) fn check_bounds_stable(x: &Ident, lo: &Expr, hi: &Expr, body: &Cmd) -> Result<(), EvalError> {
    let upd = updated_vars(body);
    if upd.contains(x) {
        return Err(EvalError::BoundUpdated(x.clone()));
    }
    // Array assignments never change lengths, so `len(a)` in a bound is
    // stable; only scalars and array contents matter.
    fn deps(e: &Expr, out: &mut BTreeSet<Ident>) {
        match e {
            Expr::Int(_) | Expr::Sym(_) | Expr::Len(_) => {}
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Read(a, i) => {
                out.insert(a.clone());
                deps(i, out);
            }
            Expr::Un(_, a) => deps(a, out),
            Expr::Bin(_, a, b) | Expr::Pair(a, b) => {
                deps(a, out);
                deps(b, out);
            }
        }
    }
    let mut used = BTreeSet::new();
    deps(lo, &mut used);
    deps(hi, &mut used);
    match used.iter().find(|v| upd.contains(*v)) {
        Some(v) => Err(EvalError::BoundUpdated(v.clone())),
        None => Ok(()),
    }
}

/// Identifiers havocked by the invariant rule: the body's updated
/// variables, plus the ghost counters the body may charge.
pub(crate) fn havoc_set(body: &Cmd, ghost: Ghost) -> BTreeSet<Ident> {
    let mut upd = updated_vars(body);
    let charged: Vec<Ident> = upd.iter().filter_map(|v| ghost.counter_for(v)).collect();
    upd.extend(charged);
    upd
}

/// `{I ∧ e1 <= x ∧ x <= e2} body {I[x+1/x]}`.
pub(crate) fn loop_triple(
    x: &Ident,
    lo: &Expr,
    hi: &Expr,
    inv: &Assertion,
    body: &Cmd,
    relational: bool,
    ghost: Ghost,
) -> Result<Triple, EvalError> {
    let not_aexp = || EvalError::Relational(alloc::string::String::from("loop bound is not an assertion expression"));
    let alo = AExp::from_expr(lo, None).ok_or_else(not_aexp)?;
    let ahi = AExp::from_expr(hi, None).ok_or_else(not_aexp)?;
    let xv = AExp::Var(x.clone(), None);
    let pre = Assertion::and_all([
        inv.clone(),
        Assertion::cmp(CmpOp::Le, alo, xv.clone()),
        Assertion::cmp(CmpOp::Le, xv, ahi),
    ]);
    Ok(Triple { pre, body: body.clone(), post: inv.shift_counter(x), relational, ghost })
}

fn step_assign(ex: &mut Exec<'_>, m: &SymMem, x: &Ident, v: Scalar, cs: &mut ConstraintSet) -> Result<SymMem, EvalError> {
    if m.arrays.contains_key(x) {
        return Err(EvalError::NotAScalar(x.clone()));
    }
    let mut mem = m.clone();
    mem.scalars.insert(x.clone(), v);
    charge(ex, &mut mem, x, cs)?;
    Ok(mem)
}

fn charge(ex: &mut Exec<'_>, m: &mut SymMem, target: &Ident, cs: &mut ConstraintSet) -> Result<(), EvalError> {
    if let Some(g) = ex.ghost.counter_for(target) {
        let cur = *m.scalars.get(&g).ok_or_else(|| EvalError::Unbound(g.clone()))?;
        let next = ex.bump(cur, cs)?;
        m.scalars.insert(g, next);
    }
    Ok(())
}

/// `⟨M, c, S⟩ →SF ⟨M', c', S'⟩`: all successors.
pub fn step_s(ex: &mut Exec<'_>, cfg: &UConfig) -> Result<Vec<Succ<SymMem>>, EvalError> {
    let (m, cs) = (&cfg.mem, &cfg.cs);
    match &cfg.cmd {
        Cmd::Skip => Ok(vec![Succ::plain(m.clone(), Cmd::Skip, cs.clone(), Rule::SeqSkip)]),
        Cmd::Seq(a, b) => {
            if a.is_skip() {
                return Ok(vec![Succ::plain(m.clone(), (**b).clone(), cs.clone(), Rule::SeqSkip)]);
            }
            let inner = UConfig { mem: m.clone(), cmd: (**a).clone(), cs: cs.clone() };
            Ok(step_s(ex, &inner)?
                .into_iter()
                .map(|s| s.map_cmd(|c| Cmd::Seq(Box::new(c), b.clone())))
                .collect())
        }
        Cmd::Assign(x, e) => {
            let mut cs = cs.clone();
            let v = eval_expr_s(ex, m, e, &mut cs)?;
            let mem = step_assign(ex, m, x, v, &mut cs)?;
            Ok(vec![Succ::plain(mem, Cmd::Skip, cs, Rule::Assign)])
        }
        Cmd::ArrAssign(a, i, e) => {
            let mut cs = cs.clone();
            let vi = eval_expr_s(ex, m, i, &mut cs)?;
            let ve = eval_expr_s(ex, m, e, &mut cs)?;
            let arr = lookup_array(m, a)?;
            let mut mem = m.clone();
            mem.arrays.insert(a.clone(), write_array(ex, arr, vi, ve, &mut cs));
            charge(ex, &mut mem, a, &mut cs)?;
            Ok(vec![Succ::plain(mem, Cmd::Skip, cs, Rule::ArrAssign)])
        }
        Cmd::If(g, t, f) => {
            let mut cs = cs.clone();
            let v = eval_expr_s(ex, m, g, &mut cs)?;
            let outcomes = truth_values(v);
            Ok(outcomes
                .iter()
                .map(|&b| {
                    let (cmd, rule) = if b { ((**t).clone(), Rule::IfTrue) } else { ((**f).clone(), Rule::IfFalse) };
                    let mut s = Succ::plain(m.clone(), cmd, cs.with(guard_literal(v, b)), rule);
                    s.branch = Some(Branch { guard: g.clone(), outcome: Outcome::Unary(b) });
                    s.check = outcomes.len() > 1;
                    s
                })
                .collect())
        }
        Cmd::For(x, lo, hi, body) => {
            let mut cs = cs.clone();
            let v1 = eval_expr_s(ex, m, lo, &mut cs)?;
            let v2 = eval_expr_s(ex, m, hi, &mut cs)?;
            let (Scalar::Int(v1), Scalar::Int(v2)) = (v1, v2) else {
                return Err(EvalError::SymbolicBound);
            };
            if v1 > v2 {
                return Ok(vec![Succ::plain(m.clone(), Cmd::Skip, cs, Rule::ForEmpty)]);
            }
            let cmd = unroll(x, v1, v2, body, |next| with_lower(&cfg.cmd, next, Expr::Int(v2)))?;
            Ok(vec![Succ::plain(m.clone(), cmd, cs, Rule::ForUnroll)])
        }
        Cmd::ForInv(x, lo, hi, inv, body) => for_inv_u(ex, cfg, x, lo, hi, inv, body),
        Cmd::Pair(..) => Err(EvalError::UnexpectedPair),
    }
}

/// `Y = store(X, i, v)` plus bounds; returns the new array value.
pub(crate) fn write_array(ex: &mut Exec<'_>, arr: SymArray, i: Scalar, v: Scalar, cs: &mut ConstraintSet) -> SymArray {
    let y = ex.gen.fresh_array();
    cs.push(Formula::eq(
        Term::Sym(y),
        Term::store(Term::Sym(arr.content), Term::from(i), Term::from(v)),
    ));
    cs.extend(in_bounds(i, arr.len));
    SymArray { content: y, len: arr.len }
}

/// The empty-range and entered successors of a loop with invariant whose
/// bounds evaluated to `v1`, `v2`. Returns which of the two are possible.
pub(crate) fn range_outcomes(v1: Scalar, v2: Scalar) -> (bool, bool) {
    match (v1, v2) {
        (Scalar::Int(a), Scalar::Int(b)) => (a > b, a <= b),
        _ => (true, true),
    }
}

fn for_inv_u(
    ex: &mut Exec<'_>,
    cfg: &UConfig,
    x: &Ident,
    lo: &Expr,
    hi: &Expr,
    inv: &Assertion,
    body: &Cmd,
) -> Result<Vec<Succ<SymMem>>, EvalError> {
    let m = &cfg.mem;
    if !inv.is_unary() {
        return Err(EvalError::Relational(alloc::format!("invariant of loop over `{x}` mentions run indices")));
    }
    check_bounds_stable(x, lo, hi, body)?;
    let triple = loop_triple(x, lo, hi, inv, body, false, ex.ghost)?;
    let mut cs = cfg.cs.clone();
    let v1 = eval_expr_s(ex, m, lo, &mut cs)?;
    let v2 = eval_expr_s(ex, m, hi, &mut cs)?;
    let (t1, t2) = (Term::from(v1), Term::from(v2));
    let (empty, entered) = range_outcomes(v1, v2);
    let both = empty && entered;
    let branch = |b: bool| Some(Branch { guard: Expr::bin(BinOp::Le, lo.clone(), hi.clone()), outcome: Outcome::Unary(b) });
    let mut out = Vec::new();
    if empty {
        let mut s = Succ::plain(m.clone(), Cmd::Skip, cs.with(Formula::gt(t1.clone(), t2.clone())), Rule::ForEmpty);
        s.check = both;
        s.branch = branch(false);
        out.push(s);
    }
    if entered {
        let hyps = cs.with(Formula::le(t1.clone(), t2.clone()));
        let goal = ex.translate(&TransEnv::unary(m).with_override(x, Rel::One(t1)), inv)?;
        let mut fresh = Vec::new();
        let mut mem_f = m.clone();
        for v in havoc_set(body, ex.ghost) {
            if let Some(arr) = m.arrays.get(&v) {
                let c = ex.gen.fresh_array();
                fresh.push(c);
                mem_f.arrays.insert(v, SymArray { content: c, len: arr.len });
            } else if m.scalars.contains_key(&v) {
                let s = ex.fresh_int();
                fresh.push(s);
                mem_f.scalars.insert(v, Scalar::Sym(s));
            } else {
                return Err(EvalError::Unbound(v));
            }
        }
        mem_f.scalars.insert(x.clone(), v2);
        let exit = Rel::One(Term::add(t2, Term::Int(1)));
        let post = ex.translate(&TransEnv::unary(&mem_f).with_override(x, exit.clone()), inv)?;
        let mut cs_f = hyps.clone();
        cs_f.extend(post.asserted());
        let site = LoopSite {
            counter: x.clone(),
            lo: lo.clone(),
            hi: hi.clone(),
            inv: inv.clone(),
            cs_f: cs_f.clone(),
            mem_f: AnyMem::Unary(mem_f.clone()),
            fresh,
            exit,
        };
        let mut s = Succ::plain(mem_f, Cmd::Skip, cs_f, Rule::ForInv);
        s.check = both;
        s.branch = branch(true);
        s.site = Some(site);
        s.obligations = vec![
            Obligation::Entry { counter: x.clone(), hyps, goal },
            Obligation::Body { counter: x.clone(), triple },
        ];
        out.push(s);
    }
    Ok(out)
}

/// Runs a unary configuration along a single path, for loop-free programs
/// whose guards are all concrete; used by tests.
pub fn run_concrete_path(ex: &mut Exec<'_>, cfg: UConfig, fuel: u64) -> Result<UConfig, EvalError> {
    let mut cur = cfg;
    let mut left = fuel;
    while !cur.cmd.is_skip() {
        if left == 0 {
            return Err(EvalError::OutOfFuel);
        }
        left -= 1;
        let mut succ = step_s(ex, &cur)?;
        if succ.len() != 1 {
            return Err(EvalError::Symbolic);
        }
        let s = succ.pop().expect("one successor");
        cur = UConfig { mem: s.mem, cmd: s.cmd, cs: s.cs };
    }
    Ok(cur)
}
