//! RSFOR: relational symbolic execution.
//!
//! A relational configuration executes one command for two runs at once.
//! Values on which the runs agree are kept unary; branching on a guard the
//! runs may disagree on splits the command into a pair, whose sides are
//! then executed by the unary semantics and re-merged.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::assertion::Assertion;
use crate::concrete::relational::Schedule;
use crate::concrete::unary::{unroll, with_lower};
use crate::concrete::Rule;
use crate::constraint::{ConstraintSet, Formula, TransEnv, Term};
use crate::error::EvalError;
use crate::lang::{
    merge_sym_mem, proj_cmd, proj_expr, BinOp, Cmd, Expr, Ident, ProjView, Rel, RelSymMem, Scalar, Side, SymArray,
};
use crate::symbolic::{
    check_bounds_stable, eval_expr_s, guard_literal, havoc_set, loop_triple, range_outcomes, step_s, truth_values,
    write_array, AnyMem, Branch, Exec, LoopSite, Obligation, Outcome, Succ, UConfig,
};

/// An RSFOR configuration.
#[derive(Clone, Debug)]
pub struct RConfig {
    pub mem: RelSymMem,
    pub cmd: Cmd,
    pub cs: ConstraintSet,
}

/// True iff `e` reads only values shared by both runs. The length of a
/// paired array is shared when both runs agree on it.
fn is_unary_in(m: &RelSymMem, e: &Expr) -> bool {
    match e {
        Expr::Int(_) | Expr::Sym(_) => true,
        Expr::Pair(..) => false,
        Expr::Var(x) => !m.scalars.get(x).is_some_and(Rel::is_pair),
        Expr::Len(a) => match m.arrays.get(a) {
            Some(Rel::Pair(l, r)) => l.len == r.len,
            _ => true,
        },
        Expr::Read(a, i) => !m.arrays.get(a).is_some_and(Rel::is_pair) && is_unary_in(m, i),
        Expr::Un(_, a) => is_unary_in(m, a),
        Expr::Bin(_, a, b) => is_unary_in(m, a) && is_unary_in(m, b),
    }
}

/// `⟨M, e, S⟩ ⇓RSF ⟨v, S'⟩`. An expression that only reads values shared
/// by both runs is evaluated once; otherwise each projection is evaluated
/// in its run and the results are paired (collapsing identical results).
pub fn eval_expr_rs(ex: &mut Exec<'_>, m: &RelSymMem, e: &Expr, cs: &mut ConstraintSet) -> Result<Rel<Scalar>, EvalError> {
    if is_unary_in(m, e) {
        return Ok(Rel::One(eval_expr_s(ex, &ProjView(m, Side::Left), e, cs)?));
    }
    let l = eval_expr_s(ex, &ProjView(m, Side::Left), &proj_expr(Side::Left, e), cs)
        .map_err(|x| x.on_side(Side::Left))?;
    let r = eval_expr_s(ex, &ProjView(m, Side::Right), &proj_expr(Side::Right, e), cs)
        .map_err(|x| x.on_side(Side::Right))?;
    Ok(Rel::new(l, r))
}

fn charge(ex: &mut Exec<'_>, m: &mut RelSymMem, target: &Ident, cs: &mut ConstraintSet) -> Result<(), EvalError> {
    if let Some(g) = ex.ghost.counter_for(target) {
        let cur = m.scalars.get(&g).cloned().ok_or_else(|| EvalError::Unbound(g.clone()))?;
        let next = match cur {
            Rel::One(v) => Rel::One(ex.bump(v, cs)?),
            Rel::Pair(l, r) => Rel::new(ex.bump(l, cs)?, ex.bump(r, cs)?),
        };
        m.scalars.insert(g, next);
    }
    Ok(())
}

fn pair_of_projections(c: &Cmd) -> Cmd {
    Cmd::pair(proj_cmd(Side::Left, c), proj_cmd(Side::Right, c))
}

fn is_if(c: &Cmd) -> bool {
    matches!(c.redex(), Cmd::If(..))
}

/// Which sides of a pair command step next.
fn schedule(c1: &Cmd, c2: &Cmd, sched: Schedule) -> &'static [Side] {
    match (c1.is_skip(), c2.is_skip()) {
        (true, _) => &[Side::Right],
        (_, true) => &[Side::Left],
        _ if is_if(c1) && !is_if(c2) => &[Side::Right],
        _ if is_if(c2) && !is_if(c1) => &[Side::Left],
        _ => match sched {
            Schedule::LeftFirst => &[Side::Left],
            Schedule::Exhaustive => &[Side::Left, Side::Right],
        },
    }
}

/// `⟨M, c, S⟩ →RSF ⟨M', c', S'⟩`: all successors.
pub fn step_rs(ex: &mut Exec<'_>, cfg: &RConfig, sched: Schedule) -> Result<Vec<Succ<RelSymMem>>, EvalError> {
    let (m, cs) = (&cfg.mem, &cfg.cs);
    match &cfg.cmd {
        Cmd::Skip => Ok(vec![Succ::plain(m.clone(), Cmd::Skip, cs.clone(), Rule::SeqSkip)]),
        Cmd::Seq(a, b) => {
            if a.is_skip() {
                return Ok(vec![Succ::plain(m.clone(), (**b).clone(), cs.clone(), Rule::SeqSkip)]);
            }
            let inner = RConfig { mem: m.clone(), cmd: (**a).clone(), cs: cs.clone() };
            Ok(step_rs(ex, &inner, sched)?
                .into_iter()
                .map(|s| s.map_cmd(|c| Cmd::Seq(Box::new(c), b.clone())))
                .collect())
        }
        Cmd::Assign(x, e) => {
            let mut cs = cs.clone();
            let v = eval_expr_rs(ex, m, e, &mut cs)?;
            if m.arrays.contains_key(x) {
                return Err(EvalError::NotAScalar(x.clone()));
            }
            let mut mem = m.clone();
            mem.scalars.insert(x.clone(), v);
            charge(ex, &mut mem, x, &mut cs)?;
            Ok(vec![Succ::plain(mem, Cmd::Skip, cs, Rule::Assign)])
        }
        Cmd::ArrAssign(a, i, e) => {
            let mut cs = cs.clone();
            let vi = eval_expr_rs(ex, m, i, &mut cs)?;
            let ve = eval_expr_rs(ex, m, e, &mut cs)?;
            let cur = m.arrays.get(a).cloned().ok_or_else(|| {
                if m.scalars.contains_key(a) {
                    EvalError::NotAnArray(a.clone())
                } else {
                    EvalError::Unbound(a.clone())
                }
            })?;
            let (next, rule) = match (&cur, &vi, &ve) {
                (Rel::One(arr), Rel::One(idx), Rel::One(v)) => {
                    (Rel::One(write_array(ex, *arr, *idx, *v, &mut cs)), Rule::ArrAssign)
                }
                _ => {
                    let side = |s: Side, ex: &mut Exec<'_>, cs: &mut ConstraintSet| -> SymArray {
                        write_array(ex, *cur.proj(s), *vi.proj(s), *ve.proj(s), cs)
                    };
                    let l = side(Side::Left, ex, &mut cs);
                    let r = side(Side::Right, ex, &mut cs);
                    let rule = if cur.is_pair() { Rule::ArrAssign } else { Rule::ArrAssignSplit };
                    (Rel::Pair(l, r), rule)
                }
            };
            let mut mem = m.clone();
            mem.arrays.insert(a.clone(), next);
            charge(ex, &mut mem, a, &mut cs)?;
            Ok(vec![Succ::plain(mem, Cmd::Skip, cs, rule)])
        }
        Cmd::If(g, t, f) => {
            let mut cs = cs.clone();
            let v = eval_expr_rs(ex, m, g, &mut cs)?;
            let pick = |b: bool| if b { &**t } else { &**f };
            let outcomes: Vec<(bool, bool)> = match v {
                Rel::One(s) => truth_values(s).iter().map(|&b| (b, b)).collect(),
                Rel::Pair(l, r) => [(true, true), (false, false), (true, false), (false, true)]
                    .into_iter()
                    .filter(|(b1, b2)| truth_values(l).contains(b1) && truth_values(r).contains(b2))
                    .collect(),
            };
            let n = outcomes.len();
            Ok(outcomes
                .into_iter()
                .map(|(b1, b2)| {
                    let lits = match v {
                        Rel::One(s) => vec![guard_literal(s, b1)],
                        Rel::Pair(l, r) => vec![guard_literal(l, b1), guard_literal(r, b2)],
                    };
                    let mut next = cs.clone();
                    next.extend(lits);
                    let (cmd, rule) = match (b1, b2) {
                        (true, true) => (pick(true).clone(), Rule::IfTrue),
                        (false, false) => (pick(false).clone(), Rule::IfFalse),
                        _ => (
                            Cmd::pair(proj_cmd(Side::Left, pick(b1)), proj_cmd(Side::Right, pick(b2))),
                            Rule::IfSplit,
                        ),
                    };
                    let mut s = Succ::plain(m.clone(), cmd, next, rule);
                    s.branch = Some(Branch { guard: g.clone(), outcome: Outcome::Rel(b1, b2) });
                    s.check = n > 1;
                    s
                })
                .collect())
        }
        Cmd::For(x, lo, hi, body) => {
            let mut cs = cs.clone();
            let vlo = eval_expr_rs(ex, m, lo, &mut cs)?;
            let vhi = eval_expr_rs(ex, m, hi, &mut cs)?;
            match (vlo, vhi) {
                (Rel::One(Scalar::Int(v1)), Rel::One(Scalar::Int(v2))) => {
                    if v1 > v2 {
                        return Ok(vec![Succ::plain(m.clone(), Cmd::Skip, cs, Rule::ForEmpty)]);
                    }
                    let cmd = unroll(x, v1, v2, body, |next| with_lower(&cfg.cmd, next, Expr::Int(v2)))?;
                    Ok(vec![Succ::plain(m.clone(), cmd, cs, Rule::ForUnroll)])
                }
                (Rel::One(_), Rel::One(_)) => Err(EvalError::SymbolicBound),
                _ => Ok(vec![Succ::plain(m.clone(), pair_of_projections(&cfg.cmd), cs, Rule::ForSplit)]),
            }
        }
        Cmd::ForInv(x, lo, hi, inv, body) => for_inv_r(ex, cfg, x, lo, hi, inv, body),
        Cmd::Pair(c1, c2) => {
            if c1.is_skip() && c2.is_skip() {
                return Ok(vec![Succ::plain(m.clone(), Cmd::Skip, cs.clone(), Rule::PairSkip)]);
            }
            let mut out = Vec::new();
            for &side in schedule(c1, c2, sched) {
                let (mine, other) = match side {
                    Side::Left => (c1, c2),
                    Side::Right => (c2, c1),
                };
                let inner = UConfig { mem: m.proj(side), cmd: (**mine).clone(), cs: cs.clone() };
                let rest = m.proj(side.other());
                for s in step_s(ex, &inner).map_err(|e| e.on_side(side))? {
                    let merged = match side {
                        Side::Left => merge_sym_mem(&s.mem, &rest),
                        Side::Right => merge_sym_mem(&rest, &s.mem),
                    }?;
                    let cmd = match side {
                        Side::Left => Cmd::pair(s.cmd.clone(), (**other).clone()),
                        Side::Right => Cmd::pair((**other).clone(), s.cmd.clone()),
                    };
                    out.push(s.map_mem(|_| merged).map_cmd(|_| cmd));
                }
            }
            Ok(out)
        }
    }
}

/// The relational invariant rule, for loops whose bounds agree in both
/// runs. Loops whose bounds may differ are split into a pair of unary
/// loops with projected invariants, since the two runs need not iterate
/// in lockstep.
fn for_inv_r(
    ex: &mut Exec<'_>,
    cfg: &RConfig,
    x: &Ident,
    lo: &Expr,
    hi: &Expr,
    inv: &Assertion,
    body: &Cmd,
) -> Result<Vec<Succ<RelSymMem>>, EvalError> {
    let m = &cfg.mem;
    check_bounds_stable(x, lo, hi, body)?;
    let mut cs = cfg.cs.clone();
    let vlo = eval_expr_rs(ex, m, lo, &mut cs)?;
    let vhi = eval_expr_rs(ex, m, hi, &mut cs)?;
    let (Rel::One(v1), Rel::One(v2)) = (vlo, vhi) else {
        return Ok(vec![Succ::plain(m.clone(), pair_of_projections(&cfg.cmd), cs, Rule::ForSplit)]);
    };
    let triple = loop_triple(x, lo, hi, inv, body, true, ex.ghost)?;
    let (t1, t2) = (Term::from(v1), Term::from(v2));
    let (empty, entered) = range_outcomes(v1, v2);
    let both = empty && entered;
    let branch = |b: bool| Some(Branch { guard: Expr::bin(BinOp::Le, lo.clone(), hi.clone()), outcome: Outcome::Rel(b, b) });
    let mut out = Vec::new();
    if empty {
        let mut s = Succ::plain(m.clone(), Cmd::Skip, cs.with(Formula::gt(t1.clone(), t2.clone())), Rule::ForEmpty);
        s.check = both;
        s.branch = branch(false);
        out.push(s);
    }
    if entered {
        let hyps = cs.with(Formula::le(t1.clone(), t2.clone()));
        let goal = ex.translate(&TransEnv::rel(m).with_override(x, Rel::One(t1)), inv)?;
        let mut fresh = Vec::new();
        let mut mem_f = m.clone();
        for v in havoc_set(body, ex.ghost) {
            if let Some(arr) = m.arrays.get(&v) {
                let (c1, c2) = (ex.gen.fresh_array(), ex.gen.fresh_array());
                fresh.extend([c1, c2]);
                let l = SymArray { content: c1, len: arr.proj(Side::Left).len };
                let r = SymArray { content: c2, len: arr.proj(Side::Right).len };
                mem_f.arrays.insert(v, Rel::Pair(l, r));
            } else if m.scalars.contains_key(&v) {
                let (s1, s2) = (ex.gen.fresh_int(), ex.gen.fresh_int());
                fresh.extend([s1, s2]);
                mem_f.scalars.insert(v, Rel::Pair(Scalar::Sym(s1), Scalar::Sym(s2)));
            } else {
                return Err(EvalError::Unbound(v));
            }
        }
        mem_f.scalars.insert(x.clone(), Rel::One(v2));
        let exit = Rel::One(Term::add(t2, Term::Int(1)));
        let post = ex.translate(&TransEnv::rel(&mem_f).with_override(x, exit.clone()), inv)?;
        let mut cs_f = hyps.clone();
        cs_f.extend(post.asserted());
        let site = LoopSite {
            counter: x.clone(),
            lo: lo.clone(),
            hi: hi.clone(),
            inv: inv.clone(),
            cs_f: cs_f.clone(),
            mem_f: AnyMem::Rel(mem_f.clone()),
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
