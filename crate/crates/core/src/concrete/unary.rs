//! FOR: concrete unary expressions and small-step commands.

use alloc::boxed::Box;

use super::{Ghost, Rule};
use crate::error::EvalError;
use crate::lang::{BinOp, Cmd, ConcArray, ConcMem, Expr, Ident};

/// `⟨M, e⟩ ⇓F v`.
pub fn eval_expr_u(m: &ConcMem, e: &Expr) -> Result<i64, EvalError> {
    match e {
        Expr::Int(v) => Ok(*v),
        Expr::Var(x) => scalar(m, x),
        Expr::Len(a) => Ok(array(m, a)?.len() as i64),
        Expr::Read(a, i) => {
            let idx = eval_expr_u(m, i)?;
            let arr = array(m, a)?;
            arr.get(idx).ok_or_else(|| EvalError::OutOfBounds {
                array: a.clone(),
                index: idx,
                len: arr.len(),
            })
        }
        Expr::Bin(op, a, b) => {
            let va = eval_expr_u(m, a)?;
            let vb = eval_expr_u(m, b)?;
            op.apply(va, vb).ok_or(EvalError::Overflow)
        }
        Expr::Un(op, a) => op.apply(eval_expr_u(m, a)?).ok_or(EvalError::Overflow),
        Expr::Sym(_) => Err(EvalError::Symbolic),
        Expr::Pair(..) => Err(EvalError::UnexpectedPair),
    }
}

fn scalar(m: &ConcMem, x: &Ident) -> Result<i64, EvalError> {
    match m.scalars.get(x) {
        Some(v) => Ok(*v),
        None if m.arrays.contains_key(x) => Err(EvalError::NotAScalar(x.clone())),
        None => Err(EvalError::Unbound(x.clone())),
    }
}

fn array<'m>(m: &'m ConcMem, a: &Ident) -> Result<&'m ConcArray, EvalError> {
    match m.arrays.get(a) {
        Some(v) => Ok(v),
        None if m.scalars.contains_key(a) => Err(EvalError::NotAnArray(a.clone())),
        None => Err(EvalError::Unbound(a.clone())),
    }
}

/// Result of one FOR step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UStep {
    pub mem: ConcMem,
    pub cmd: Cmd,
    pub rule: Rule,
}

/// Charges one unit of ghost cost for an assignment to `target`.
pub(crate) fn charge(m: &mut ConcMem, ghost: Ghost, target: &Ident) -> Result<(), EvalError> {
    if let Some(g) = ghost.counter_for(target) {
        let cur = m.scalars.get_mut(&g).ok_or(EvalError::Unbound(g))?;
        *cur = cur.checked_add(1).ok_or(EvalError::Overflow)?;
    }
    Ok(())
}

/// The unrolling `x := v1; c; if v2 - v1 then <loop from v1+1> else skip`
/// of a loop whose bounds evaluated to `v1 <= v2`; `rest` rebuilds the
/// residual loop from its new lower bound.
pub(crate) fn unroll(
    x: &Ident,
    v1: i64,
    v2: i64,
    body: &Cmd,
    rest: impl FnOnce(Expr) -> Cmd,
) -> Result<Cmd, EvalError> {
    let next = v1.checked_add(1).ok_or(EvalError::Overflow)?;
    let gap = v2.checked_sub(v1).ok_or(EvalError::Overflow)?;
    Ok(Cmd::seq(
        Cmd::Assign(x.clone(), Expr::Int(v1)),
        Cmd::seq(body.clone(), Cmd::if_(Expr::Int(gap), rest(Expr::Int(next)), Cmd::Skip)),
    ))
}

/// Rebuilds a loop (with or without invariant) with a new lower bound.
pub(crate) fn with_lower(c: &Cmd, lo: Expr, hi: Expr) -> Cmd {
    match c {
        Cmd::For(x, _, _, b) => Cmd::For(x.clone(), lo, hi, b.clone()),
        Cmd::ForInv(x, _, _, inv, b) => Cmd::ForInv(x.clone(), lo, hi, inv.clone(), b.clone()),
        _ => unreachable!("with_lower on a non-loop"),
    }
}

/// `⟨M, c⟩ →F ⟨M', c'⟩`. Loop invariants are ignored at this level.
pub fn step_u(m: &ConcMem, c: &Cmd, ghost: Ghost) -> Result<UStep, EvalError> {
    match c {
        Cmd::Skip => Ok(UStep { mem: m.clone(), cmd: Cmd::Skip, rule: Rule::SeqSkip }),
        Cmd::Seq(a, b) => {
            if a.is_skip() {
                return Ok(UStep { mem: m.clone(), cmd: (**b).clone(), rule: Rule::SeqSkip });
            }
            let s = step_u(m, a, ghost)?;
            Ok(UStep { mem: s.mem, cmd: Cmd::Seq(Box::new(s.cmd), b.clone()), rule: s.rule })
        }
        Cmd::Assign(x, e) => {
            let v = eval_expr_u(m, e)?;
            if m.arrays.contains_key(x) {
                return Err(EvalError::NotAScalar(x.clone()));
            }
            let mut mem = m.clone();
            mem.scalars.insert(x.clone(), v);
            charge(&mut mem, ghost, x)?;
            Ok(UStep { mem, cmd: Cmd::Skip, rule: Rule::Assign })
        }
        Cmd::ArrAssign(a, i, e) => {
            let idx = eval_expr_u(m, i)?;
            let v = eval_expr_u(m, e)?;
            let arr = array(m, a)?;
            let next = arr.set(idx, v).ok_or_else(|| EvalError::OutOfBounds {
                array: a.clone(),
                index: idx,
                len: arr.len(),
            })?;
            let mut mem = m.clone();
            mem.arrays.insert(a.clone(), next);
            charge(&mut mem, ghost, a)?;
            Ok(UStep { mem, cmd: Cmd::Skip, rule: Rule::ArrAssign })
        }
        Cmd::If(g, t, f) => {
            if eval_expr_u(m, g)? > 0 {
                Ok(UStep { mem: m.clone(), cmd: (**t).clone(), rule: Rule::IfTrue })
            } else {
                Ok(UStep { mem: m.clone(), cmd: (**f).clone(), rule: Rule::IfFalse })
            }
        }
        Cmd::For(x, lo, hi, body) | Cmd::ForInv(x, lo, hi, _, body) => {
            let v1 = eval_expr_u(m, lo)?;
            let v2 = eval_expr_u(m, hi)?;
            if v1 > v2 {
                return Ok(UStep { mem: m.clone(), cmd: Cmd::Skip, rule: Rule::ForEmpty });
            }
            let cmd = unroll(x, v1, v2, body, |next| with_lower(c, next, Expr::Int(v2)))?;
            Ok(UStep { mem: m.clone(), cmd, rule: Rule::ForUnroll })
        }
        Cmd::Pair(..) => Err(EvalError::UnexpectedPair),
    }
}

/// Runs `c` to `skip`, calling `observe` after every step.
pub fn run_u_observed(
    m: &ConcMem,
    c: &Cmd,
    fuel: u64,
    ghost: Ghost,
    mut observe: impl FnMut(&Cmd, &UStep),
) -> Result<ConcMem, EvalError> {
    let mut mem = m.clone();
    let mut cmd = c.clone();
    let mut left = fuel;
    while !cmd.is_skip() {
        if left == 0 {
            return Err(EvalError::OutOfFuel);
        }
        left -= 1;
        let s = step_u(&mem, &cmd, ghost)?;
        observe(&cmd, &s);
        mem = s.mem;
        cmd = s.cmd;
    }
    Ok(mem)
}

/// `⟨M, c⟩ →F* ⟨M', skip⟩`; `fuel` bounds the number of steps.
pub fn run_u(m: &ConcMem, c: &Cmd, fuel: u64, ghost: Ghost) -> Result<ConcMem, EvalError> {
    run_u_observed(m, c, fuel, ghost, |_, _| {})
}

/// Convenience: `a[i] := v` command.
pub fn arr_assign(a: &str, i: Expr, v: Expr) -> Cmd {
    Cmd::ArrAssign(Ident::new(a), i, v)
}

/// Convenience: `x + k`.
pub fn plus(e: Expr, k: i64) -> Expr {
    Expr::bin(BinOp::Add, e, Expr::Int(k))
}
