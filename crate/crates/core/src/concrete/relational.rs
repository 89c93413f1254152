//! RFOR: concrete relational execution of two runs sharing one command.

use alloc::boxed::Box;
use alloc::vec::Vec;

use super::unary::{eval_expr_u, step_u, unroll, with_lower};
use super::{Ghost, Rule};
use crate::error::EvalError;
use crate::lang::{
    merge_mem, proj_cmd, proj_expr, Cmd, ConcArray, Expr, Ident, Rel, RelConcMem, Side,
};

/// `⟨M, e⟩ ⇓RF v`: both projections evaluated separately; equal results
/// collapse to a single value.
pub fn eval_expr_r(m: &RelConcMem, e: &Expr) -> Result<Rel<i64>, EvalError> {
    let l = eval_expr_u(&m.proj(Side::Left), &proj_expr(Side::Left, e)).map_err(|x| x.on_side(Side::Left))?;
    let r = eval_expr_u(&m.proj(Side::Right), &proj_expr(Side::Right, e)).map_err(|x| x.on_side(Side::Right))?;
    Ok(Rel::new(l, r))
}

/// How pair commands are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Step the left side unless it is `skip`.
    LeftFirst,
    /// Return one successor per side that can step.
    Exhaustive,
}

/// Result of one RFOR step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RStep {
    pub mem: RelConcMem,
    pub cmd: Cmd,
    pub rule: Rule,
}

fn charge(m: &mut RelConcMem, ghost: Ghost, target: &Ident) -> Result<(), EvalError> {
    if let Some(g) = ghost.counter_for(target) {
        let cur = m.scalars.get(&g).ok_or_else(|| EvalError::Unbound(g.clone()))?;
        let l = cur.proj(Side::Left).checked_add(1).ok_or(EvalError::Overflow)?;
        let r = cur.proj(Side::Right).checked_add(1).ok_or(EvalError::Overflow)?;
        m.scalars.insert(g, Rel::new(l, r));
    }
    Ok(())
}

fn both(v: &Rel<i64>) -> (i64, i64) {
    (*v.proj(Side::Left), *v.proj(Side::Right))
}

fn step_side(m: &RelConcMem, c: &Cmd, side: Side, ghost: Ghost) -> Result<(RelConcMem, Cmd, Rule), EvalError> {
    let mine = m.proj(side);
    let s = step_u(&mine, c, ghost).map_err(|e| e.on_side(side))?;
    let other = m.proj(side.other());
    let mem = match side {
        Side::Left => merge_mem(&s.mem, &other)?,
        Side::Right => merge_mem(&other, &s.mem)?,
    };
    Ok((mem, s.cmd, s.rule))
}

/// `⟨M, c⟩ →RF ⟨M', c'⟩`. Only pair commands are nondeterministic; with
/// [`Schedule::LeftFirst`] the result has exactly one element.
pub fn step_r(m: &RelConcMem, c: &Cmd, ghost: Ghost, sched: Schedule) -> Result<Vec<RStep>, EvalError> {
    let one = |mem: RelConcMem, cmd: Cmd, rule: Rule| Ok(alloc::vec![RStep { mem, cmd, rule }]);
    match c {
        Cmd::Skip => one(m.clone(), Cmd::Skip, Rule::SeqSkip),
        Cmd::Seq(a, b) => {
            if a.is_skip() {
                return one(m.clone(), (**b).clone(), Rule::SeqSkip);
            }
            Ok(step_r(m, a, ghost, sched)?
                .into_iter()
                .map(|s| RStep { mem: s.mem, cmd: Cmd::Seq(Box::new(s.cmd), b.clone()), rule: s.rule })
                .collect())
        }
        Cmd::Assign(x, e) => {
            let v = eval_expr_r(m, e)?;
            if m.arrays.contains_key(x) {
                return Err(EvalError::NotAScalar(x.clone()));
            }
            let mut mem = m.clone();
            mem.scalars.insert(x.clone(), v);
            charge(&mut mem, ghost, x)?;
            one(mem, Cmd::Skip, Rule::Assign)
        }
        Cmd::ArrAssign(a, i, e) => {
            let vi = eval_expr_r(m, i)?;
            let ve = eval_expr_r(m, e)?;
            let cur = m.arrays.get(a).ok_or_else(|| EvalError::Unbound(a.clone()))?;
            let write = |arr: &ConcArray, idx: i64, v: i64, side: Side| {
                arr.set(idx, v).ok_or_else(|| {
                    EvalError::OutOfBounds { array: a.clone(), index: idx, len: arr.len() }.on_side(side)
                })
            };
            let (next, rule) = match (cur, &vi, &ve) {
                (Rel::One(arr), Rel::One(idx), Rel::One(v)) => {
                    (Rel::One(write(arr, *idx, *v, Side::Left)?), Rule::ArrAssign)
                }
                _ => {
                    let (i1, i2) = both(&vi);
                    let (v1, v2) = both(&ve);
                    let l = write(cur.proj(Side::Left), i1, v1, Side::Left)?;
                    let r = write(cur.proj(Side::Right), i2, v2, Side::Right)?;
                    let rule = if cur.is_pair() { Rule::ArrAssign } else { Rule::ArrAssignSplit };
                    (Rel::new(l, r), rule)
                }
            };
            let mut mem = m.clone();
            mem.arrays.insert(a.clone(), next);
            charge(&mut mem, ghost, a)?;
            one(mem, Cmd::Skip, rule)
        }
        Cmd::If(g, t, f) => {
            let (g1, g2) = both(&eval_expr_r(m, g)?);
            match (g1 > 0, g2 > 0) {
                (true, true) => one(m.clone(), (**t).clone(), Rule::IfTrue),
                (false, false) => one(m.clone(), (**f).clone(), Rule::IfFalse),
                (l, r) => {
                    let pick = |b: bool| if b { &**t } else { &**f };
                    let cmd = Cmd::pair(proj_cmd(Side::Left, pick(l)), proj_cmd(Side::Right, pick(r)));
                    one(m.clone(), cmd, Rule::IfSplit)
                }
            }
        }
        Cmd::For(x, lo, hi, body) | Cmd::ForInv(x, lo, hi, _, body) => {
            let vlo = eval_expr_r(m, lo)?;
            let vhi = eval_expr_r(m, hi)?;
            match (&vlo, &vhi) {
                (Rel::One(v1), Rel::One(v2)) => {
                    if v1 > v2 {
                        return one(m.clone(), Cmd::Skip, Rule::ForEmpty);
                    }
                    let cmd = unroll(x, *v1, *v2, body, |next| with_lower(c, next, Expr::Int(*v2)))?;
                    one(m.clone(), cmd, Rule::ForUnroll)
                }
                _ => one(
                    m.clone(),
                    Cmd::pair(proj_cmd(Side::Left, c), proj_cmd(Side::Right, c)),
                    Rule::ForSplit,
                ),
            }
        }
        Cmd::Pair(c1, c2) => {
            if c1.is_skip() && c2.is_skip() {
                return one(m.clone(), Cmd::Skip, Rule::PairSkip);
            }
            let sides: &[Side] = match (sched, c1.is_skip(), c2.is_skip()) {
                (_, true, _) => &[Side::Right],
                (_, _, true) | (Schedule::LeftFirst, _, _) => &[Side::Left],
                (Schedule::Exhaustive, false, false) => &[Side::Left, Side::Right],
            };
            let mut out = Vec::new();
            for &side in sides {
                let (mem, cmd, rule) = match side {
                    Side::Left => step_side(m, c1, side, ghost)?,
                    Side::Right => step_side(m, c2, side, ghost)?,
                };
                let cmd = match side {
                    Side::Left => Cmd::pair(cmd, (**c2).clone()),
                    Side::Right => Cmd::pair((**c1).clone(), cmd),
                };
                out.push(RStep { mem, cmd, rule });
            }
            Ok(out)
        }
    }
}

/// Runs `c` to `skip` with left-first scheduling, calling `observe` after
/// every step.
pub fn run_r_observed(
    m: &RelConcMem,
    c: &Cmd,
    fuel: u64,
    ghost: Ghost,
    mut observe: impl FnMut(&Cmd, &RStep),
) -> Result<RelConcMem, EvalError> {
    let mut mem = m.clone();
    let mut cmd = c.clone();
    let mut left = fuel;
    while !cmd.is_skip() {
        if left == 0 {
            return Err(EvalError::OutOfFuel);
        }
        left -= 1;
        let s = step_r(&mem, &cmd, ghost, Schedule::LeftFirst)?
            .pop()
            .expect("left-first scheduling yields one successor");
        observe(&cmd, &s);
        mem = s.mem;
        cmd = s.cmd;
    }
    Ok(mem)
}

/// `⟨M, c⟩ →RF* ⟨M', skip⟩` under left-first scheduling.
pub fn run_r(m: &RelConcMem, c: &Cmd, fuel: u64, ghost: Ghost) -> Result<RelConcMem, EvalError> {
    run_r_observed(m, c, fuel, ghost, |_, _| {})
}

/// All final memories reachable under every pair scheduling. `fuel` bounds
/// the total number of explored steps.
pub fn run_r_all(m: &RelConcMem, c: &Cmd, fuel: u64, ghost: Ghost) -> Result<Vec<RelConcMem>, EvalError> {
    let mut finals: Vec<RelConcMem> = Vec::new();
    let mut work = alloc::vec![(m.clone(), c.clone())];
    let mut left = fuel;
    while let Some((mem, cmd)) = work.pop() {
        if cmd.is_skip() {
            if !finals.contains(&mem) {
                finals.push(mem);
            }
            continue;
        }
        if left == 0 {
            return Err(EvalError::OutOfFuel);
        }
        left -= 1;
        for s in step_r(&mem, &cmd, ghost, Schedule::Exhaustive)? {
            work.push((s.mem, s.cmd));
        }
    }
    Ok(finals)
}
