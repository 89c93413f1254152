//! Reductions of relational specifications to unary ones: self-composition
//! and (syntactic) product programs.
//!
//! Both rename every identifier of run `k` with the suffix `k` and rewrite
//! the relational pre- and postcondition accordingly: `x@k` becomes `xk`,
//! and an identifier used without index becomes `x1` together with the
//! side condition that both copies agree. Every array additionally gets
//! `len(a1) = len(a2)` in the precondition, matching the relational
//! convention that the two runs of an array have the same length. The
//! ghost cost is split into `gamma1`/`gamma2` (see [`Ghost::Split`]).

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::assertion::{AExp, AExpOrName, ArrExp, Assertion, CmpOp};
use crate::concrete::{Ghost, GAMMA, INTERNAL_PREFIX};
use crate::lang::{proj_expr, BinOp, Cmd, Expr, Ident, Side, Vars};
use crate::symbolic::Triple;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaselineError {
    /// Renaming `x` would clash with an existing identifier.
    Collision(Ident),
    Unsupported(String),
}

impl fmt::Display for BaselineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineError::Collision(x) => {
                write!(f, "cannot rename `{x}`: its suffixed copies already occur in the specification")
            }
            BaselineError::Unsupported(s) => write!(f, "unsupported: {s}"),
        }
    }
}

fn suffix(side: Side) -> &'static str {
    match side {
        Side::Left => "1",
        Side::Right => "2",
    }
}

fn rn(x: &Ident, side: Side) -> Ident {
    x.suffixed(suffix(side))
}

/// The command run `side` executes, with pair commands resolved but
/// expressions and invariants left as they are.
fn side_cmd(c: &Cmd, side: Side) -> Cmd {
    match c {
        Cmd::Pair(l, r) => match side {
            Side::Left => (**l).clone(),
            Side::Right => (**r).clone(),
        },
        Cmd::Seq(a, b) => Cmd::seq(side_cmd(a, side), side_cmd(b, side)),
        Cmd::If(g, t, f) => Cmd::if_(g.clone(), side_cmd(t, side), side_cmd(f, side)),
        Cmd::For(x, lo, hi, b) => Cmd::For(x.clone(), lo.clone(), hi.clone(), Box::new(side_cmd(b, side))),
        Cmd::ForInv(x, lo, hi, inv, b) => {
            Cmd::ForInv(x.clone(), lo.clone(), hi.clone(), inv.clone(), Box::new(side_cmd(b, side)))
        }
        other => other.clone(),
    }
}

fn rename_expr(e: &Expr, side: Side) -> Expr {
    fn go(e: &Expr, side: Side) -> Expr {
        match e {
            Expr::Var(x) => Expr::Var(rn(x, side)),
            Expr::Read(a, i) => Expr::Read(rn(a, side), Box::new(go(i, side))),
            Expr::Len(a) => Expr::Len(rn(a, side)),
            Expr::Bin(op, a, b) => Expr::bin(*op, go(a, side), go(b, side)),
            Expr::Un(op, a) => Expr::Un(*op, Box::new(go(a, side))),
            other => other.clone(),
        }
    }
    go(&proj_expr(side, e), side)
}

/// A unary assertion about run `side`, renamed into that copy.
fn rename_unary(a: &Assertion, side: Side) -> Assertion {
    a.proj(side).map_ids(&mut |x, _, _| AExpOrName::Name(rn(x, side), None))
}

/// A relational assertion over the renamed copies. Unindexed identifiers
/// other than those in `exempt` get agreement side conditions.
fn rename_rel(a: &Assertion, exempt: &[Ident]) -> Assertion {
    let shared = a.shared_uses();
    let body = a.map_ids(&mut |x, s, _| AExpOrName::Name(rn(x, s.unwrap_or(Side::Left)), None));
    let mut conds = Vec::new();
    for x in shared.scalars.iter().filter(|x| !exempt.contains(x)) {
        conds.push(Assertion::cmp(
            CmpOp::Eq,
            AExp::Var(rn(x, Side::Left), None),
            AExp::Var(rn(x, Side::Right), None),
        ));
    }
    for a in &shared.arrays {
        conds.push(arrays_agree(a));
    }
    conds.push(body);
    Assertion::and_all(conds)
}

/// `∀h. 1 <= h && h <= len(a1) ==> a1[h] = a2[h]`.
fn arrays_agree(a: &Ident) -> Assertion {
    let h = Ident::new("__h");
    let hv = || AExp::LVar(h.clone());
    let (a1, a2) = (rn(a, Side::Left), rn(a, Side::Right));
    Assertion::Forall(
        h.clone(),
        Box::new(Assertion::implies(
            Assertion::and(
                Assertion::cmp(CmpOp::Le, AExp::Int(1), hv()),
                Assertion::cmp(CmpOp::Le, hv(), AExp::Len(a1.clone(), None)),
            ),
            Assertion::cmp(
                CmpOp::Eq,
                AExp::read(ArrExp::Name(a1, None), hv()),
                AExp::read(ArrExp::Name(a2, None), hv()),
            ),
        )),
    )
}

/// A copy of run `side` of `c`: expressions projected and renamed, loop
/// invariants projected onto the run and renamed.
fn rename_cmd(c: &Cmd, side: Side) -> Cmd {
    match c {
        Cmd::Skip => Cmd::Skip,
        Cmd::Seq(a, b) => Cmd::seq(rename_cmd(a, side), rename_cmd(b, side)),
        Cmd::Assign(x, e) => Cmd::Assign(rn(x, side), rename_expr(e, side)),
        Cmd::ArrAssign(a, i, v) => Cmd::ArrAssign(rn(a, side), rename_expr(i, side), rename_expr(v, side)),
        Cmd::If(g, t, f) => Cmd::if_(rename_expr(g, side), rename_cmd(t, side), rename_cmd(f, side)),
        Cmd::For(x, lo, hi, b) => {
            Cmd::For(rn(x, side), rename_expr(lo, side), rename_expr(hi, side), Box::new(rename_cmd(b, side)))
        }
        Cmd::ForInv(x, lo, hi, inv, b) => Cmd::ForInv(
            rn(x, side),
            rename_expr(lo, side),
            rename_expr(hi, side),
            rename_unary(inv, side),
            Box::new(rename_cmd(b, side)),
        ),
        Cmd::Pair(l, r) => match side {
            Side::Left => rename_cmd(l, side),
            Side::Right => rename_cmd(r, side),
        },
    }
}

/// Every identifier of the specification, and a check that the renamed
/// copies are fresh.
fn check_names(t: &Triple) -> Result<Vars, BaselineError> {
    let mut vars = Vars::of_cmd(&t.body);
    vars.add_assertion(&t.pre);
    vars.add_assertion(&t.post);
    let all: BTreeSet<Ident> = vars.scalars.iter().chain(vars.arrays.iter()).cloned().collect();
    for x in &all {
        if x.as_str() == GAMMA || x.as_str().starts_with(INTERNAL_PREFIX) {
            continue;
        }
        if Side::BOTH.iter().any(|s| all.contains(&rn(x, *s))) {
            return Err(BaselineError::Collision(x.clone()));
        }
    }
    Ok(vars)
}

fn unary_spec(t: &Triple, body: Cmd, vars: &Vars) -> Triple {
    let mut pre = alloc::vec![rename_rel(&t.pre, &[])];
    for a in &vars.arrays {
        pre.push(Assertion::cmp(
            CmpOp::Eq,
            AExp::Len(rn(a, Side::Left), None),
            AExp::Len(rn(a, Side::Right), None),
        ));
    }
    Triple {
        pre: Assertion::and_all(pre),
        body,
        post: rename_rel(&t.post, &[]),
        relational: false,
        ghost: if t.ghost == Ghost::Off { Ghost::Off } else { Ghost::Split },
    }
}

fn require_relational(t: &Triple) -> Result<(), BaselineError> {
    if !t.relational {
        return Err(BaselineError::Unsupported(String::from("the specification is not relational")));
    }
    Ok(())
}

/// `c⟨1⟩; c⟨2⟩` with the specification rewritten over the copies.
pub fn self_compose(t: &Triple) -> Result<Triple, BaselineError> {
    require_relational(t)?;
    let vars = check_names(t)?;
    let body = Cmd::seq(rename_cmd(&t.body, Side::Left), rename_cmd(&t.body, Side::Right));
    Ok(unary_spec(t, body, &vars))
}

/// The product program of the two runs of `t`, with the specification
/// rewritten over the copies.
pub fn product(t: &Triple) -> Result<Triple, BaselineError> {
    require_relational(t)?;
    let vars = check_names(t)?;
    let body = product_program(&side_cmd(&t.body, Side::Left), &side_cmd(&t.body, Side::Right));
    Ok(unary_spec(t, body, &vars))
}

fn flatten(c: &Cmd, out: &mut Vec<Cmd>) {
    match c {
        Cmd::Skip => {}
        Cmd::Seq(a, b) => {
            flatten(a, out);
            flatten(b, out);
        }
        other => out.push(other.clone()),
    }
}

struct Product {
    next: u32,
}

impl Product {
    fn snapshot(&mut self, what: &str) -> (Ident, Ident) {
        let n = self.next;
        self.next += 1;
        (Ident::new(&format!("__{what}{n}_l")), Ident::new(&format!("__{what}{n}_r")))
    }

    fn build(&mut self, c1: &Cmd, c2: &Cmd) -> Cmd {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        flatten(c1, &mut a);
        flatten(c2, &mut b);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            match (&a[i], &b[j]) {
                (Cmd::If(g1, t1, f1), Cmd::If(g2, t2, f2)) => {
                    out.push(self.branch4(g1, t1, f1, g2, t2, f2));
                    i += 1;
                    j += 1;
                }
                (Cmd::If(..), _) => {
                    out.push(rename_cmd(&b[j], Side::Right));
                    j += 1;
                }
                (Cmd::For(..) | Cmd::ForInv(..), Cmd::For(..) | Cmd::ForInv(..)) => {
                    out.push(self.loops(&a[i], &b[j]));
                    i += 1;
                    j += 1;
                }
                (Cmd::For(..) | Cmd::ForInv(..), other) if !matches!(other, Cmd::If(..)) => {
                    out.push(rename_cmd(other, Side::Right));
                    j += 1;
                }
                (x, _) => {
                    out.push(rename_cmd(x, Side::Left));
                    i += 1;
                }
            }
        }
        out.extend(a[i..].iter().map(|c| rename_cmd(c, Side::Left)));
        out.extend(b[j..].iter().map(|c| rename_cmd(c, Side::Right)));
        Cmd::seq_all(out)
    }

    /// Both guards are evaluated before either branch runs.
    fn branch4(&mut self, g1: &Expr, t1: &Cmd, f1: &Cmd, g2: &Expr, t2: &Cmd, f2: &Cmd) -> Cmd {
        let (s1, s2) = self.snapshot("g");
        let tt = self.build(t1, t2);
        let tf = self.build(t1, f2);
        let ft = self.build(f1, t2);
        let ff = self.build(f1, f2);
        Cmd::seq_all([
            Cmd::Assign(s1.clone(), rename_expr(g1, Side::Left)),
            Cmd::Assign(s2.clone(), rename_expr(g2, Side::Right)),
            Cmd::if_(
                Expr::Var(s1),
                Cmd::if_(Expr::Var(s2.clone()), tt, tf),
                Cmd::if_(Expr::Var(s2), ft, ff),
            ),
        ])
    }

    /// Loops whose bounds are the same expressions (up to renaming) run in
    /// lockstep when their bounds evaluate equally; otherwise, and for
    /// differently shaped loops, they run one after the other.
    fn loops(&mut self, l1: &Cmd, l2: &Cmd) -> Cmd {
        let sequential = Cmd::seq(rename_cmd(l1, Side::Left), rename_cmd(l2, Side::Right));
        let (x1, lo1, hi1, inv1, b1) = parts(l1);
        let (x2, lo2, hi2, inv2, b2) = parts(l2);
        let same_shape = inv1.is_some() == inv2.is_some();
        let same_bounds =
            proj_expr(Side::Left, lo1) == proj_expr(Side::Right, lo2) && proj_expr(Side::Left, hi1) == proj_expr(Side::Right, hi2);
        if !same_shape || !same_bounds {
            return sequential;
        }
        let (lo_l, lo_r) = self.snapshot("lo");
        let (hi_l, hi_r) = self.snapshot("hi");
        let (c1, c2) = (rn(x1, Side::Left), rn(x2, Side::Right));
        let body = Cmd::seq(Cmd::Assign(c2.clone(), Expr::Var(c1.clone())), self.build(b1, b2));
        let (lo, hi) = (Expr::Var(lo_l.clone()), Expr::Var(hi_l.clone()));
        let fused = match (inv1, inv2) {
            (Some(i1), Some(i2)) => {
                let inv = if i1 == i2 && !i1.is_unary() {
                    rename_rel(i1, &[x1.clone()])
                } else {
                    Assertion::and(rename_unary(i1, Side::Left), rename_unary(i2, Side::Right))
                };
                let inv = inv.subst_var(&c2, &|_| AExp::Var(c1.clone(), None));
                Cmd::ForInv(c1, lo, hi, inv, Box::new(body))
            }
            _ => Cmd::For(c1, lo, hi, Box::new(body)),
        };
        let agree = Expr::bin(
            BinOp::And,
            Expr::bin(BinOp::Eq, Expr::Var(lo_l.clone()), Expr::Var(lo_r.clone())),
            Expr::bin(BinOp::Eq, Expr::Var(hi_l.clone()), Expr::Var(hi_r.clone())),
        );
        Cmd::seq_all([
            Cmd::Assign(lo_l, rename_expr(lo1, Side::Left)),
            Cmd::Assign(lo_r, rename_expr(lo2, Side::Right)),
            Cmd::Assign(hi_l, rename_expr(hi1, Side::Left)),
            Cmd::Assign(hi_r, rename_expr(hi2, Side::Right)),
            Cmd::if_(agree, fused, sequential),
        ])
    }
}

fn parts(c: &Cmd) -> (&Ident, &Expr, &Expr, Option<&Assertion>, &Cmd) {
    match c {
        Cmd::For(x, lo, hi, b) => (x, lo, hi, None, b),
        Cmd::ForInv(x, lo, hi, inv, b) => (x, lo, hi, Some(inv), b),
        _ => unreachable!("parts of a non-loop"),
    }
}

/// The product of two (pair-free) commands over renamed copies: run 1's
/// identifiers get suffix `1`, run 2's suffix `2`. Conditionals at the same
/// position merge into a four-way branch over snapshots of both guards;
/// loops with the same bounds fuse; everything else is interleaved.
pub fn product_program(c1: &Cmd, c2: &Cmd) -> Cmd {
    Product { next: 0 }.build(c1, c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::relational::run_r;
    use crate::concrete::unary::run_u;
    use crate::lang::{merge_mem, ConcArray, ConcMem, RelConcMem};
    use alloc::vec;

    fn inc() -> Cmd {
        Cmd::assign("p", Expr::bin(BinOp::Add, Expr::var("p"), Expr::Int(1)))
    }

    fn spec(body: Cmd) -> Triple {
        let eq = Assertion::cmp(CmpOp::Eq, AExp::var_at("p", Side::Left), AExp::var_at("p", Side::Right));
        Triple { pre: eq.clone(), body, post: eq, relational: true, ghost: Ghost::Off }
    }

    #[test]
    fn self_composition_renames_both_copies() {
        let t = self_compose(&spec(inc())).unwrap();
        let p1 = Cmd::assign("p1", Expr::bin(BinOp::Add, Expr::var("p1"), Expr::Int(1)));
        let p2 = Cmd::assign("p2", Expr::bin(BinOp::Add, Expr::var("p2"), Expr::Int(1)));
        assert_eq!(t.body, Cmd::seq(p1, p2));
        assert_eq!(t.pre, Assertion::cmp(CmpOp::Eq, AExp::var("p1"), AExp::var("p2")));
        assert!(!t.relational);
        assert_eq!(self_compose(&spec(Cmd::Skip)).unwrap().body, Cmd::seq(Cmd::Skip, Cmd::Skip));
    }

    #[test]
    fn collisions_are_rejected() {
        let body = Cmd::seq(inc(), Cmd::assign("p1", Expr::Int(0)));
        assert_eq!(self_compose(&spec(body)), Err(BaselineError::Collision(Ident::new("p"))));
    }

    fn split(m: &ConcMem) -> RelConcMem {
        let side = |s: &str| {
            let mut out = ConcMem::new();
            for (k, v) in &m.scalars {
                if let Some(base) = k.as_str().strip_suffix(s) {
                    if !k.as_str().starts_with("__") {
                        out.scalars.insert(Ident::new(base), *v);
                    }
                }
            }
            for (k, v) in &m.arrays {
                if let Some(base) = k.as_str().strip_suffix(s) {
                    out.arrays.insert(Ident::new(base), v.clone());
                }
            }
            out
        };
        merge_mem(&side("1"), &side("2")).unwrap()
    }

    fn join(m: &RelConcMem) -> ConcMem {
        let mut out = ConcMem::new();
        for s in Side::BOTH {
            let p = m.proj(s);
            for (k, v) in p.scalars {
                out.scalars.insert(rn(&k, s), v);
            }
            for (k, v) in p.arrays {
                out.arrays.insert(rn(&k, s), v);
            }
        }
        out
    }

    #[test]
    fn product_of_conditionals_matches_relational_runs() {
        let c = Cmd::if_(
            Expr::bin(BinOp::Lt, Expr::var("x"), Expr::read("a", Expr::Int(1))),
            Cmd::seq(inc(), Cmd::ArrAssign(Ident::new("a"), Expr::Int(2), Expr::var("p"))),
            Cmd::assign("x", Expr::Int(7)),
        );
        let prod = product_program(&c, &c);
        for (x1, x2) in [(0, 0), (0, 9), (9, 0), (9, 9)] {
            let m = RelConcMem::new()
                .with_scalar("x", crate::lang::Rel::new(x1, x2))
                .with_scalar("p", crate::lang::Rel::One(1))
                .with_array("a", crate::lang::Rel::One(ConcArray(vec![5, 0])));
            let expect = run_r(&m, &c, 1000, Ghost::Off).unwrap();
            let got = run_u(&join(&m), &prod, 1000, Ghost::Off).unwrap();
            assert_eq!(split(&got), expect);
        }
    }

    #[test]
    fn loops_with_equal_bounds_fuse() {
        let l = Cmd::For(
            Ident::new("i"),
            Expr::Int(1),
            Expr::Len(Ident::new("a")),
            Box::new(Cmd::ArrAssign(Ident::new("a"), Expr::var("i"), Expr::var("i"))),
        );
        let prod = product_program(&l, &l);
        let mut flat = Vec::new();
        flatten(&prod, &mut flat);
        assert!(matches!(flat.last(), Some(Cmd::If(_, t, _)) if matches!(**t, Cmd::For(..))));
        let m = RelConcMem::new().with_array("a", crate::lang::Rel::new(ConcArray(vec![0, 0]), ConcArray(vec![0, 3])));
        let m = m.with_scalar("i", crate::lang::Rel::One(0));
        let expect = run_r(&m, &l, 1000, Ghost::Off).unwrap();
        let got = run_u(&join(&m), &prod, 1000, Ghost::Off).unwrap();
        assert_eq!(split(&got), expect);
    }
}
