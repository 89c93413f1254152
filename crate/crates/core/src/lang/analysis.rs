//! Syntactic analyses: projection, well-formedness, variable sets.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;

use super::ast::{Cmd, Expr, Ident, Side};

/// Projection of an expression onto one run: `⌊⟨e1|e2⌋ᵢ = eᵢ`,
/// homomorphic elsewhere.
pub fn proj_expr(side: Side, e: &Expr) -> Expr {
    match e {
        Expr::Pair(l, r) => match side {
            Side::Left => (**l).clone(),
            Side::Right => (**r).clone(),
        },
        Expr::Int(_) | Expr::Var(_) | Expr::Len(_) | Expr::Sym(_) => e.clone(),
        Expr::Read(a, i) => Expr::Read(a.clone(), Box::new(proj_expr(side, i))),
        Expr::Bin(op, a, b) => Expr::bin(*op, proj_expr(side, a), proj_expr(side, b)),
        Expr::Un(op, a) => Expr::Un(*op, Box::new(proj_expr(side, a))),
    }
}

/// Projection of a command onto one run. Loop invariants are projected with
/// the relational-assertion projection.
pub fn proj_cmd(side: Side, c: &Cmd) -> Cmd {
    match c {
        Cmd::Pair(l, r) => match side {
            Side::Left => (**l).clone(),
            Side::Right => (**r).clone(),
        },
        Cmd::Skip => Cmd::Skip,
        Cmd::Seq(a, b) => Cmd::seq(proj_cmd(side, a), proj_cmd(side, b)),
        Cmd::Assign(x, e) => Cmd::Assign(x.clone(), proj_expr(side, e)),
        Cmd::ArrAssign(a, i, v) => Cmd::ArrAssign(a.clone(), proj_expr(side, i), proj_expr(side, v)),
        Cmd::If(g, t, f) => Cmd::if_(proj_expr(side, g), proj_cmd(side, t), proj_cmd(side, f)),
        Cmd::For(x, lo, hi, b) => Cmd::For(
            x.clone(),
            proj_expr(side, lo),
            proj_expr(side, hi),
            Box::new(proj_cmd(side, b)),
        ),
        Cmd::ForInv(x, lo, hi, inv, b) => Cmd::ForInv(
            x.clone(),
            proj_expr(side, lo),
            proj_expr(side, hi),
            inv.proj(side),
            Box::new(proj_cmd(side, b)),
        ),
    }
}

fn expr_wf(e: &Expr, inside_pair: bool) -> bool {
    match e {
        Expr::Pair(l, r) => !inside_pair && expr_wf(l, true) && expr_wf(r, true),
        Expr::Int(_) | Expr::Var(_) | Expr::Len(_) | Expr::Sym(_) => true,
        Expr::Read(_, i) | Expr::Un(_, i) => expr_wf(i, inside_pair),
        Expr::Bin(_, a, b) => expr_wf(a, inside_pair) && expr_wf(b, inside_pair),
    }
}

fn cmd_wf(c: &Cmd, inside_pair: bool) -> bool {
    match c {
        Cmd::Pair(l, r) => !inside_pair && cmd_wf(l, true) && cmd_wf(r, true),
        Cmd::Skip => true,
        Cmd::Seq(a, b) => cmd_wf(a, inside_pair) && cmd_wf(b, inside_pair),
        Cmd::Assign(_, e) => expr_wf(e, inside_pair),
        Cmd::ArrAssign(_, i, v) => expr_wf(i, inside_pair) && expr_wf(v, inside_pair),
        Cmd::If(g, t, f) => expr_wf(g, inside_pair) && cmd_wf(t, inside_pair) && cmd_wf(f, inside_pair),
        Cmd::For(_, lo, hi, b) | Cmd::ForInv(_, lo, hi, _, b) => {
            expr_wf(lo, inside_pair) && expr_wf(hi, inside_pair) && cmd_wf(b, inside_pair)
        }
    }
}

/// Terms that can be checked for well-formedness.
pub trait WellFormed {
    fn well_formed(&self) -> bool;
}

impl WellFormed for Expr {
    fn well_formed(&self) -> bool {
        expr_wf(self, false)
    }
}

impl WellFormed for Cmd {
    fn well_formed(&self) -> bool {
        cmd_wf(self, false)
    }
}

/// True iff no pair occurs inside a pair. Value and memory roles are
/// enforced by the types ([`super::Rel`] cannot nest by construction).
pub fn is_well_formed<T: WellFormed + ?Sized>(t: &T) -> bool {
    t.well_formed()
}

/// Identifiers written by a command: left-hand sides of scalar and array
/// assignments and loop counters, in both branches and both sides of pairs.
pub fn updated_vars(c: &Cmd) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    collect_updated(c, &mut out);
    out
}

fn collect_updated(c: &Cmd, out: &mut BTreeSet<Ident>) {
    match c {
        Cmd::Skip => {}
        Cmd::Seq(a, b) | Cmd::Pair(a, b) | Cmd::If(_, a, b) => {
            collect_updated(a, out);
            collect_updated(b, out);
        }
        Cmd::Assign(x, _) => {
            out.insert(x.clone());
        }
        Cmd::ArrAssign(a, _, _) => {
            out.insert(a.clone());
        }
        Cmd::For(x, _, _, b) | Cmd::ForInv(x, _, _, _, b) => {
            out.insert(x.clone());
            collect_updated(b, out);
        }
    }
}

/// Scalar and array identifiers occurring in a term.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vars {
    pub scalars: BTreeSet<Ident>,
    pub arrays: BTreeSet<Ident>,
}

impl Vars {
    pub fn of_expr(e: &Expr) -> Vars {
        let mut v = Vars::default();
        v.add_expr(e);
        v
    }

    pub fn of_cmd(c: &Cmd) -> Vars {
        let mut v = Vars::default();
        v.add_cmd(c);
        v
    }

    pub fn add_expr(&mut self, e: &Expr) {
        match e {
            Expr::Int(_) | Expr::Sym(_) => {}
            Expr::Var(x) => {
                self.scalars.insert(x.clone());
            }
            Expr::Len(a) => {
                self.arrays.insert(a.clone());
            }
            Expr::Read(a, i) => {
                self.arrays.insert(a.clone());
                self.add_expr(i);
            }
            Expr::Un(_, a) => self.add_expr(a),
            Expr::Bin(_, a, b) | Expr::Pair(a, b) => {
                self.add_expr(a);
                self.add_expr(b);
            }
        }
    }

    pub fn add_cmd(&mut self, c: &Cmd) {
        match c {
            Cmd::Skip => {}
            Cmd::Seq(a, b) | Cmd::Pair(a, b) => {
                self.add_cmd(a);
                self.add_cmd(b);
            }
            Cmd::Assign(x, e) => {
                self.scalars.insert(x.clone());
                self.add_expr(e);
            }
            Cmd::ArrAssign(a, i, v) => {
                self.arrays.insert(a.clone());
                self.add_expr(i);
                self.add_expr(v);
            }
            Cmd::If(g, t, f) => {
                self.add_expr(g);
                self.add_cmd(t);
                self.add_cmd(f);
            }
            Cmd::For(x, lo, hi, b) | Cmd::ForInv(x, lo, hi, _, b) => {
                self.scalars.insert(x.clone());
                self.add_expr(lo);
                self.add_expr(hi);
                self.add_cmd(b);
                if let Cmd::ForInv(_, _, _, inv, _) = c {
                    self.add_assertion(inv);
                }
            }
        }
    }

    pub fn add_assertion(&mut self, a: &crate::assertion::Assertion) {
        let (s, arr) = a.identifiers();
        self.scalars.extend(s.into_iter().map(|(x, _)| x));
        self.arrays.extend(arr.into_iter().map(|(x, _)| x));
    }

    pub fn union(mut self, other: Vars) -> Vars {
        self.scalars.extend(other.scalars);
        self.arrays.extend(other.arrays);
        self
    }

    /// Identifiers used both as scalar and as array.
    pub fn conflicts(&self) -> BTreeSet<Ident> {
        self.scalars.intersection(&self.arrays).cloned().collect()
    }
}
