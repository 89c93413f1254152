//! Abstract initial memories.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use super::{Engine, EngineError, Triple};
use crate::assertion::{AExp, Assertion, CmpOp};
use crate::constraint::{ConstraintSet, Formula, Term};
use crate::lang::{Ident, Rel, RelSymMem, Scalar, Side, SymArray, SymMem, Vars};
use crate::symbolic::AnyMem;

/// Array lengths fixed by top-level conjuncts `len(a) = n` of a
/// precondition, keyed by array and run index, and propagated through
/// top-level conjuncts `len(a) = len(b)`.
fn literal_lengths(pre: &Assertion) -> BTreeMap<(Ident, Option<Side>), i64> {
    let mut out = BTreeMap::new();
    let mut links = Vec::new();
    for c in pre.conjuncts() {
        if let Assertion::Cmp(CmpOp::Eq, a, b) = c {
            match (a, b) {
                (AExp::Len(x, s), AExp::Int(n)) | (AExp::Int(n), AExp::Len(x, s)) if *n >= 0 => {
                    out.insert((x.clone(), *s), *n);
                }
                (AExp::Len(x, s), AExp::Len(y, t)) => links.push(((x.clone(), *s), (y.clone(), *t))),
                _ => {}
            }
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for (a, b) in &links {
            match (out.get(a).copied(), out.get(b).copied()) {
                (Some(n), None) => {
                    out.insert(b.clone(), n);
                    changed = true;
                }
                (None, Some(n)) => {
                    out.insert(a.clone(), n);
                    changed = true;
                }
                _ => {}
            }
        }
    }
    out
}

/// Identifiers equated across runs by top-level conjuncts `x@1 = x@2`
/// (scalars).
fn equated(pre: &Assertion) -> BTreeSet<Ident> {
    let mut scalars = BTreeSet::new();
    for c in pre.conjuncts() {
        if let Assertion::Cmp(CmpOp::Eq, a, b) = c {
            match (a, b) {
                (AExp::Var(x, Some(s1)), AExp::Var(y, Some(s2))) if x == y && s1 != s2 => {
                    scalars.insert(x.clone());
                }
                _ => {}
            }
        }
    }
    scalars
}

impl Engine<'_> {
    /// The initial configuration of a triple: a memory binding every
    /// identifier of the command and both assertions to fresh symbols, and
    /// the constraints asserting the precondition.
    ///
    /// Array lengths fixed by a top-level `len(a) = n` conjunct are
    /// concrete. Relational memories give an array the same length in both
    /// runs. For relational triples, values the precondition uses
    /// without a run index (or equates across runs at top level) are bound
    /// to a single symbol shared by both runs. Ghost counters start at 0
    /// for top-level triples (`top`) and are arbitrary otherwise.
    pub fn abstract_memory(&mut self, t: &Triple, top: bool) -> Result<(AnyMem, ConstraintSet), EngineError> {
        let mut vars = Vars::of_cmd(&t.body);
        vars.add_assertion(&t.pre);
        vars.add_assertion(&t.post);
        let clash = vars.conflicts();
        if let Some(x) = clash.iter().next() {
            return Err(EngineError::Spec(format!("`{x}` is used both as a scalar and as an array")));
        }
        let counters: Vec<Ident> = t.ghost.counters().iter().map(|g| Ident::new(g)).collect();
        for g in &counters {
            if vars.arrays.contains(g) {
                return Err(EngineError::Spec(format!("ghost counter `{g}` is used as an array")));
            }
            vars.scalars.remove(g);
        }
        let lits = literal_lengths(&t.pre);
        let mut cs = ConstraintSet::new();
        let fresh_len = |eng: &mut Self, cs: &mut ConstraintSet| {
            let l = eng.gen.fresh_int();
            cs.push(Formula::le(Term::Int(0), Term::Sym(l)));
            Scalar::Sym(l)
        };
        let mem = if !t.relational {
            let mut m = SymMem::new();
            for x in &vars.scalars {
                m.scalars.insert(x.clone(), Scalar::Sym(self.gen.fresh_int()));
            }
            for a in &vars.arrays {
                let len = match lits.get(&(a.clone(), None)) {
                    Some(n) => Scalar::Int(*n),
                    None => fresh_len(self, &mut cs),
                };
                m.arrays.insert(a.clone(), SymArray { content: self.gen.fresh_array(), len });
            }
            for g in &counters {
                let v = if top { Scalar::Int(0) } else { Scalar::Sym(self.gen.fresh_int()) };
                m.scalars.insert(g.clone(), v);
            }
            AnyMem::Unary(m)
        } else {
            let uses = t.pre.shared_uses();
            let eq_scalars = equated(&t.pre);
            let mut m = RelSymMem::new();
            for x in &vars.scalars {
                let v = if uses.scalars.contains(x) || eq_scalars.contains(x) {
                    Rel::One(Scalar::Sym(self.gen.fresh_int()))
                } else {
                    Rel::Pair(Scalar::Sym(self.gen.fresh_int()), Scalar::Sym(self.gen.fresh_int()))
                };
                m.scalars.insert(x.clone(), v);
            }
            for a in &vars.arrays {
                let lit = |s: Side| lits.get(&(a.clone(), Some(s))).copied();
                let known = lits.get(&(a.clone(), None)).copied().or(lit(Side::Left)).or(lit(Side::Right));
                let len1 = match known {
                    Some(n) => Scalar::Int(n),
                    None => fresh_len(self, &mut cs),
                };
                let len2 = len1;
                let v = if uses.arrays.contains(a) {
                    Rel::One(SymArray { content: self.gen.fresh_array(), len: len1 })
                } else {
                    Rel::new(
                        SymArray { content: self.gen.fresh_array(), len: len1 },
                        SymArray { content: self.gen.fresh_array(), len: len2 },
                    )
                };
                m.arrays.insert(a.clone(), v);
            }
            for g in &counters {
                let v = if top {
                    Rel::One(Scalar::Int(0))
                } else if uses.scalars.contains(g) || eq_scalars.contains(g) {
                    Rel::One(Scalar::Sym(self.gen.fresh_int()))
                } else {
                    Rel::Pair(Scalar::Sym(self.gen.fresh_int()), Scalar::Sym(self.gen.fresh_int()))
                };
                m.scalars.insert(g.clone(), v);
            }
            AnyMem::Rel(m)
        };
        let pre = self.translate(&mem.env(), &t.pre)?;
        cs.extend(pre.asserted());
        Ok((mem, cs))
    }
}
