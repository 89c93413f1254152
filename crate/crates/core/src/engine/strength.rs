//! Strength of loop invariants.
//!
//! An invariant is strong at a loop site when, given the constraints `S_f`
//! the invariant rule produced, the invariant at exit determines the
//! havocked symbols `F` uniquely: no second valuation `F'` satisfies the
//! exit invariant with some `X ≠ X'`. Counterexamples through loops with
//! strong invariants correspond to real executions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Engine, EngineError, Triple};
use crate::constraint::{Formula, Term};
use crate::lang::{Cmd, Ident, Memory, Rel, Scalar, Sort, Sym, SymArray};
use crate::solver::SatStatus;
use crate::symbolic::{AnyMem, LoopSite};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strength {
    Strong,
    Weak,
    Unknown(String),
}

fn rename_scalar(s: Scalar, map: &BTreeMap<Sym, Sym>) -> Scalar {
    match s {
        Scalar::Sym(x) => Scalar::Sym(*map.get(&x).unwrap_or(&x)),
        v => v,
    }
}

fn rename_array(a: &SymArray, map: &BTreeMap<Sym, Sym>) -> SymArray {
    SymArray { content: *map.get(&a.content).unwrap_or(&a.content), len: rename_scalar(a.len, map) }
}

fn rename_rel<T: Clone + PartialEq>(v: &Rel<T>, f: impl Fn(&T) -> T) -> Rel<T> {
    match v {
        Rel::One(x) => Rel::One(f(x)),
        Rel::Pair(l, r) => Rel::Pair(f(l), f(r)),
    }
}

/// The memory with symbols renamed by `map`.
pub(crate) fn rename_mem(m: &AnyMem, map: &BTreeMap<Sym, Sym>) -> AnyMem {
    match m {
        AnyMem::Unary(m) => AnyMem::Unary(Memory {
            scalars: m.scalars.iter().map(|(k, v)| (k.clone(), rename_scalar(*v, map))).collect(),
            arrays: m.arrays.iter().map(|(k, v)| (k.clone(), rename_array(v, map))).collect(),
        }),
        AnyMem::Rel(m) => AnyMem::Rel(Memory {
            scalars: m.scalars.iter().map(|(k, v)| (k.clone(), rename_rel(v, |s| rename_scalar(*s, map)))).collect(),
            arrays: m.arrays.iter().map(|(k, v)| (k.clone(), rename_rel(v, |a| rename_array(a, map)))).collect(),
        }),
    }
}

impl Engine<'_> {
    pub(crate) fn site_strength(&mut self, id: u64, site: &LoopSite) -> Result<Strength, EngineError> {
        if let Some(s) = self.strength_cache.get(&id) {
            return Ok(s.clone());
        }
        let s = self.check_invariant_strength(site)?;
        self.strength_cache.insert(id, s.clone());
        Ok(s)
    }

    /// Decides whether the invariant of a loop site is strong:
    /// `S_f ∪ ⟨M_f'⟩(I[v2+1/x]) ∪ {⋁ X ≠ X'}` is unsatisfiable, where `M_f'`
    /// renames the havocked symbols `F` to fresh copies `F'`.
    pub fn check_invariant_strength(&mut self, site: &LoopSite) -> Result<Strength, EngineError> {
        if site.fresh.is_empty() {
            return Ok(Strength::Strong);
        }
        let map: BTreeMap<Sym, Sym> = site.fresh.iter().map(|x| (*x, self.gen.fresh(x.sort))).collect();
        let primed = rename_mem(&site.mem_f, &map);
        let env = primed.env().with_override(&site.counter, site.exit.clone());
        let post = self.translate(&env, &site.inv)?;
        let lens: Vec<SymArray> = site.mem_f.array_values();
        let h = Ident::new("__h");
        let diffs = site.fresh.iter().map(|x| {
            let x2 = Term::Sym(map[x]);
            match x.sort {
                Sort::Int => Formula::ne(Term::Sym(*x), x2),
                Sort::Array => {
                    let len = lens.iter().find(|a| a.content == *x).map(|a| Term::from(a.len)).unwrap_or(Term::Int(0));
                    let hb = Term::Bound(h.clone());
                    Formula::Exists(
                        h.clone(),
                        alloc::boxed::Box::new(Formula::and([
                            Formula::le(Term::Int(1), hb.clone()),
                            Formula::le(hb.clone(), len),
                            Formula::ne(Term::select(Term::Sym(*x), hb.clone()), Term::select(x2, hb)),
                        ])),
                    )
                }
            }
        });
        let mut fs = site.cs_f.to_vec();
        fs.extend(post.asserted());
        fs.push(Formula::or(diffs));
        Ok(match self.sat(&fs)? {
            SatStatus::Unsat => Strength::Strong,
            SatStatus::Sat => Strength::Weak,
            SatStatus::Unknown(r) => Strength::Unknown(r),
        })
    }

    /// Every loop site the invariant rule creates on feasible paths of
    /// `t`, in breadth-first order. The rule's side conditions are not
    /// discharged: strength is a property of the site alone, so it can be
    /// inspected even for invariants that fail on entry. At most `limit`
    /// configurations are expanded.
    pub fn loop_sites(&mut self, t: &Triple, limit: usize) -> Result<Vec<LoopSite>, EngineError> {
        let (mem, cs) = self.abstract_memory(t, true)?;
        let mut pending = alloc::collections::VecDeque::new();
        pending.push_back(super::Node { mem, cmd: t.body.clone(), cs, sites: Vec::new(), tainted: false });
        let mut out = Vec::new();
        let mut expanded = 0;
        while let Some(node) = pending.pop_front() {
            if expanded == limit {
                break;
            }
            expanded += 1;
            for s in self.successors(&node, t.ghost)? {
                if s.check && self.sat(&s.cs.to_vec())? == SatStatus::Unsat {
                    continue;
                }
                if let Some(site) = s.site {
                    out.push(site);
                }
                if s.cmd != Cmd::Skip {
                    pending.push_back(super::Node { mem: s.mem, cmd: s.cmd, cs: s.cs, sites: Vec::new(), tainted: false });
                }
            }
        }
        Ok(out)
    }
}
