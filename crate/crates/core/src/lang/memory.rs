//! Memories for the four language levels.
//!
//! A memory is a pair of finite maps, one for scalar variables and one for
//! array names. The role (concrete/symbolic, unary/relational) is carried by
//! the codomain types; see the aliases below.

use alloc::collections::BTreeMap;
use core::fmt;

use super::ast::{Ident, Side};
use super::value::{ConcArray, Rel, Scalar, SymArray};
use crate::error::StructError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// FOR: integers and concrete arrays.
    UConc,
    /// RFOR: concrete values, possibly paired.
    RConc,
    /// SFOR: integers/symbols and symbolic arrays.
    USym,
    /// RSFOR: symbolic values, possibly paired.
    RSym,
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct Memory<S, A> {
    pub scalars: BTreeMap<Ident, S>,
    pub arrays: BTreeMap<Ident, A>,
}

pub type ConcMem = Memory<i64, ConcArray>;
pub type RelConcMem = Memory<Rel<i64>, Rel<ConcArray>>;
pub type SymMem = Memory<Scalar, SymArray>;
pub type RelSymMem = Memory<Rel<Scalar>, Rel<SymArray>>;

pub trait HasRole {
    const ROLE: Role;
}

impl HasRole for ConcMem {
    const ROLE: Role = Role::UConc;
}
impl HasRole for RelConcMem {
    const ROLE: Role = Role::RConc;
}
impl HasRole for SymMem {
    const ROLE: Role = Role::USym;
}
impl HasRole for RelSymMem {
    const ROLE: Role = Role::RSym;
}

impl<S, A> Memory<S, A> {
    pub fn new() -> Self {
        Memory {
            scalars: BTreeMap::new(),
            arrays: BTreeMap::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.scalars.is_empty() && self.arrays.is_empty()
    }

    pub fn with_scalar(mut self, x: &str, v: S) -> Self {
        self.scalars.insert(Ident::new(x), v);
        self
    }

    pub fn with_array(mut self, a: &str, v: A) -> Self {
        self.arrays.insert(Ident::new(a), v);
        self
    }

    pub fn scalar(&self, x: &Ident) -> Option<&S> {
        self.scalars.get(x)
    }

    pub fn array(&self, a: &Ident) -> Option<&A> {
        self.arrays.get(a)
    }

    fn same_domain<S2, A2>(&self, other: &Memory<S2, A2>) -> bool {
        self.scalars.len() == other.scalars.len()
            && self.arrays.len() == other.arrays.len()
            && self.scalars.keys().all(|k| other.scalars.contains_key(k))
            && self.arrays.keys().all(|k| other.arrays.contains_key(k))
    }
}

impl<S: Clone + PartialEq, A: Clone + PartialEq> Memory<Rel<S>, Rel<A>> {
    /// Pointwise projection onto one run.
    pub fn proj(&self, side: Side) -> Memory<S, A> {
        Memory {
            scalars: self
                .scalars
                .iter()
                .map(|(k, v)| (k.clone(), v.proj(side).clone()))
                .collect(),
            arrays: self
                .arrays
                .iter()
                .map(|(k, v)| (k.clone(), v.proj(side).clone()))
                .collect(),
        }
    }

    /// Relational memory whose two projections are both `m`.
    pub fn lift(m: &Memory<S, A>) -> Self {
        Memory {
            scalars: m
                .scalars
                .iter()
                .map(|(k, v)| (k.clone(), Rel::One(v.clone())))
                .collect(),
            arrays: m
                .arrays
                .iter()
                .map(|(k, v)| (k.clone(), Rel::One(v.clone())))
                .collect(),
        }
    }

    /// Merges two unary memories with equal domains, using a pair only where
    /// the two entries differ.
    pub fn merge(m1: &Memory<S, A>, m2: &Memory<S, A>) -> Result<Self, StructError> {
        if !m1.same_domain(m2) {
            return Err(StructError::DomainMismatch);
        }
        Ok(Memory {
            scalars: m1
                .scalars
                .iter()
                .map(|(k, v)| (k.clone(), Rel::new(v.clone(), m2.scalars[k].clone())))
                .collect(),
            arrays: m1
                .arrays
                .iter()
                .map(|(k, v)| (k.clone(), Rel::new(v.clone(), m2.arrays[k].clone())))
                .collect(),
        })
    }
}

/// `merge` for FOR memories. Arrays sharing a name must have equal lengths
/// in both runs.
pub fn merge_mem(m1: &ConcMem, m2: &ConcMem) -> Result<RelConcMem, StructError> {
    for (a, v) in &m1.arrays {
        if let Some(w) = m2.arrays.get(a) {
            if v.len() != w.len() {
                return Err(StructError::LengthMismatch(a.clone()));
            }
        }
    }
    RelConcMem::merge(m1, m2)
}

/// `merge_sym` for SFOR memories; entries are compared structurally.
pub fn merge_sym_mem(m1: &SymMem, m2: &SymMem) -> Result<RelSymMem, StructError> {
    RelSymMem::merge(m1, m2)
}

/// Read access to a unary symbolic memory, possibly through a projection.
pub trait SymView {
    fn scalar(&self, x: &Ident) -> Option<Scalar>;
    fn array(&self, a: &Ident) -> Option<SymArray>;
}

impl SymView for SymMem {
    fn scalar(&self, x: &Ident) -> Option<Scalar> {
        self.scalars.get(x).copied()
    }
    fn array(&self, a: &Ident) -> Option<SymArray> {
        self.arrays.get(a).copied()
    }
}

/// One projection of a relational symbolic memory, without copying it.
pub struct ProjView<'a>(pub &'a RelSymMem, pub Side);

impl SymView for ProjView<'_> {
    fn scalar(&self, x: &Ident) -> Option<Scalar> {
        self.0.scalars.get(x).map(|v| *v.proj(self.1))
    }
    fn array(&self, a: &Ident) -> Option<SymArray> {
        self.0.arrays.get(a).map(|v| *v.proj(self.1))
    }
}

impl<S: fmt::Display, A: fmt::Display> fmt::Display for Memory<S, A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (k, v) in &self.scalars {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{k} -> {v}")?;
        }
        for (k, v) in &self.arrays {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{k} -> {v}")?;
        }
        f.write_str("}")
    }
}

impl<S: fmt::Display, A: fmt::Display> fmt::Debug for Memory<S, A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
