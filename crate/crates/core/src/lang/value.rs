use alloc::vec::Vec;
use core::fmt;

use super::ast::Side;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Int,
    Array,
}

/// A symbolic value. The serial number is unique per [`SymGen`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym {
    pub id: u32,
    pub sort: Sort,
}

impl fmt::Debug for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.id)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.id)
    }
}

/// Monotone fresh-symbol allocator.
#[derive(Clone, Debug, Default)]
pub struct SymGen {
    next: u32,
}

impl SymGen {
    pub fn new() -> Self {
        SymGen { next: 0 }
    }

    /// Allocator whose first symbol is `start`; used to partition id spaces.
    pub fn starting_at(start: u32) -> Self {
        SymGen { next: start }
    }

    pub fn fresh(&mut self, sort: Sort) -> Sym {
        let id = self.next;
        self.next = self.next.checked_add(1).expect("symbol counter overflow");
        Sym { id, sort }
    }

    pub fn fresh_int(&mut self) -> Sym {
        self.fresh(Sort::Int)
    }

    pub fn fresh_array(&mut self) -> Sym {
        self.fresh(Sort::Array)
    }

    /// Number of symbols handed out so far (the next serial).
    pub fn peek(&self) -> u32 {
        self.next
    }
}

/// Integer-level value at the symbolic languages: `Z ∪ Symval`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scalar {
    Int(i64),
    Sym(Sym),
}

impl Scalar {
    pub fn as_int(self) -> Option<i64> {
        match self {
            Scalar::Int(v) => Some(v),
            Scalar::Sym(_) => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Sym(s) => write!(f, "{s}"),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Int(v)
    }
}

impl From<Sym> for Scalar {
    fn from(s: Sym) -> Self {
        Scalar::Sym(s)
    }
}

/// Symbolic array `(X, l)`: content symbol and (concrete or symbolic) length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymArray {
    pub content: Sym,
    pub len: Scalar,
}

impl fmt::Display for SymArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.content, self.len)
    }
}

/// A value that is either the same in both runs or a pair of per-run values.
///
/// [`Rel::new`] collapses structurally equal components, so a `Pair` always
/// holds two different values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel<T> {
    One(T),
    Pair(T, T),
}

impl<T: PartialEq> Rel<T> {
    pub fn new(left: T, right: T) -> Self {
        if left == right {
            Rel::One(left)
        } else {
            Rel::Pair(left, right)
        }
    }
}

impl<T> Rel<T> {
    pub fn proj(&self, side: Side) -> &T {
        match (self, side) {
            (Rel::One(v), _) => v,
            (Rel::Pair(l, _), Side::Left) => l,
            (Rel::Pair(_, r), Side::Right) => r,
        }
    }

    pub fn is_pair(&self) -> bool {
        matches!(self, Rel::Pair(..))
    }

    pub fn map<U: PartialEq>(&self, mut f: impl FnMut(&T) -> U) -> Rel<U> {
        match self {
            Rel::One(v) => Rel::One(f(v)),
            Rel::Pair(l, r) => Rel::new(f(l), f(r)),
        }
    }
}

impl<T: fmt::Display> fmt::Display for Rel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rel::One(v) => write!(f, "{v}"),
            Rel::Pair(l, r) => write!(f, "({l}, {r})"),
        }
    }
}

/// Concrete array contents, indexed from 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ConcArray(pub Vec<i64>);

impl ConcArray {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based read; `None` outside `{1..len}`.
    pub fn get(&self, idx: i64) -> Option<i64> {
        if idx < 1 {
            return None;
        }
        self.0.get((idx - 1) as usize).copied()
    }

    /// 1-based functional update; `None` outside `{1..len}`.
    pub fn set(&self, idx: i64, v: i64) -> Option<ConcArray> {
        if idx < 1 || idx as u64 > self.0.len() as u64 {
            return None;
        }
        let mut next = self.0.clone();
        next[(idx - 1) as usize] = v;
        Some(ConcArray(next))
    }
}

impl fmt::Display for ConcArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

impl From<Vec<i64>> for ConcArray {
    fn from(v: Vec<i64>) -> Self {
        ConcArray(v)
    }
}
