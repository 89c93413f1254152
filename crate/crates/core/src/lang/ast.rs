use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use super::value::Sym;
use crate::assertion::Assertion;

/// Name of a program variable, array, or logical variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(name: &str) -> Self {
        Ident(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `self` with `suffix` appended, e.g. `p` -> `p1`.
    pub fn suffixed(&self, suffix: &str) -> Ident {
        let mut s = String::from(self.as_str());
        s.push_str(suffix);
        Ident::new(&s)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident::new(s)
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Which of the two runs a relational object refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn index(self) -> u8 {
        match self {
            Side::Left => 1,
            Side::Right => 2,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Binary operators. Comparisons and connectives are integer valued:
/// they produce 1 for true and 0 for false, and read any value > 0 as true.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul)
    }

    pub fn is_cmp(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }

    /// Concrete semantics. `None` on arithmetic overflow.
    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        let flag = |c: bool| Some(c as i64);
        match self {
            BinOp::Add => a.checked_add(b),
            BinOp::Sub => a.checked_sub(b),
            BinOp::Mul => a.checked_mul(b),
            BinOp::Eq => flag(a == b),
            BinOp::Ne => flag(a != b),
            BinOp::Lt => flag(a < b),
            BinOp::Le => flag(a <= b),
            BinOp::Gt => flag(a > b),
            BinOp::Ge => flag(a >= b),
            BinOp::And => flag(a > 0 && b > 0),
            BinOp::Or => flag(a > 0 || b > 0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

impl UnOp {
    pub fn apply(self, a: i64) -> Option<i64> {
        match self {
            UnOp::Neg => a.checked_neg(),
            UnOp::Not => Some((a <= 0) as i64),
        }
    }
}

/// Program expressions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Int(i64),
    Var(Ident),
    Read(Ident, Box<Expr>),
    Len(Ident),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Un(UnOp, Box<Expr>),
    /// Symbolic value; only at symbolic levels.
    Sym(Sym),
    /// Relational pair; operands must be pair-free.
    Pair(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Ident::new(name))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn read(a: &str, idx: Expr) -> Expr {
        Expr::Read(Ident::new(a), Box::new(idx))
    }

    pub fn has_pairs(&self) -> bool {
        match self {
            Expr::Pair(..) => true,
            Expr::Int(_) | Expr::Var(_) | Expr::Len(_) | Expr::Sym(_) => false,
            Expr::Read(_, e) | Expr::Un(_, e) => e.has_pairs(),
            Expr::Bin(_, a, b) => a.has_pairs() || b.has_pairs(),
        }
    }

    pub fn has_symbols(&self) -> bool {
        match self {
            Expr::Sym(_) => true,
            Expr::Int(_) | Expr::Var(_) | Expr::Len(_) => false,
            Expr::Read(_, e) | Expr::Un(_, e) => e.has_symbols(),
            Expr::Bin(_, a, b) | Expr::Pair(a, b) => a.has_symbols() || b.has_symbols(),
        }
    }
}

/// Commands.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cmd {
    Skip,
    Seq(Box<Cmd>, Box<Cmd>),
    Assign(Ident, Expr),
    ArrAssign(Ident, Expr, Expr),
    If(Expr, Box<Cmd>, Box<Cmd>),
    For(Ident, Expr, Expr, Box<Cmd>),
    /// Loop annotated with an invariant (unary or relational assertion).
    ForInv(Ident, Expr, Expr, Assertion, Box<Cmd>),
    /// Relational pair; operands must be pair-free.
    Pair(Box<Cmd>, Box<Cmd>),
}

impl Cmd {
    pub fn seq(a: Cmd, b: Cmd) -> Cmd {
        Cmd::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence of `cmds`; `skip` when empty.
    pub fn seq_all<I>(cmds: I) -> Cmd
    where
        I: IntoIterator<Item = Cmd>,
        I::IntoIter: DoubleEndedIterator,
    {
        let mut it = cmds.into_iter().rev();
        let Some(mut acc) = it.next() else {
            return Cmd::Skip;
        };
        for c in it {
            acc = Cmd::seq(c, acc);
        }
        acc
    }

    pub fn assign(x: &str, e: Expr) -> Cmd {
        Cmd::Assign(Ident::new(x), e)
    }

    pub fn if_(g: Expr, t: Cmd, f: Cmd) -> Cmd {
        Cmd::If(g, Box::new(t), Box::new(f))
    }

    pub fn pair(a: Cmd, b: Cmd) -> Cmd {
        Cmd::Pair(Box::new(a), Box::new(b))
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Cmd::Skip)
    }

    /// The command that will be reduced next: the leftmost non-sequence
    /// command along the sequence spine.
    pub fn redex(&self) -> &Cmd {
        match self {
            Cmd::Seq(a, _) => a.redex(),
            c => c,
        }
    }

    pub fn has_pairs(&self) -> bool {
        match self {
            Cmd::Pair(..) => true,
            Cmd::Skip => false,
            Cmd::Seq(a, b) => a.has_pairs() || b.has_pairs(),
            Cmd::Assign(_, e) => e.has_pairs(),
            Cmd::ArrAssign(_, i, v) => i.has_pairs() || v.has_pairs(),
            Cmd::If(g, t, f) => g.has_pairs() || t.has_pairs() || f.has_pairs(),
            Cmd::For(_, lo, hi, b) | Cmd::ForInv(_, lo, hi, _, b) => {
                lo.has_pairs() || hi.has_pairs() || b.has_pairs()
            }
        }
    }

    /// Number of atomic statements (assignments, skips) plus control nodes.
    pub fn size(&self) -> usize {
        match self {
            Cmd::Skip | Cmd::Assign(..) | Cmd::ArrAssign(..) => 1,
            Cmd::Seq(a, b) | Cmd::Pair(a, b) => a.size() + b.size(),
            Cmd::If(_, t, f) => 1 + t.size() + f.size(),
            Cmd::For(.., b) | Cmd::ForInv(.., b) => 1 + b.size(),
        }
    }
}
