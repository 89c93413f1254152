//! Concrete semantics: FOR ([`unary`]), RFOR ([`relational`]) and the
//! concrete assertion evaluator ([`assert_eval`]).

pub mod assert_eval;
pub mod relational;
pub mod unary;

use crate::lang::Ident;

/// Name of the ghost cost variable.
pub const GAMMA: &str = "gamma";

/// Prefix of engine-introduced variables (guard snapshots of product
/// programs); assignments to them are never charged to the ghost cost.
pub const INTERNAL_PREFIX: &str = "__";

/// Ghost-cost instrumentation mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ghost {
    /// No instrumentation.
    #[default]
    Off,
    /// Every executed assignment increments `gamma` (per run at the
    /// relational levels).
    On,
    /// For renamed two-copy programs (self-composition, products): an
    /// assignment to an identifier ending in `1` increments `gamma1`, one
    /// ending in `2` increments `gamma2`.
    Split,
}

impl Ghost {
    /// The counter charged for an assignment to `target`, if any.
    pub fn counter_for(self, target: &Ident) -> Option<Ident> {
        let name = target.as_str();
        if name.starts_with(INTERNAL_PREFIX) || name.starts_with(GAMMA) {
            return None;
        }
        match self {
            Ghost::Off => None,
            Ghost::On => Some(Ident::new(GAMMA)),
            Ghost::Split => match name.as_bytes().last() {
                Some(b'1') => Some(Ident::new("gamma1")),
                Some(b'2') => Some(Ident::new("gamma2")),
                _ => None,
            },
        }
    }

    /// Counters that must be bound (to 0) in initial memories.
    pub fn counters(self) -> &'static [&'static str] {
        match self {
            Ghost::Off => &[],
            Ghost::On => &[GAMMA],
            Ghost::Split => &["gamma1", "gamma2"],
        }
    }
}

/// Small-step rule tags, shared by all four semantics for metrics and
/// traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    SeqSkip,
    Assign,
    ArrAssign,
    ArrAssignSplit,
    IfTrue,
    IfFalse,
    IfSplit,
    ForUnroll,
    ForEmpty,
    ForSplit,
    ForInv,
    PairStep,
    PairSkip,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::SeqSkip => "seq-skip",
            Rule::Assign => "assign",
            Rule::ArrAssign => "arr-assign",
            Rule::ArrAssignSplit => "arr-assign-split",
            Rule::IfTrue => "if-true",
            Rule::IfFalse => "if-false",
            Rule::IfSplit => "if-split",
            Rule::ForUnroll => "for-unroll",
            Rule::ForEmpty => "for-empty",
            Rule::ForSplit => "for-split",
            Rule::ForInv => "for-inv",
            Rule::PairStep => "pair-step",
            Rule::PairSkip => "pair-skip",
        }
    }

    /// Rules that execute an assignment.
    pub fn is_assignment(self) -> bool {
        matches!(self, Rule::Assign | Rule::ArrAssign | Rule::ArrAssignSplit)
    }
}
