//! Helpers shared by the integration tests and the acceptance runner:
//! corpus access, solver sessions, random programs and the frontend and
//! solver-backed property suites.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use relsym::parse::{parse_assertion, parse_cmd, parse_expr, SpecFile};
use relsym::pretty::{pretty, pretty_assertion, pretty_expr, pretty_indented};
use relsym::run::load_spec;
use relsym::smt::{SmtSession, SolverConfig};
use relsym_core::assertion::{AExp, ArrExp, Assertion, CmpOp};
use relsym_core::concrete::relational::Schedule;
use relsym_core::concrete::Ghost;
use relsym_core::constraint::{ConstraintSet, Formula};
use relsym_core::lang::{BinOp, Cmd, Expr, Ident, Rel, RelSymMem, Scalar, Side, SymArray, SymGen, SymMem, UnOp};
use relsym_core::relsym::{step_rs, RConfig};
use relsym_core::solver::{SatStatus, Solver};
use relsym_core::symbolic::{step_s, Exec, UConfig};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_spec(name: &str) -> SpecFile {
    load_spec(&corpus_dir().join(format!("{name}.spec"))).expect("corpus spec parses")
}

pub fn session() -> SmtSession {
    SmtSession::start(SolverConfig::default()).expect("z3 is installed")
}

/// Runs `test` on `cases` values drawn from `strategy`.
pub fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// A deterministic stream of values drawn from `strategy`.
pub struct Sampler<S: Strategy> {
    strategy: S,
    runner: TestRunner,
}

impl<S: Strategy> Sampler<S> {
    pub fn new(strategy: S) -> Self {
        Sampler { strategy, runner: TestRunner::deterministic() }
    }

    pub fn draw(&mut self) -> S::Value {
        self.strategy.new_tree(&mut self.runner).expect("strategy generates values").current()
    }
}

// ---- random loop-free programs over small values ----

pub const SCALARS: [&str; 3] = ["x", "y", "z"];
pub const ARRAYS: [&str; 2] = ["a", "b"];

fn small() -> impl Strategy<Value = i64> {
    -4i64..=4
}

/// Program expressions over `x, y, z` and the arrays `a, b`. Indices are
/// mostly in `1..=3` so that most runs stay in bounds.
pub fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        3 => small().prop_map(Expr::Int),
        3 => prop::sample::select(SCALARS.to_vec()).prop_map(Expr::var),
        1 => prop::sample::select(ARRAYS.to_vec()).prop_map(|a| Expr::Len(Ident::new(a))),
        2 => (prop::sample::select(ARRAYS.to_vec()), 1i64..=3).prop_map(|(a, i)| Expr::read(a, Expr::Int(i))),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        let ops = vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Eq,
            BinOp::Ne,
            BinOp::Lt,
            BinOp::Le,
            BinOp::Gt,
            BinOp::Ge,
            BinOp::And,
            BinOp::Or,
        ];
        prop_oneof![
            4 => (prop::sample::select(ops), inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            1 => (prop::sample::select(vec![UnOp::Neg, UnOp::Not]), inner.clone())
                .prop_map(|(op, a)| Expr::Un(op, Box::new(a))),
            1 => (prop::sample::select(ARRAYS.to_vec()), inner).prop_map(|(a, i)| Expr::read(a, i)),
        ]
    })
}

/// Number of statements of a loop-free command: assignments, skips and
/// conditionals each count one.
pub fn statements(c: &Cmd) -> usize {
    match c {
        Cmd::Seq(a, b) => statements(a) + statements(b),
        Cmd::If(_, t, f) => 1 + statements(t) + statements(f),
        Cmd::For(_, _, _, b) | Cmd::ForInv(_, _, _, _, b) => 1 + statements(b),
        Cmd::Pair(a, b) => statements(a) + statements(b),
        Cmd::Skip | Cmd::Assign(..) | Cmd::ArrAssign(..) => 1,
    }
}

/// Loop-free programs of at most 12 statements.
pub fn arb_program() -> impl Strategy<Value = Cmd> {
    let atom = prop_oneof![
        1 => Just(Cmd::Skip),
        5 => (prop::sample::select(SCALARS.to_vec()), arb_expr()).prop_map(|(x, e)| Cmd::assign(x, e)),
        3 => (prop::sample::select(ARRAYS.to_vec()), prop_oneof![3 => (1i64..=3).prop_map(Expr::Int), 1 => arb_expr()], arb_expr())
            .prop_map(|(a, i, e)| Cmd::ArrAssign(Ident::new(a), i, e)),
    ];
    atom.prop_recursive(4, 12, 3, |inner| {
        prop_oneof![
            3 => (inner.clone(), inner.clone()).prop_map(|(a, b)| Cmd::Seq(Box::new(a), Box::new(b))),
            2 => (arb_expr(), inner.clone(), inner).prop_map(|(g, t, f)| Cmd::if_(g, t, f)),
        ]
    })
    .prop_filter("at most 12 statements", |c| statements(c) <= 12)
}

/// Initial values: scalars in `-4..=4`, arrays of length at most 3 (mostly
/// exactly 3, so that most runs stay in bounds).
pub fn arb_inputs() -> impl Strategy<Value = (Vec<i64>, Vec<i64>, Vec<i64>)> {
    let array = || prop_oneof![1 => prop::collection::vec(small(), 0..=2), 3 => prop::collection::vec(small(), 3)];
    (prop::collection::vec(small(), 3), array(), array())
}

// ---- parser round trip ----

fn arb_ident(pool: &'static [&'static str]) -> impl Strategy<Value = Ident> {
    prop::sample::select(pool.to_vec()).prop_map(Ident::new)
}

fn arb_side() -> impl Strategy<Value = Option<Side>> {
    prop_oneof![Just(None), Just(Some(Side::Left)), Just(Some(Side::Right))]
}

fn arb_arr() -> impl Strategy<Value = ArrExp> {
    let name = (arb_ident(&["a", "b"]), arb_side()).prop_map(|(a, s)| ArrExp::Name(a, s));
    (name, prop::collection::vec(((-3i64..=3).prop_map(AExp::Int), (-3i64..=3).prop_map(AExp::Int)), 0..2)).prop_map(
        |(mut a, ups)| {
            for (i, v) in ups {
                a = ArrExp::Update(Box::new(a), Box::new(i), Box::new(v));
            }
            a
        },
    )
}

pub fn arb_aexp() -> impl Strategy<Value = AExp> {
    let leaf = prop_oneof![
        (-9i64..=9).prop_map(AExp::Int),
        (arb_ident(&["x", "y", "k"]), arb_side()).prop_map(|(x, s)| AExp::Var(x, s)),
        arb_ident(&["h", "t"]).prop_map(AExp::LVar),
        (arb_ident(&["a", "b"]), arb_side()).prop_map(|(a, s)| AExp::Len(a, s)),
    ];
    leaf.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            (prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul]), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| AExp::Bin(op, Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| AExp::Un(UnOp::Neg, Box::new(a))),
            inner.clone().prop_map(|a| AExp::Abs(Box::new(a))),
            (arb_arr(), inner.clone()).prop_map(|(a, i)| AExp::Read(Box::new(a), Box::new(i))),
            (arb_arr(), arb_arr(), inner).prop_map(|(a, b, n)| AExp::FirstDiff(Box::new(a), Box::new(b), Box::new(n))),
        ]
    })
}

pub fn arb_assertion() -> impl Strategy<Value = Assertion> {
    let ops = vec![CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
    let leaf = prop_oneof![
        Just(Assertion::True),
        Just(Assertion::False),
        (prop::sample::select(ops), arb_aexp(), arb_aexp()).prop_map(|(op, a, b)| Assertion::Cmp(op, a, b)),
    ];
    leaf.prop_recursive(3, 10, 2, |inner| {
        let b = |f: fn(Box<Assertion>, Box<Assertion>) -> Assertion| {
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| f(Box::new(x), Box::new(y)))
        };
        prop_oneof![
            inner.clone().prop_map(|a| Assertion::Not(Box::new(a))),
            b(Assertion::And),
            b(Assertion::Or),
            b(Assertion::Implies),
            b(Assertion::Iff),
            (arb_ident(&["h", "t"]), inner.clone()).prop_map(|(v, a)| Assertion::Forall(v, Box::new(a))),
            (arb_ident(&["h", "t"]), inner.clone()).prop_map(|(v, a)| Assertion::Exists(v, Box::new(a))),
        ]
    })
}

/// Commands with every construct that has source syntax.
pub fn arb_source_cmd() -> impl Strategy<Value = Cmd> {
    let atom = prop_oneof![
        Just(Cmd::Skip),
        (arb_ident(&["x", "y", "k"]), arb_expr()).prop_map(|(x, e)| Cmd::Assign(x, e)),
        (arb_ident(&["a", "b"]), arb_expr(), arb_expr()).prop_map(|(a, i, e)| Cmd::ArrAssign(a, i, e)),
    ];
    atom.prop_recursive(4, 16, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Cmd::Seq(Box::new(a), Box::new(b))),
            (arb_expr(), inner.clone(), inner.clone()).prop_map(|(g, t, f)| Cmd::if_(g, t, f)),
            (arb_ident(&["i", "j"]), arb_expr(), arb_expr(), inner.clone())
                .prop_map(|(x, lo, hi, b)| Cmd::For(x, lo, hi, Box::new(b))),
            (arb_ident(&["i", "j"]), arb_expr(), arb_expr(), arb_assertion(), inner)
                .prop_map(|(x, lo, hi, inv, b)| Cmd::ForInv(x, lo, hi, inv, Box::new(b))),
        ]
    })
}

pub fn parse_round_trips_expressions(cases: u32) -> Result<(), String> {
    check(cases, arb_expr(), |e| {
        let text = pretty_expr(&e);
        prop_assert_eq!(parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?, e);
        Ok(())
    })
}

pub fn parse_round_trips_assertions(cases: u32) -> Result<(), String> {
    check(cases, arb_assertion(), |a| {
        let text = pretty_assertion(&a);
        prop_assert_eq!(parse_assertion(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?, a);
        Ok(())
    })
}

pub fn parse_round_trips_commands(cases: u32) -> Result<(), String> {
    check(cases, arb_source_cmd(), |c| {
        for text in [pretty(&c), pretty_indented(&c, 0)] {
            let back = parse_cmd(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
            prop_assert_eq!(&back, &c, "text: {}", text);
        }
        Ok(())
    })
}

// ---- solver-backed branch checks ----

/// Splits successor constraint sets into the formulas they share and the
/// literals specific to each.
fn split_common(sets: &[ConstraintSet]) -> (Vec<Formula>, Vec<Vec<Formula>>) {
    let all: Vec<Vec<Formula>> = sets.iter().map(|s| s.to_vec()).collect();
    let common: Vec<Formula> = all[0].iter().filter(|f| all.iter().all(|s| s.contains(f))).cloned().collect();
    let own = all.into_iter().map(|s| s.into_iter().filter(|f| !common.contains(f)).collect()).collect();
    (common, own)
}

/// The branch constraints of successors are pairwise unsatisfiable
/// together and jointly exhaustive.
fn exclusive_and_exhaustive(solver: &mut dyn Solver, sets: &[ConstraintSet]) -> Result<(), TestCaseError> {
    let (common, own) = split_common(sets);
    for i in 0..own.len() {
        for j in i + 1..own.len() {
            let mut fs = common.clone();
            fs.extend(own[i].iter().cloned());
            fs.extend(own[j].iter().cloned());
            let st = solver.check(&fs).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(st, SatStatus::Unsat, "branches {} and {} overlap", i, j);
        }
    }
    let mut fs = common;
    fs.push(Formula::not(Formula::or(own.into_iter().map(Formula::and))));
    let st = solver.check(&fs).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(st, SatStatus::Unsat, "branches do not cover every input");
    Ok(())
}

/// Unary conditionals: the two successors' guard literals are exclusive
/// and exhaustive (checked by the solver).
pub fn unary_guards_exclusive_smt(cases: u32) -> Result<(), String> {
    let solver = std::cell::RefCell::new(session());
    check(cases, arb_expr(), |g| {
        let mut gen = SymGen::new();
        let mut m = SymMem::new();
        for x in SCALARS {
            m = m.with_scalar(x, Scalar::Sym(gen.fresh_int()));
        }
        for a in ARRAYS {
            m = m.with_array(a, SymArray { content: gen.fresh_array(), len: Scalar::Int(3) });
        }
        let cmd = Cmd::if_(g, Cmd::Skip, Cmd::assign("x", Expr::Int(0)));
        let mut rigid = BTreeMap::new();
        let mut ex = Exec::new(&mut gen, &mut rigid, Ghost::Off);
        let succs = step_s(&mut ex, &UConfig { mem: m, cmd, cs: ConstraintSet::new() })
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(succs.len() == 1 || succs.len() == 2);
        let sets: Vec<ConstraintSet> = succs.into_iter().map(|s| s.cs).collect();
        exclusive_and_exhaustive(&mut *solver.borrow_mut(), &sets)
    })
}

/// Relational conditionals on paired guards: the (up to four) successors
/// partition the inputs (checked by the solver).
pub fn relational_branches_partition_smt(cases: u32) -> Result<(), String> {
    let solver = std::cell::RefCell::new(session());
    check(cases, (arb_expr(), prop::collection::vec(any::<bool>(), 5)), |(g, pairs)| {
        let mut gen = SymGen::new();
        let mut m = RelSymMem::new();
        for (x, p) in SCALARS.iter().zip(&pairs) {
            let v = if *p {
                Rel::Pair(Scalar::Sym(gen.fresh_int()), Scalar::Sym(gen.fresh_int()))
            } else {
                Rel::One(Scalar::Sym(gen.fresh_int()))
            };
            m = m.with_scalar(x, v);
        }
        for (a, p) in ARRAYS.iter().zip(&pairs[3..]) {
            let arr = |gen: &mut SymGen| SymArray { content: gen.fresh_array(), len: Scalar::Int(3) };
            let v = if *p { Rel::Pair(arr(&mut gen), arr(&mut gen)) } else { Rel::One(arr(&mut gen)) };
            m = m.with_array(a, v);
        }
        let cmd = Cmd::if_(g, Cmd::assign("x", Expr::Int(1)), Cmd::assign("y", Expr::Int(2)));
        let mut rigid = BTreeMap::new();
        let mut ex = Exec::new(&mut gen, &mut rigid, Ghost::Off);
        let cfg = RConfig { mem: m, cmd, cs: ConstraintSet::new() };
        let succs = step_rs(&mut ex, &cfg, Schedule::LeftFirst).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(!succs.is_empty() && succs.len() <= 4);
        let sets: Vec<ConstraintSet> = succs.into_iter().map(|s| s.cs).collect();
        exclusive_and_exhaustive(&mut *solver.borrow_mut(), &sets)
    })
}

/// Frontend and solver-backed suites, by name.
pub const SUITES: &[(&str, fn(u32) -> Result<(), String>)] = &[
    ("parse_round_trips_expressions", parse_round_trips_expressions),
    ("parse_round_trips_assertions", parse_round_trips_assertions),
    ("parse_round_trips_commands", parse_round_trips_commands),
    ("unary_guards_exclusive_smt", unary_guards_exclusive_smt),
    ("relational_branches_partition_smt", relational_branches_partition_smt),
];
