//! Property suites for the metatheory: projections and merges, the
//! agreement of relational and unary runs, branch partitions and
//! fresh-symbol hygiene. Each suite checks a number of random cases and
//! reports the first failure.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use relsym_core::concrete::relational::{run_r, step_r, Schedule};
use relsym_core::concrete::unary::run_u;
use relsym_core::concrete::Ghost;
use relsym_core::constraint::{ConstraintSet, Formula, GroundSubstitution, Term};
use relsym_core::lang::{
    merge_mem, merge_sym_mem, proj_cmd, proj_expr, BinOp, Cmd, ConcArray, ConcMem, Expr, Ident, Rel, RelConcMem,
    RelSymMem, Scalar, Side, Sort, Sym, SymArray, SymGen, SymMem, UnOp,
};
use relsym_core::relsym::{step_rs, RConfig};
use relsym_core::symbolic::{step_s, AnyMem, Exec, UConfig};
use relsym_core::CmpOp;

const SCALARS: [&str; 3] = ["x", "y", "z"];
const ARRAYS: [&str; 2] = ["a", "b"];

fn small() -> impl Strategy<Value = i64> {
    -4i64..=4
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        small().prop_map(Expr::Int),
        prop::sample::select(SCALARS.to_vec()).prop_map(Expr::var),
        prop::sample::select(ARRAYS.to_vec()).prop_map(|a| Expr::Len(Ident::new(a))),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
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
            (prop::sample::select(ops), inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::bin(op, a, b)),
            (prop::sample::select(vec![UnOp::Neg, UnOp::Not]), inner.clone()).prop_map(|(op, a)| Expr::Un(op, Box::new(a))),
            (prop::sample::select(ARRAYS.to_vec()), inner).prop_map(|(a, i)| Expr::read(a, i)),
        ]
    })
}

/// Loop-free, pair-free commands.
fn arb_cmd() -> impl Strategy<Value = Cmd> {
    let atom = prop_oneof![
        Just(Cmd::Skip),
        (prop::sample::select(SCALARS.to_vec()), arb_expr()).prop_map(|(x, e)| Cmd::assign(x, e)),
        (prop::sample::select(ARRAYS.to_vec()), 1i64..=3, arb_expr())
            .prop_map(|(a, i, e)| Cmd::ArrAssign(Ident::new(a), Expr::Int(i), e)),
    ];
    atom.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Cmd::seq(a, b)),
            (arb_expr(), inner.clone(), inner).prop_map(|(g, t, f)| Cmd::if_(g, t, f)),
        ]
    })
}

fn arb_mem() -> impl Strategy<Value = ConcMem> {
    (
        prop::collection::vec(small(), 3),
        prop::collection::vec(small(), 0..=3),
        prop::collection::vec(small(), 0..=3),
    )
        .prop_map(|(xs, a, b)| {
            let mut m = ConcMem::new();
            for (x, v) in SCALARS.iter().zip(xs) {
                m = m.with_scalar(x, v);
            }
            m.with_array("a", ConcArray(a)).with_array("b", ConcArray(b))
        })
}

/// Two memories whose arrays have the same lengths.
fn arb_mem_pair() -> impl Strategy<Value = (ConcMem, ConcMem)> {
    arb_mem().prop_flat_map(|m1| {
        let la = m1.arrays[&Ident::new("a")].len();
        let lb = m1.arrays[&Ident::new("b")].len();
        let same_shape = (
            prop::collection::vec(small(), 3),
            prop::collection::vec(small(), la),
            prop::collection::vec(small(), lb),
            prop::collection::vec(any::<bool>(), 3 + la + lb),
        )
            .prop_map(move |(xs, a, b, keep)| (xs, a, b, keep));
        (Just(m1), same_shape)
    })
    .prop_map(|(m1, (xs, a, b, keep))| {
        // Each value is either copied from the first memory or fresh, so
        // that pairs and shared values both occur.
        let mut m2 = m1.clone();
        let mut k = keep.into_iter();
        for (x, v) in SCALARS.iter().zip(xs) {
            if !k.next().unwrap() {
                m2.scalars.insert(Ident::new(x), v);
            }
        }
        for (name, vals) in [("a", a), ("b", b)] {
            let arr = m2.arrays.get_mut(&Ident::new(name)).unwrap();
            for (i, v) in vals.into_iter().enumerate() {
                if !k.next().unwrap() {
                    arr.0[i] = v;
                }
            }
        }
        (m1, m2)
    })
}

fn symbolic_mem(gen: &mut SymGen, lens: &[i64]) -> SymMem {
    let mut m = SymMem::new();
    for x in SCALARS {
        m = m.with_scalar(x, Scalar::Sym(gen.fresh_int()));
    }
    for (a, n) in ARRAYS.iter().zip(lens) {
        m = m.with_array(a, SymArray { content: gen.fresh_array(), len: Scalar::Int(*n) });
    }
    m
}

fn symbols_of(mem: &AnyMem, cs: &ConstraintSet) -> BTreeSet<Sym> {
    let mut s = mem.symbols();
    s.extend(cs.symbols());
    s
}

/// Runs `test` on `cases` values drawn from `strategy`.
fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

pub fn merge_then_project_is_identity(cases: u32) -> Result<(), String> {
    check(cases, arb_mem_pair(), |(m1, m2)| {
        let r = merge_mem(&m1, &m2).unwrap();
        prop_assert_eq!(r.proj(Side::Left), m1);
        prop_assert_eq!(r.proj(Side::Right), m2);
        Ok(())
    })
}

pub fn project_then_merge_is_identity(cases: u32) -> Result<(), String> {
    check(cases, arb_mem_pair(), |(m1, m2)| {
        let r = merge_mem(&m1, &m2).unwrap();
        let back = merge_mem(&r.proj(Side::Left), &r.proj(Side::Right)).unwrap();
        prop_assert_eq!(back, r);
        Ok(())
    })
}

pub fn lifted_memory_projects_to_itself(cases: u32) -> Result<(), String> {
    check(cases, arb_mem(), |m| {
        let r = RelConcMem::lift(&m);
        prop_assert_eq!(r.proj(Side::Left), m.clone());
        prop_assert_eq!(r.proj(Side::Right), m.clone());
        prop_assert_eq!(merge_mem(&m, &m).unwrap(), r);
        Ok(())
    })
}

pub fn symbolic_merge_round_trips(cases: u32) -> Result<(), String> {
    check(cases, (0u32..1000, prop::collection::vec(any::<bool>(), 5)), |(seed, share)| {
        let mut gen = SymGen::starting_at(seed);
        let m1 = symbolic_mem(&mut gen, &[2, 3]);
        let mut m2 = symbolic_mem(&mut gen, &[2, 3]);
        for (i, x) in SCALARS.iter().enumerate() {
            if share[i] {
                m2.scalars.insert(Ident::new(x), m1.scalars[&Ident::new(x)]);
            }
        }
        for (i, a) in ARRAYS.iter().enumerate() {
            if share[3 + i] {
                m2.arrays.insert(Ident::new(a), m1.arrays[&Ident::new(a)]);
            }
        }
        let r = merge_sym_mem(&m1, &m2).unwrap();
        prop_assert_eq!(r.proj(Side::Left), m1.clone());
        prop_assert_eq!(r.proj(Side::Right), m2.clone());
        for (i, x) in SCALARS.iter().enumerate() {
            prop_assert_eq!(r.scalars[&Ident::new(x)].is_pair(), !share[i]);
        }
        Ok(())
    })
}

pub fn projection_of_unary_program_is_itself(cases: u32) -> Result<(), String> {
    check(cases, (arb_cmd(), arb_expr()), |(c, e)| {
        prop_assert_eq!(proj_cmd(Side::Left, &c), c.clone());
        prop_assert_eq!(proj_cmd(Side::Right, &c), c);
        prop_assert_eq!(proj_expr(Side::Right, &e), e);
        Ok(())
    })
}

pub fn projection_of_pair_picks_component(cases: u32) -> Result<(), String> {
    check(cases, (arb_cmd(), arb_cmd()), |(c1, c2)| {
        let p = Cmd::pair(c1.clone(), c2.clone());
        prop_assert_eq!(proj_cmd(Side::Left, &p), c1);
        prop_assert_eq!(proj_cmd(Side::Right, &p), c2);
        Ok(())
    })
}

/// A relational run projects onto the two unary runs.
pub fn relational_run_projects_to_unary_runs(cases: u32) -> Result<(), String> {
    check(cases, (arb_cmd(), arb_mem_pair()), |(c, (m1, m2))| {
        let gamma = Ident::new("gamma");
        let (mut g1, mut g2) = (m1.clone(), m2.clone());
        g1.scalars.insert(gamma.clone(), 0);
        g2.scalars.insert(gamma.clone(), 0);
        let r = merge_mem(&g1, &g2).unwrap();
        let u1 = run_u(&g1, &c, 10_000, Ghost::On);
        let u2 = run_u(&g2, &c, 10_000, Ghost::On);
        let rr = run_r(&r, &c, 10_000, Ghost::On);
        match (u1, u2) {
            (Ok(f1), Ok(f2)) => {
                let rr = rr.expect("relational run fails although both unary runs succeed");
                prop_assert_eq!(rr.proj(Side::Left), f1);
                prop_assert_eq!(rr.proj(Side::Right), f2);
            }
            (u1, u2) => prop_assert!(rr.is_err(), "unary runs {:?} / {:?}, relational run {:?}", u1, u2, rr),
        }
        Ok(())
    })
}

/// Relational steps of a pair-free command never get stuck on a
/// memory where both unary runs can proceed.
pub fn relational_step_is_total_on_good_memories(cases: u32) -> Result<(), String> {
    check(cases, (arb_cmd(), arb_mem_pair()), |(c, (m1, m2))| {
        prop_assume!(!c.is_skip());
        let r = merge_mem(&m1, &m2).unwrap();
        let ok = run_u(&m1, &c, 10_000, Ghost::Off).is_ok() && run_u(&m2, &c, 10_000, Ghost::Off).is_ok();
        if ok {
            prop_assert!(!step_r(&r, &c, Ghost::Off, Schedule::LeftFirst).unwrap().is_empty());
        }
        Ok(())
    })
}

/// The successors of a relational conditional on a paired guard
/// partition the inputs: every valuation satisfies the constraints of
/// exactly one of them.
pub fn relational_branches_partition_inputs(cases: u32) -> Result<(), String> {
    check(cases, (arb_expr(), prop::collection::vec(prop::collection::vec(-6i64..=6, 5), 16)), |(g, vals)| {
        let mut gen = SymGen::new();
        let s: Vec<Sym> = (0..5).map(|_| gen.fresh_int()).collect();
        let mut m = RelSymMem::new();
        m = m.with_scalar("x", Rel::Pair(Scalar::Sym(s[0]), Scalar::Sym(s[1])));
        m = m.with_scalar("y", Rel::Pair(Scalar::Sym(s[2]), Scalar::Sym(s[3])));
        m = m.with_scalar("z", Rel::One(Scalar::Sym(s[4])));
        m = m.with_array("a", Rel::One(SymArray { content: gen.fresh_array(), len: Scalar::Int(0) }));
        m = m.with_array("b", Rel::One(SymArray { content: gen.fresh_array(), len: Scalar::Int(0) }));
        prop_assume!(!contains_read(&g));
        let cmd = Cmd::if_(g, Cmd::assign("x", Expr::Int(1)), Cmd::assign("y", Expr::Int(2)));
        let mut rigid = BTreeMap::new();
        let mut ex = Exec::new(&mut gen, &mut rigid, Ghost::Off);
        let cfg = RConfig { mem: m, cmd, cs: ConstraintSet::new() };
        let succs = step_rs(&mut ex, &cfg, Schedule::LeftFirst).unwrap();
        prop_assert!(!succs.is_empty() && succs.len() <= 4);
        for v in vals {
            let sigma = GroundSubstitution { ints: s.iter().copied().zip(v).collect(), arrays: BTreeMap::new() };
            let hits = succs.iter().filter(|x| holds(&sigma, &x.cs)).count();
            prop_assert_eq!(hits, 1);
        }
        Ok(())
    })
}

/// The two successors of a unary conditional on a symbolic guard have
/// mutually exclusive and exhaustive constraints.
pub fn unary_guards_are_exclusive(cases: u32) -> Result<(), String> {
    check(cases, (arb_expr(), prop::collection::vec(prop::collection::vec(-6i64..=6, 3), 16)), |(g, vals)| {
        prop_assume!(!contains_read(&g));
        let mut gen = SymGen::new();
        let m = symbolic_mem(&mut gen, &[0, 0]);
        let syms: Vec<Sym> = SCALARS.iter().map(|x| match m.scalars[&Ident::new(x)] {
            Scalar::Sym(s) => s,
            Scalar::Int(_) => unreachable!(),
        }).collect();
        let cmd = Cmd::if_(g, Cmd::Skip, Cmd::assign("x", Expr::Int(0)));
        let mut rigid = BTreeMap::new();
        let mut ex = Exec::new(&mut gen, &mut rigid, Ghost::Off);
        let succs = step_s(&mut ex, &UConfig { mem: m, cmd, cs: ConstraintSet::new() }).unwrap();
        prop_assert!(succs.len() == 1 || succs.len() == 2);
        for v in vals {
            let sigma = GroundSubstitution { ints: syms.iter().copied().zip(v).collect(), arrays: BTreeMap::new() };
            let hits = succs.iter().filter(|x| holds(&sigma, &x.cs)).count();
            prop_assert_eq!(hits, 1);
        }
        Ok(())
    })
}

/// Every symbol a unary step introduces is fresh: it was not in the
/// configuration before and comes from the allocator's new range.
pub fn unary_steps_only_introduce_fresh_symbols(cases: u32) -> Result<(), String> {
    check(cases, (arb_cmd(), 0i64..=3, 0i64..=3), |(c, la, lb)| {
        let mut gen = SymGen::new();
        let m = symbolic_mem(&mut gen, &[la, lb]);
        let mut pending = vec![UConfig { mem: m, cmd: c, cs: ConstraintSet::new() }];
        let mut rigid = BTreeMap::new();
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        let mut steps = 0;
        while let Some(cfg) = pending.pop() {
            steps += 1;
            prop_assert!(steps < 10_000);
            let before = symbols_of(&AnyMem::Unary(cfg.mem.clone()), &cfg.cs);
            seen.extend(before.iter().map(|s| s.id));
            let start = gen.peek();
            let mut ex = Exec::new(&mut gen, &mut rigid, Ghost::Off);
            let Ok(succs) = step_s(&mut ex, &cfg) else { continue };
            let end = gen.peek();
            for s in succs {
                let after = symbols_of(&AnyMem::Unary(s.mem.clone()), &s.cs);
                for x in after.difference(&before) {
                    prop_assert!(start <= x.id && x.id < end, "symbol {} is not fresh", x);
                }
                if !s.cmd.is_skip() {
                    pending.push(UConfig { mem: s.mem, cmd: s.cmd, cs: s.cs });
                }
            }
        }
        Ok(())
    })
}

/// The same for relational steps, over memories mixing shared and
/// paired values.
pub fn relational_steps_only_introduce_fresh_symbols(cases: u32) -> Result<(), String> {
    check(cases, (arb_cmd(), arb_cmd(), prop::collection::vec(any::<bool>(), 3)), |(c1, c2, pairs)| {
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
        for a in ARRAYS {
            m = m.with_array(a, Rel::Pair(
                SymArray { content: gen.fresh_array(), len: Scalar::Int(3) },
                SymArray { content: gen.fresh_array(), len: Scalar::Int(3) },
            ));
        }
        let cmd = Cmd::seq(c1, Cmd::pair(c2.clone(), c2));
        let mut pending = vec![RConfig { mem: m, cmd, cs: ConstraintSet::new() }];
        let mut rigid = BTreeMap::new();
        let mut steps = 0;
        while let Some(cfg) = pending.pop() {
            steps += 1;
            prop_assert!(steps < 20_000);
            let before = symbols_of(&AnyMem::Rel(cfg.mem.clone()), &cfg.cs);
            let start = gen.peek();
            let mut ex = Exec::new(&mut gen, &mut rigid, Ghost::Off);
            let Ok(succs) = step_rs(&mut ex, &cfg, Schedule::LeftFirst) else { continue };
            let end = gen.peek();
            for s in succs {
                let after = symbols_of(&AnyMem::Rel(s.mem.clone()), &s.cs);
                for x in after.difference(&before) {
                    prop_assert!(start <= x.id && x.id < end, "symbol {} is not fresh", x);
                }
                if !s.cmd.is_skip() {
                    pending.push(RConfig { mem: s.mem, cmd: s.cmd, cs: s.cs });
                }
            }
        }
        Ok(())
    })
}

pub fn allocator_never_repeats(cases: u32) -> Result<(), String> {
    check(cases, (prop::collection::vec(any::<bool>(), 1..200), 0u32..1000), |(sorts, start)| {
        let mut gen = SymGen::starting_at(start);
        let mut ids = BTreeSet::new();
        for s in sorts {
            let x = gen.fresh(if s { Sort::Int } else { Sort::Array });
            prop_assert!(ids.insert(x.id));
        }
        Ok(())
    })
}

/// Every suite, by name (the acceptance runner iterates over them).
#[allow(dead_code)]
pub const ALL: &[(&str, fn(u32) -> Result<(), String>)] = &[
    ("merge_then_project_is_identity", merge_then_project_is_identity),
    ("project_then_merge_is_identity", project_then_merge_is_identity),
    ("lifted_memory_projects_to_itself", lifted_memory_projects_to_itself),
    ("symbolic_merge_round_trips", symbolic_merge_round_trips),
    ("projection_of_unary_program_is_itself", projection_of_unary_program_is_itself),
    ("projection_of_pair_picks_component", projection_of_pair_picks_component),
    ("relational_run_projects_to_unary_runs", relational_run_projects_to_unary_runs),
    ("relational_step_is_total_on_good_memories", relational_step_is_total_on_good_memories),
    ("relational_branches_partition_inputs", relational_branches_partition_inputs),
    ("unary_guards_are_exclusive", unary_guards_are_exclusive),
    ("unary_steps_only_introduce_fresh_symbols", unary_steps_only_introduce_fresh_symbols),
    ("relational_steps_only_introduce_fresh_symbols", relational_steps_only_introduce_fresh_symbols),
    ("allocator_never_repeats", allocator_never_repeats),
];


/// `σ ⊨ cs`, after extending `σ` through the definitions `X = t` that
/// symbolic evaluation adds for intermediate values.
fn holds(sigma: &GroundSubstitution, cs: &ConstraintSet) -> bool {
    let mut sigma = sigma.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for f in cs.iter() {
            if let Formula::Cmp(CmpOp::Eq, Term::Sym(x), t) = f {
                if x.sort == Sort::Int && !sigma.covers(*x) {
                    if let Ok(v) = sigma.eval_term(t, &[], 0) {
                        sigma.ints.insert(*x, v);
                        changed = true;
                    }
                }
            }
        }
    }
    sigma.satisfies(cs.iter(), 0).expect("constraints over covered symbols")
}

fn contains_read(e: &Expr) -> bool {
    match e {
        Expr::Read(..) => true,
        Expr::Int(_) | Expr::Var(_) | Expr::Len(_) | Expr::Sym(_) => false,
        Expr::Un(_, a) => contains_read(a),
        Expr::Bin(_, a, b) | Expr::Pair(a, b) => contains_read(a) || contains_read(b),
    }
}
