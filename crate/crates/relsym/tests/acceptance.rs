//! Acceptance runner: prints one PASS/FAIL line per criterion and exits
//! with a failure status if any criterion fails.

mod common;
#[path = "../../core/tests/suites/mod.rs"]
mod suites;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use relsym::bench::{bench, render, Format, HEADER};
use relsym::parse::{parse_spec, SpecFile};
use relsym::pretty::pretty_expr;
use relsym::run::{run_spec, spec_program, triple_for, Mode, RunOptions, RunOutcome, Task};
use relsym_core::concrete::assert_eval::eval_rel_assertion;
use relsym_core::concrete::relational::run_r;
use relsym_core::concrete::unary::run_u;
use relsym_core::concrete::Ghost;
use relsym_core::constraint::{Formula, Term};
use relsym_core::engine::{
    Config, ConcState, Engine, Frontier, Node, PruneStatus, Reason, Strategy as Order, Strength, Verdict,
};
use relsym_core::lang::{Cmd, ConcArray, ConcMem, Ident, Rel, RelConcMem, Scalar, Vars};
use relsym_core::symbolic::{AnyMem, Outcome, Triple};

use common::{arb_inputs, arb_program, corpus_dir, corpus_spec, session, Sampler, ARRAYS, SCALARS};

type Check = fn() -> Result<String, String>;

const CRITERIA: &[(&str, &str, Check, Duration)] = &[
    ("1", "cdf monotonicity is proved with the mixed branch pruned", c1, Duration::from_secs(30)),
    ("2", "sort is Lipschitz for arrays of any length", c2, Duration::from_secs(60)),
    ("3", "cost equivalence is refuted with gamma@1 > gamma@2", c3, Duration::from_secs(60)),
    ("4", "non-interference: strong invariant refutes, weak one is diagnosed", c4, Duration::from_secs(120)),
    ("5", "invariant strength: true is weak, z = i is strong", c5, Duration::from_secs(10)),
    ("6", "symbolic execution covers 500 random concrete runs", c6, Duration::from_secs(600)),
    ("7", "sampled substitutions of proved specs replay and satisfy the postcondition", c7, Duration::MAX),
    ("8", "relational execution takes fewer steps than self-composition", c8, Duration::MAX),
    ("9", "metatheory property suites", c9, Duration::from_secs(120)),
];

fn main() -> ExitCode {
    let mut failed = 0;
    for (id, title, check, limit) in CRITERIA {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = match result {
            Ok(detail) if took > *limit => Err(format!("{detail}; took {took:.1?}, limit {limit:.0?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS [{id}] {title}: {detail} ({took:.1?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL [{id}] {title}: {why} ({took:.1?})");
            }
        }
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn run(spec: &SpecFile, task: Task, mode: Option<Mode>) -> Result<RunOutcome, String> {
    run_spec(spec, task, &RunOptions { mode, ..RunOptions::default() }).map_err(|e| e.to_string())
}

fn timed(limit: Duration, what: &str, f: impl FnOnce() -> Result<RunOutcome, String>) -> Result<RunOutcome, String> {
    let start = Instant::now();
    let out = f()?;
    let took = start.elapsed();
    ensure(took <= limit, || format!("{what} took {took:.1?}, limit {limit:.0?}"))?;
    Ok(out)
}

fn expect_verdict(out: &RunOutcome, name: &str, what: &str) -> Result<(), String> {
    ensure(out.verdict.name() == name, || format!("{what}: expected {name}, got {}", out.verdict.name()))
}

/// A relational memory over the variables of `cmd` (and the ghost
/// counters), zero or empty except where `set` says otherwise.
fn rel_memory(cmd: &Cmd, ghost: Ghost, ints: &[(&str, Rel<i64>)], arrays: &[(&str, Rel<ConcArray>)]) -> RelConcMem {
    let vars = Vars::of_cmd(cmd);
    let mut m = RelConcMem::new();
    for x in &vars.scalars {
        m.scalars.insert(x.clone(), Rel::One(0));
    }
    for a in &vars.arrays {
        m.arrays.insert(a.clone(), Rel::One(ConcArray(Vec::new())));
    }
    for g in ghost.counters() {
        m.scalars.insert(Ident::new(g), Rel::One(0));
    }
    for (x, v) in ints {
        m.scalars.insert(Ident::new(x), v.clone());
    }
    for (a, v) in arrays {
        m.arrays.insert(Ident::new(a), v.clone());
    }
    m
}

fn arr(v: &[i64]) -> ConcArray {
    ConcArray(v.to_vec())
}

// ---- 1 ----

fn c1() -> Result<String, String> {
    let spec = corpus_spec("cdf_monotone_len5");
    let out = timed(Duration::from_secs(30), "prove", || run(&spec, Task::Prove, Some(Mode::Rel)))?;
    expect_verdict(&out, "proved", "prove")?;

    // Replay the exploration one configuration at a time to attribute each
    // pruning check of the outer conditional to its loop iteration.
    let mut s = session();
    let mut engine = Engine::new(&mut s, Config::default());
    let t = triple_for(&spec, Mode::Rel, false).map_err(|e| e.to_string())?;
    let (mem, cs) = engine.abstract_memory(&t, true).map_err(|e| e.to_string())?;
    let root = Node { mem, cmd: t.body.clone(), cs, sites: Vec::new(), tainted: false };
    let mut f = Frontier::new(root, Order::Bfs, t.ghost);
    let counter = Ident::new("i");
    // iteration -> (mixed successors pruned, mixed successors kept, other checks)
    let mut per_iter: BTreeMap<i64, (usize, usize, usize)> = BTreeMap::new();
    loop {
        let iter = match f.pending.front().map(|n| &n.mem) {
            Some(AnyMem::Rel(m)) => match m.scalars.get(&counter) {
                Some(Rel::One(Scalar::Int(k))) => *k,
                _ => 0,
            },
            Some(_) => return Err("exploration is not relational".into()),
            None => break,
        };
        let before = engine.metrics.prune_log.len();
        engine.collect_step(&mut f).map_err(|e| e.to_string())?;
        for e in &engine.metrics.prune_log[before..] {
            if pretty_expr(&e.guard) != "(cum >= q)" {
                continue;
            }
            let entry = per_iter.entry(iter).or_default();
            match (e.outcome, e.status) {
                (Outcome::Rel(true, false), PruneStatus::Pruned) => entry.0 += 1,
                (Outcome::Rel(true, false), _) => entry.1 += 1,
                _ => entry.2 += 1,
            }
        }
        f.finals.clear();
    }
    let mut notes = Vec::new();
    for k in 1..=5 {
        let (pruned, kept, other) = per_iter.get(&k).copied().unwrap_or_default();
        ensure(kept == 0, || format!("iteration {k}: {kept} successor(s) with cum@1 >= q, cum@2 < q were kept"))?;
        // While cum is equal in both runs the guard takes the same value in
        // both and the mixed successor is never generated.
        ensure(pruned > 0 || other > 0, || format!("iteration {k}: the outer conditional was never reached"))?;
        notes.push(if pruned > 0 { format!("i={k}: {pruned} pruned") } else { format!("i={k}: not generated (cum shared)") });
    }
    Ok(format!("proved in {:.1?}; {}", out.elapsed, notes.join(", ")))
}

// ---- 2 ----

fn c2() -> Result<String, String> {
    let spec = corpus_spec("sort_lipschitz");
    let out = timed(Duration::from_secs(60), "prove", || run(&spec, Task::Prove, Some(Mode::Rel)))?;
    expect_verdict(&out, "proved", "prove")?;
    ensure(out.metrics.smt_calls > 0, || "no solver query was made".into())?;
    // A mutant that breaks the permutation property must not be proved.
    let text = std::fs::read_to_string(corpus_dir().join("sort_lipschitz.spec")).map_err(|e| e.to_string())?;
    let mutant = parse_spec(&text.replace("a[j] := z", "a[j] := z + 1")).map_err(|e| e.to_string())?;
    let bad = run(&mutant, Task::Prove, Some(Mode::Rel))?;
    ensure(bad.verdict.name() != "proved", || "a broken sort was proved too".into())?;
    Ok(format!("proved with {} solver queries; broken sort: {}", out.metrics.smt_calls, bad.verdict.name()))
}

// ---- 3 ----

fn c3() -> Result<String, String> {
    let spec = corpus_spec("cost_equiv_len5");
    let out = timed(Duration::from_secs(60), "refute", || run(&spec, Task::Refute, Some(Mode::Rel)))?;
    let Verdict::Refuted(w) = &out.verdict else {
        return Err(format!("expected refuted, got {}", out.verdict.name()));
    };
    ensure(w.transcript.confirms(), || "the witness does not replay to a violation".into())?;
    let Ok(ConcState::Rel(m)) = &w.transcript.outcome else {
        return Err("the replay did not finish with a relational memory".into());
    };
    let gamma = m.scalars.get(&Ident::new("gamma")).ok_or("no gamma in the final memory")?;
    let Rel::Pair(g1, g2) = *gamma else {
        return Err(format!("gamma is {gamma} in both runs"));
    };
    ensure(g1 > g2, || format!("replayed gamma is ({g1}, {g2})"))?;

    let cmd = spec_program(&spec);
    let m0 = rel_memory(&cmd, Ghost::On, &[("k", Rel::One(2))], &[("a", Rel::One(arr(&[1; 5])))]);
    let m1 = run_r(&m0, &cmd, 100_000, Ghost::On).map_err(|e| e.to_string())?;
    let g = m1.scalars.get(&Ident::new("gamma")).cloned();
    ensure(g == Some(Rel::Pair(13, 10)), || format!("a = [1,1,1,1,1], k = 2 gives gamma {g:?}"))?;
    Ok(format!("replayed gamma ({g1}, {g2}); a = [1,1,1,1,1], k = 2 gives (13, 10)"))
}

// ---- 4 ----

fn c4() -> Result<String, String> {
    let strong = corpus_spec("ni_strong_inv");
    let out = timed(Duration::from_secs(60), "strong refute", || run(&strong, Task::Refute, Some(Mode::Rel)))?;
    let Verdict::Refuted(w) = &out.verdict else {
        return Err(format!("strong invariant: expected refuted, got {}", out.verdict.name()));
    };
    ensure(w.transcript.confirms(), || "the witness does not replay to a violation".into())?;
    let Ok(ConcState::Rel(fin)) = &w.transcript.outcome else {
        return Err("the replay did not finish with a relational memory".into());
    };
    let differs = |x: &str| fin.scalars.get(&Ident::new(x)).is_some_and(|v| v.is_pair());
    ensure(differs("o") || differs("t"), || format!("final o and t agree: {fin}"))?;
    // Re-run the witness independently of the engine.
    let ConcState::Rel(init) = &w.transcript.initial else {
        return Err("the witness is not relational".into());
    };
    let cmd = spec_program(&strong);
    let again = run_r(init, &cmd, 100_000, Ghost::Off).map_err(|e| e.to_string())?;
    ensure(&again == fin, || "re-running the witness gives a different final memory".into())?;

    let m0 = rel_memory(&cmd, Ghost::Off, &[], &[
        ("p", Rel::One(arr(&[0]))),
        ("s", Rel::Pair(arr(&[0]), arr(&[1]))),
    ]);
    let m1 = run_r(&m0, &cmd, 100_000, Ghost::Off).map_err(|e| e.to_string())?;
    for x in ["o", "t"] {
        let v = m1.scalars.get(&Ident::new(x)).cloned();
        ensure(v == Some(Rel::Pair(0, 1)), || format!("p = [0], s = ([0], [1]) gives {x} = {v:?}"))?;
    }
    let post = eval_rel_assertion(&m1, &strong.ensures, &BTreeMap::new());
    ensure(post == Ok(false), || format!("the postcondition evaluates to {post:?} on the known leak"))?;

    let weak = corpus_spec("ni_weak_inv");
    let out = timed(Duration::from_secs(60), "weak refute", || run(&weak, Task::Refute, Some(Mode::Rel)))?;
    let Verdict::Inconclusive { reasons, .. } = &out.verdict else {
        return Err(format!("weak invariant: expected inconclusive, got {}", out.verdict.name()));
    };
    ensure(reasons.iter().any(|r| matches!(r, Reason::WeakInvariant(_))), || {
        format!("weak invariant: no weakness diagnosis in {reasons:?}")
    })?;
    Ok(format!("witness {init} leaks {fin}; weak invariant inconclusive (weak)"))
}

// ---- 5 ----

fn strength_of(spec: &SpecFile) -> Result<(Strength, Duration), String> {
    let start = Instant::now();
    let mut s = session();
    let mut engine = Engine::new(&mut s, Config::default());
    let t = triple_for(spec, Mode::Unary, false).map_err(|e| e.to_string())?;
    let sites = engine.loop_sites(&t, 1_000).map_err(|e| e.to_string())?;
    ensure(sites.len() == 1, || format!("expected one loop site, found {}", sites.len()))?;
    let strength = engine.check_invariant_strength(&sites[0]).map_err(|e| e.to_string())?;
    Ok((strength, start.elapsed()))
}

fn c5() -> Result<String, String> {
    let limit = Duration::from_secs(5);
    let weak = corpus_spec("strength_weak");
    let (s, took) = strength_of(&weak)?;
    ensure(s == Strength::Weak, || format!("inv true: expected weak, got {s:?}"))?;
    ensure(took <= limit, || format!("inv true took {took:.1?}"))?;
    let text = std::fs::read_to_string(corpus_dir().join("strength_weak.spec")).map_err(|e| e.to_string())?;
    let pinned = parse_spec(&text.replace("inv true", "inv z = i")).map_err(|e| e.to_string())?;
    let (s2, took2) = strength_of(&pinned)?;
    ensure(s2 == Strength::Strong, || format!("inv z = i: expected strong, got {s2:?}"))?;
    ensure(took2 <= limit, || format!("inv z = i took {took2:.1?}"))?;
    Ok(format!("true: weak ({took:.1?}); z = i: strong ({took2:.1?})"))
}

// ---- 6 ----

fn c6() -> Result<String, String> {
    const WANT: usize = 500;
    let mut sampler = Sampler::new((arb_program(), arb_inputs()));
    let mut s = session();
    let mut engine = Engine::new(&mut s, Config::default());
    let (mut passed, mut errors) = (0, 0);
    while passed < WANT {
        let (cmd, (ints, a, b)) = sampler.draw();
        let vars = Vars::of_cmd(&cmd);
        let mut m0 = ConcMem::new();
        for (x, v) in SCALARS.iter().zip(&ints) {
            if vars.scalars.contains(&Ident::new(x)) {
                m0.scalars.insert(Ident::new(x), *v);
            }
        }
        for (name, v) in ARRAYS.iter().zip([a, b]) {
            if vars.arrays.contains(&Ident::new(name)) {
                m0.arrays.insert(Ident::new(name), ConcArray(v));
            }
        }
        let Ok(m1) = run_u(&m0, &cmd, 10_000, Ghost::Off) else {
            errors += 1;
            continue;
        };
        let t = Triple {
            pre: relsym_core::Assertion::True,
            body: cmd.clone(),
            post: relsym_core::Assertion::True,
            relational: false,
            ghost: Ghost::Off,
        };
        let ex = engine.explore(&t).map_err(|e| e.to_string())?;
        let AnyMem::Unary(init) = &ex.init else {
            return Err("unary exploration produced a relational memory".into());
        };
        let mut bind = Vec::new();
        for (x, v) in &init.scalars {
            let c = m0.scalars.get(x).ok_or_else(|| format!("symbolic memory has extra scalar {x}"))?;
            bind.push(Formula::eq(scalar_term(*v), Term::Int(*c)));
        }
        for (x, v) in &init.arrays {
            let c = m0.arrays.get(x).ok_or_else(|| format!("symbolic memory has extra array {x}"))?;
            bind.push(Formula::eq(scalar_term(v.len), Term::Int(c.0.len() as i64)));
            for (i, e) in c.0.iter().enumerate() {
                bind.push(Formula::eq(Term::select(Term::Sym(v.content), Term::Int(i as i64 + 1)), Term::Int(*e)));
            }
        }
        let mut matched = 0;
        for n in &ex.finals {
            let mut fs = n.cs.to_vec();
            fs.extend(bind.iter().cloned());
            let Some(sigma) = engine.extract(&fs, &ex.init, &[&n.mem]).map_err(|e| e.to_string())? else {
                continue;
            };
            let AnyMem::Unary(fm) = &n.mem else { unreachable!() };
            let got = sigma.apply_mem(fm).map_err(|e| e.to_string())?;
            if got != m1 {
                return Err(format!("program {cmd:?} from {m0}: feasible final grounds to {got}, concrete run gives {m1}"));
            }
            matched += 1;
        }
        ensure(matched > 0, || format!("program {cmd:?} from {m0}: no symbolic final matches {m1}"))?;
        passed += 1;
    }
    Ok(format!("{passed} runs covered; {errors} draws skipped because the concrete run failed"))
}

fn scalar_term(v: Scalar) -> Term {
    match v {
        Scalar::Int(i) => Term::Int(i),
        Scalar::Sym(s) => Term::Sym(s),
    }
}

// ---- 7 ----

fn has_invariant(c: &Cmd) -> bool {
    match c {
        Cmd::ForInv(..) => true,
        Cmd::Seq(a, b) | Cmd::If(_, a, b) | Cmd::Pair(a, b) => has_invariant(a) || has_invariant(b),
        Cmd::For(_, _, _, b) => has_invariant(b),
        _ => false,
    }
}

fn c7() -> Result<String, String> {
    const SAMPLES: usize = 200;
    let mut notes = Vec::new();
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir()).map_err(|e| e.to_string())?.flatten().map(|e| e.path()).collect();
    files.sort();
    for path in files {
        let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let spec = common::corpus_spec(&name);
        if spec.expect.get("prove").map(String::as_str) != Some("proved") {
            continue;
        }
        let mode = Mode::of_spec(&spec);
        let t = triple_for(&spec, mode, false).map_err(|e| e.to_string())?;
        if has_invariant(&t.body) {
            continue;
        }
        let out = run(&spec, Task::Prove, Some(mode))?;
        expect_verdict(&out, "proved", &name)?;
        let mut s = session();
        let mut engine = Engine::new(&mut s, Config::default());
        let ex = engine.explore(&t).map_err(|e| e.to_string())?;
        if ex.init.array_values().iter().any(|a| matches!(a.len, Scalar::Sym(_))) {
            continue;
        }
        let (sampled, exhausted) = sample_and_replay(&mut engine, &t, &ex, SAMPLES).map_err(|e| format!("{name}: {e}"))?;
        ensure(sampled > 0, || format!("{name}: no substitution satisfies any final"))?;
        ensure(sampled == SAMPLES || exhausted, || format!("{name}: only {sampled} substitutions found"))?;
        notes.push(format!("{name} {sampled}{}", if exhausted { " (all inputs)" } else { "" }));
    }
    ensure(!notes.is_empty(), || "no proved spec with concrete bounds".into())?;
    Ok(notes.join(", "))
}

/// Draws up to `want` distinct initial states round-robin over the finals
/// of `ex`, replaying each. Returns the number replayed and whether the
/// input space ran out first.
fn sample_and_replay(
    engine: &mut Engine<'_>,
    t: &Triple,
    ex: &relsym_core::engine::Exploration,
    want: usize,
) -> Result<(usize, bool), String> {
    let ints: BTreeSet<_> = ex.init.symbols().into_iter().filter(|s| s.sort == relsym_core::lang::Sort::Int).collect();
    let cells: Vec<Term> = ex
        .init
        .array_values()
        .iter()
        .flat_map(|a| {
            let n = a.len.as_int().unwrap_or(0);
            (1..=n).map(move |i| Term::select(Term::Sym(a.content), Term::Int(i)))
        })
        .collect();
    let mut blocked: Vec<Formula> = Vec::new();
    let mut live: Vec<bool> = vec![true; ex.finals.len()];
    let mut done = 0;
    while done < want && live.iter().any(|l| *l) {
        for (k, n) in ex.finals.iter().enumerate() {
            if done >= want || !live[k] {
                continue;
            }
            let mut fs = n.cs.to_vec();
            fs.extend(blocked.iter().cloned());
            let Some(sigma) = engine.extract(&fs, &ex.init, &[&n.mem]).map_err(|e| e.to_string())? else {
                live[k] = false;
                continue;
            };
            let tr = engine.replay(t, &ex.init, &sigma).map_err(|e| e.to_string())?;
            ensure(tr.pre == Ok(true), || format!("precondition is {:?} on {}", tr.pre, tr.initial))?;
            ensure(tr.post == Some(Ok(true)), || format!("postcondition is {:?} from {}", tr.post, tr.initial))?;
            let grounded = match &n.mem {
                AnyMem::Unary(m) => sigma.apply_mem(m).map(ConcState::Unary),
                AnyMem::Rel(m) => sigma.apply_rel_mem(m).map(ConcState::Rel),
            }
            .map_err(|e| e.to_string())?;
            let outcome = tr.outcome.map_err(|e| e.to_string())?;
            ensure(outcome == grounded, || format!("replay from {} ends in {outcome}, final grounds to {grounded}", tr.initial))?;
            let mut differ = Vec::new();
            for s in &ints {
                differ.push(Formula::ne(Term::Sym(*s), Term::Int(sigma.int(*s).map_err(|e| e.to_string())?)));
            }
            for c in &cells {
                let Term::Select(a, i) = c else { unreachable!() };
                let (Term::Sym(a), Some(i)) = (a.as_ref(), i.as_int()) else { unreachable!() };
                let v = sigma.array(*a).map_err(|e| e.to_string())?.get(i);
                differ.push(Formula::ne(c.clone(), Term::Int(v)));
            }
            if differ.is_empty() {
                // A single initial state: nothing more to sample.
                return Ok((done + 1, true));
            }
            blocked.push(Formula::or(differ));
            done += 1;
        }
    }
    Ok((done, done < want))
}

// ---- 8 ----

fn c8() -> Result<String, String> {
    let spec = corpus_spec("increment");
    let r = run(&spec, Task::Prove, Some(Mode::Rel))?;
    let u = run(&spec, Task::Prove, Some(Mode::SelfComp))?;
    let (rs, us) = (r.metrics.assignment_steps(), u.metrics.assignment_steps());
    ensure(rs < us, || format!("assignment steps: relational {rs}, self-composition {us}"))?;

    let files: Vec<_> = ["increment", "ni_array"].iter().map(|n| corpus_dir().join(format!("{n}.spec"))).collect();
    let rows = bench(&files, &RunOptions::default(), 1).map_err(|e| e.to_string())?;
    let header = render(&rows, Format::Markdown).lines().next().unwrap_or_default().to_string();
    for col in ["#BS", "#SS", "#SMT", "#S", "time"] {
        ensure(HEADER.contains(&col) && header.contains(col), || format!("table header lacks {col}: {header}"))?;
    }
    let mut notes = vec![format!("increment assignment steps R {rs} < U {us}")];
    for ex in ["increment", "ni_array"] {
        let finals = |m: Mode| {
            rows.iter()
                .find(|r| r.example == ex && r.mode == m)
                .and_then(|r| r.result.as_ref().ok())
                .map(|(_, met, _)| met.finals)
                .ok_or_else(|| format!("{ex}: no {} row", m.letter()))
        };
        let (fr, fu) = (finals(Mode::Rel)?, finals(Mode::SelfComp)?);
        ensure(fr <= fu, || format!("{ex}: #S relational {fr} > self-composition {fu}"))?;
        notes.push(format!("{ex} #S R {fr} <= U {fu}"));
    }
    Ok(notes.join("; "))
}

// ---- 9 ----

fn c9() -> Result<String, String> {
    let mut n = 0;
    for (name, suite) in suites::ALL {
        suite(256).map_err(|e| format!("{name}: {e}"))?;
        n += 1;
    }
    for (name, suite) in common::SUITES {
        let cases = if name.contains("smt") { 64 } else { 256 };
        suite(cases).map_err(|e| format!("{name}: {e}"))?;
        n += 1;
    }
    Ok(format!("{n} suites green"))
}
