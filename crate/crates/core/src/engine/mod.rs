//! The collecting semantics and the drivers built on it.
//!
//! An [`Engine`] owns the symbol generator, the rigid symbols of logical
//! variables, the metrics and a solver handle. [`Engine::collect_step`]
//! expands one pending configuration of a [`Frontier`], pruning successors
//! whose path constraints are unsatisfiable and discharging the proof
//! obligations of the invariant rule. [`Engine::prove`] and
//! [`Engine::disprove`] drive the frontier to completion.

mod drivers;
pub use drivers::Exploration;
mod init;
mod strength;
mod witness;

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::concrete::relational::Schedule;
use crate::concrete::{Ghost, Rule};
use crate::constraint::{translate, ConstraintSet, Formula, TransEnv, Translated, Translator};
use crate::error::EvalError;
use crate::lang::{Cmd, Expr, Ident, Sym, SymGen};
use crate::relsym::{step_rs, RConfig};
use crate::solver::{SatStatus, Solver, SolverError, Validity};
use crate::symbolic::{step_s, AnyMem, Exec, LoopSite, Obligation, Outcome, Succ, UConfig};

pub use crate::symbolic::Triple;
pub use strength::Strength;
pub use witness::{ConcState, Transcript};

/// Exploration order of the frontier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    #[default]
    Bfs,
    Dfs,
}

/// Engine parameters.
#[derive(Clone, Debug)]
pub struct Config {
    /// Order for [`Engine::prove`]; depth-first if unset.
    pub prove_strategy: Option<Strategy>,
    /// Order for [`Engine::disprove`]; breadth-first if unset.
    pub disprove_strategy: Option<Strategy>,
    /// Maximum number of configuration expansions (including those of
    /// recursive loop-body proofs); unlimited if unset.
    pub budget: Option<u64>,
    /// Upper bound on symbolic array lengths in extracted witnesses.
    pub lmax: i64,
    /// Scheduling of pair commands.
    pub schedule: Schedule,
    /// Fuel for concrete replay.
    pub fuel: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            prove_strategy: None,
            disprove_strategy: None,
            budget: None,
            lmax: 8,
            schedule: Schedule::LeftFirst,
            fuel: 1_000_000,
        }
    }
}

/// Solver verdict on one branch successor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneStatus {
    /// Unsatisfiable: the successor was discarded.
    Pruned,
    Kept,
    /// The solver could not decide; the successor was kept.
    Unknown,
}

/// One eager satisfiability check of a branching successor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PruneEvent {
    pub guard: Expr,
    pub outcome: Outcome,
    pub status: PruneStatus,
    /// Nesting depth of loop-body proofs the check happened in.
    pub depth: u32,
}

/// Counters collected over a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    /// Big-step expression evaluations.
    pub big_steps: u64,
    /// Small-step transitions (successors generated).
    pub small_steps: u64,
    /// Solver queries.
    pub smt_calls: u64,
    /// Final configurations reached.
    pub finals: u64,
    /// Configurations expanded.
    pub expansions: u64,
    pub steps_by_rule: BTreeMap<Rule, u64>,
    pub prune_log: Vec<PruneEvent>,
}

impl Metrics {
    /// Number of transitions tagged with an assignment rule.
    pub fn assignment_steps(&self) -> u64 {
        self.steps_by_rule.iter().filter(|(r, _)| r.is_assignment()).map(|(_, n)| n).sum()
    }

    pub fn pruned(&self) -> usize {
        self.prune_log.iter().filter(|e| e.status == PruneStatus::Pruned).count()
    }
}

/// Why a run could not reach a definite verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    SolverUnknown(String),
    Budget,
    Interrupted,
    /// The invariant of the loop over this counter may not hold on entry.
    EntryFailed(Ident),
    /// The invariant of the loop over this counter is not inductive.
    NotInductive { counter: Ident, detail: String },
    /// A candidate counterexample went through a loop whose invariant is
    /// weak, so it may be spurious.
    WeakInvariant(Ident),
    StrengthUnknown { counter: Ident, detail: String },
    /// No ground substitution with array lengths up to `lmax` was found.
    WitnessTooLarge,
    /// A witness from a path with undecided pruning checks did not replay.
    ReplayFailed(String),
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::SolverUnknown(r) => write!(f, "solver returned unknown ({r})"),
            Reason::Budget => f.write_str("exploration budget exhausted"),
            Reason::Interrupted => f.write_str("interrupted (timeout)"),
            Reason::EntryFailed(x) => write!(f, "invariant of loop over `{x}` may not hold on entry"),
            Reason::NotInductive { counter, detail } => {
                write!(f, "invariant of loop over `{counter}` is not inductive: {detail}")
            }
            Reason::WeakInvariant(x) => write!(f, "invariant of loop over `{x}` is weak; candidate may be spurious"),
            Reason::StrengthUnknown { counter, detail } => {
                write!(f, "strength of invariant of loop over `{counter}` undecided ({detail})")
            }
            Reason::WitnessTooLarge => f.write_str("no witness with array lengths within lmax"),
            Reason::ReplayFailed(d) => write!(f, "candidate did not replay: {d}"),
        }
    }
}

/// A final configuration whose constraints do not entail the postcondition.
#[derive(Clone, Debug)]
pub struct FailedFinal {
    pub mem: AnyMem,
    pub constraints: ConstraintSet,
}

/// A concrete counterexample: the substitution and its replay.
#[derive(Clone, Debug)]
pub struct Witness {
    pub sigma: crate::constraint::GroundSubstitution,
    pub transcript: Transcript,
}

/// A counterexample candidate that could not be confirmed.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub witness: Witness,
    /// Counters of the loops with weak invariants on its path.
    pub weak_loops: Vec<Ident>,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Proved,
    NotProved(Vec<FailedFinal>),
    Refuted(alloc::boxed::Box<Witness>),
    NoCounterexampleFound,
    Inconclusive { reasons: Vec<Reason>, candidate: Option<alloc::boxed::Box<Candidate>> },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Proved => "proved",
            Verdict::NotProved(_) => "not-proved",
            Verdict::Refuted(_) => "refuted",
            Verdict::NoCounterexampleFound => "no-counterexample-found",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Fatal failures: malformed input, solver crashes, and replay
/// mismatches (which indicate an engine bug).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EngineError {
    Eval(EvalError),
    Solver(SolverError),
    Spec(String),
    ReplayMismatch(String),
}

impl From<EvalError> for EngineError {
    fn from(e: EvalError) -> Self {
        EngineError::Eval(e)
    }
}

impl From<SolverError> for EngineError {
    fn from(e: SolverError) -> Self {
        EngineError::Solver(e)
    }
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::Eval(e) => write!(f, "{e}"),
            EngineError::Solver(e) => write!(f, "{e}"),
            EngineError::Spec(s) => write!(f, "ill-formed specification: {s}"),
            EngineError::ReplayMismatch(s) => write!(f, "internal error: witness replay mismatch: {s}"),
        }
    }
}

/// A configuration in the frontier, with the loop sites on its path.
#[derive(Clone, Debug)]
pub struct Node {
    pub mem: AnyMem,
    pub cmd: Cmd,
    pub cs: ConstraintSet,
    pub sites: Vec<(u64, Arc<LoopSite>)>,
    /// Some pruning check on the path came back unknown.
    pub tainted: bool,
}

/// Pending and final configurations of one exploration.
#[derive(Clone, Debug)]
pub struct Frontier {
    pub pending: VecDeque<Node>,
    pub finals: Vec<Node>,
    pub strategy: Strategy,
    pub ghost: Ghost,
    pub reasons: Vec<Reason>,
}

impl Frontier {
    pub fn new(root: Node, strategy: Strategy, ghost: Ghost) -> Self {
        let mut f = Frontier { pending: VecDeque::new(), finals: Vec::new(), strategy, ghost, reasons: Vec::new() };
        f.add(root);
        f
    }

    fn add(&mut self, n: Node) {
        if n.cmd.is_skip() {
            self.finals.push(n);
        } else {
            self.pending.push_back(n);
        }
    }

    fn pop(&mut self) -> Option<Node> {
        match self.strategy {
            Strategy::Bfs => self.pending.pop_front(),
            Strategy::Dfs => self.pending.pop_back(),
        }
    }

    pub(crate) fn note(&mut self, r: Reason) {
        push_reason(&mut self.reasons, r);
    }
}

pub(crate) fn push_reason(v: &mut Vec<Reason>, r: Reason) {
    if !v.contains(&r) {
        v.push(r);
    }
}

pub struct Engine<'s> {
    solver: &'s mut dyn Solver,
    pub config: Config,
    pub metrics: Metrics,
    pub(crate) gen: SymGen,
    pub(crate) rigid: BTreeMap<Ident, Sym>,
    interrupt: Option<&'s dyn Fn() -> bool>,
    body_cache: BTreeMap<Triple, Result<(), String>>,
    strength_cache: BTreeMap<u64, Strength>,
    next_site: u64,
    depth: u32,
}

impl<'s> Engine<'s> {
    pub fn new(solver: &'s mut dyn Solver, config: Config) -> Self {
        Engine {
            solver,
            config,
            metrics: Metrics::default(),
            gen: SymGen::new(),
            rigid: BTreeMap::new(),
            interrupt: None,
            body_cache: BTreeMap::new(),
            strength_cache: BTreeMap::new(),
            next_site: 0,
            depth: 0,
        }
    }

    /// Installs a callback polled before every expansion; when it returns
    /// true the run stops with [`Reason::Interrupted`].
    pub fn with_interrupt(mut self, f: &'s dyn Fn() -> bool) -> Self {
        self.interrupt = Some(f);
        self
    }

    /// Rigid symbols standing for the free logical variables seen so far.
    pub fn rigid(&self) -> &BTreeMap<Ident, Sym> {
        &self.rigid
    }

    pub(crate) fn sat(&mut self, fs: &[Formula]) -> Result<SatStatus, EngineError> {
        if fs.iter().any(|f| *f == Formula::False) {
            return Ok(SatStatus::Unsat);
        }
        self.metrics.smt_calls += 1;
        Ok(self.solver.check(fs)?)
    }

    pub(crate) fn sat_with(
        &mut self,
        fs: &[Formula],
        probe: &mut dyn FnMut(&mut dyn crate::solver::Model) -> Result<(), SolverError>,
    ) -> Result<SatStatus, EngineError> {
        self.metrics.smt_calls += 1;
        Ok(self.solver.check_with(fs, probe)?)
    }

    fn valid(&mut self, hyps: &[Formula], goal: Translated) -> Result<Validity, EngineError> {
        self.metrics.smt_calls += 1;
        Ok(self.solver.check_valid(hyps, &goal.defs, &goal.body)?)
    }

    pub(crate) fn translate(&mut self, env: &TransEnv<'_>, a: &crate::assertion::Assertion) -> Result<Translated, EngineError> {
        let mut tr = Translator { gen: &mut self.gen, rigid: &mut self.rigid };
        Ok(translate(&mut tr, env, a)?)
    }

    pub(crate) fn stop_reason(&self) -> Option<Reason> {
        if self.interrupt.is_some_and(|f| f()) {
            return Some(Reason::Interrupted);
        }
        match self.config.budget {
            Some(b) if self.metrics.expansions >= b => Some(Reason::Budget),
            _ => None,
        }
    }

    /// One step of the collecting semantics: expands one pending
    /// configuration. Returns `false` when nothing was pending.
    pub fn collect_step(&mut self, f: &mut Frontier) -> Result<bool, EngineError> {
        let Some(node) = f.pop() else {
            return Ok(false);
        };
        self.metrics.expansions += 1;
        let succs = self.successors(&node, f.ghost)?;
        let mut children = Vec::new();
        for s in succs {
            self.metrics.small_steps += 1;
            *self.metrics.steps_by_rule.entry(s.rule).or_insert(0) += 1;
            let mut tainted = node.tainted;
            if s.check || s.cs.has_false() {
                let status = match self.sat(&s.cs.to_vec())? {
                    SatStatus::Unsat => PruneStatus::Pruned,
                    SatStatus::Sat => PruneStatus::Kept,
                    SatStatus::Unknown(_) => PruneStatus::Unknown,
                };
                if let Some(b) = &s.branch {
                    self.metrics.prune_log.push(PruneEvent {
                        guard: b.guard.clone(),
                        outcome: b.outcome,
                        status,
                        depth: self.depth,
                    });
                }
                match status {
                    PruneStatus::Pruned => continue,
                    PruneStatus::Unknown => tainted = true,
                    PruneStatus::Kept => {}
                }
            }
            let mut blocked = false;
            for ob in s.obligations {
                if let Err(r) = self.discharge(ob)? {
                    f.note(r);
                    blocked = true;
                    break;
                }
            }
            if blocked {
                continue;
            }
            let mut sites = node.sites.clone();
            if let Some(site) = s.site {
                sites.push((self.next_site, Arc::new(site)));
                self.next_site += 1;
            }
            children.push(Node { mem: s.mem, cmd: s.cmd, cs: s.cs, sites, tainted });
        }
        if f.strategy == Strategy::Dfs {
            children.reverse();
        }
        for c in children {
            f.add(c);
        }
        Ok(true)
    }

    fn successors(&mut self, node: &Node, ghost: Ghost) -> Result<Vec<Succ<AnyMem>>, EngineError> {
        let schedule = self.config.schedule;
        let mut ex = Exec::new(&mut self.gen, &mut self.rigid, ghost);
        let out = match &node.mem {
            AnyMem::Unary(m) => {
                let cfg = UConfig { mem: m.clone(), cmd: node.cmd.clone(), cs: node.cs.clone() };
                step_s(&mut ex, &cfg).map(|v| v.into_iter().map(|s| s.map_mem(AnyMem::Unary)).collect())
            }
            AnyMem::Rel(m) => {
                let cfg = RConfig { mem: m.clone(), cmd: node.cmd.clone(), cs: node.cs.clone() };
                step_rs(&mut ex, &cfg, schedule).map(|v| v.into_iter().map(|s| s.map_mem(AnyMem::Rel)).collect())
            }
        };
        self.metrics.big_steps += ex.big_steps;
        Ok(out?)
    }

    /// Discharges one side condition of the invariant rule. The outer
    /// `Err` is fatal; the inner one blocks the path.
    fn discharge(&mut self, ob: Obligation) -> Result<Result<(), Reason>, EngineError> {
        match ob {
            Obligation::Entry { counter, hyps, goal } => Ok(match self.valid(&hyps.to_vec(), goal)? {
                Validity::Valid => Ok(()),
                Validity::Invalid => Err(Reason::EntryFailed(counter)),
                Validity::Unknown(r) => Err(Reason::SolverUnknown(r)),
            }),
            Obligation::Body { counter, triple } => {
                Ok(self.prove_body(&triple)?.map_err(|detail| Reason::NotInductive { counter, detail }))
            }
        }
    }
}
