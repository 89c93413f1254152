//! Glue between spec files, the baselines, the engine and the solver.

use std::fmt;
use std::time::{Duration, Instant};

use relsym_core::baselines::{self, BaselineError};
use relsym_core::concrete::Ghost;
use relsym_core::engine::{Config, Engine, EngineError, Metrics, Strategy, Triple, Verdict};
use relsym_core::lang::{proj_cmd, Cmd, Side};
use relsym_core::solver::SolverError;

use crate::parse::{ParseError, SpecFile, SpecMode};
use crate::smt::{SmtSession, SolverConfig};

/// How a specification is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    /// Relational symbolic execution.
    Rel,
    /// Unary symbolic execution of the self-composed program.
    SelfComp,
    /// Unary symbolic execution of the product program.
    Product,
    /// Unary symbolic execution of a unary specification.
    Unary,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Rel => "rel",
            Mode::SelfComp => "self",
            Mode::Product => "prod",
            Mode::Unary => "unary",
        }
    }

    /// Column label of the benchmark tables.
    pub fn letter(self) -> &'static str {
        match self {
            Mode::Rel => "R",
            Mode::SelfComp => "U",
            Mode::Product => "P",
            Mode::Unary => "U",
        }
    }

    /// The natural mode of a specification.
    pub fn of_spec(spec: &SpecFile) -> Mode {
        match spec.mode {
            SpecMode::Relational => Mode::Rel,
            SpecMode::Unary => Mode::Unary,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What to establish about a specification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Prove,
    Refute,
}

/// Errors of a run, each with its own exit code.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Io(String, std::io::Error),
    Parse(String, ParseError),
    Baseline(BaselineError),
    Engine(EngineError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 10,
            RunError::Io(..) => 11,
            RunError::Parse(..) => 12,
            RunError::Baseline(_) => 13,
            RunError::Engine(EngineError::Spec(_)) => 12,
            RunError::Engine(EngineError::Eval(_)) => 14,
            RunError::Engine(EngineError::Solver(_)) => 15,
            RunError::Engine(EngineError::ReplayMismatch(_)) => 16,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "{m}"),
            RunError::Io(path, e) => write!(f, "{path}: {e}"),
            RunError::Parse(path, e) => write!(f, "{path}:{e}"),
            RunError::Baseline(e) => write!(f, "{e}"),
            RunError::Engine(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<EngineError> for RunError {
    fn from(e: EngineError) -> Self {
        RunError::Engine(e)
    }
}

impl From<SolverError> for RunError {
    fn from(e: SolverError) -> Self {
        RunError::Engine(EngineError::Solver(e))
    }
}

impl From<BaselineError> for RunError {
    fn from(e: BaselineError) -> Self {
        RunError::Baseline(e)
    }
}

/// Reads and parses a spec file.
pub fn load_spec(path: &std::path::Path) -> Result<SpecFile, RunError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(shown.clone(), e))?;
    crate::parse::parse_spec(&text).map_err(|e| RunError::Parse(shown, e))
}

/// Knobs of a prove/refute run.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Checking mode; the spec's natural mode if unset.
    pub mode: Option<Mode>,
    pub strategy: Option<Strategy>,
    pub budget: Option<u64>,
    pub lmax: i64,
    /// Forces ghost-cost instrumentation on regardless of the spec.
    pub ghost_cost: bool,
    pub solver: SolverConfig,
    /// Wall-clock limit for the whole run.
    pub time_limit: Option<Duration>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: None,
            strategy: None,
            budget: None,
            lmax: Config::default().lmax,
            ghost_cost: false,
            solver: SolverConfig::default(),
            time_limit: None,
        }
    }
}

/// The program of a spec as a single command: in two-program mode, the
/// pair of the two programs.
pub fn spec_program(spec: &SpecFile) -> Cmd {
    match &spec.program2 {
        Some(c2) => Cmd::pair(proj_cmd(Side::Left, &spec.program), proj_cmd(Side::Right, c2)),
        None => spec.program.clone(),
    }
}

/// The triple checked for a spec in a given mode.
pub fn triple_for(spec: &SpecFile, mode: Mode, ghost_cost: bool) -> Result<Triple, RunError> {
    let ghost = if ghost_cost || spec.ghost_cost { Ghost::On } else { Ghost::Off };
    let relational = spec.mode == SpecMode::Relational;
    let t = Triple {
        pre: spec.requires.clone(),
        body: spec_program(spec),
        post: spec.ensures.clone(),
        relational,
        ghost,
    };
    match (mode, relational) {
        (Mode::Unary, false) => Ok(t),
        (Mode::Unary, true) => Err(RunError::Usage("mode `unary` needs a unary specification".into())),
        (_, false) => Err(RunError::Usage(format!("mode `{mode}` needs a relational specification"))),
        (Mode::Rel, true) => Ok(t),
        (Mode::SelfComp, true) => Ok(baselines::self_compose(&t)?),
        (Mode::Product, true) => Ok(baselines::product(&t)?),
    }
}

/// Result of a prove or refute run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub task: Task,
    pub mode: Mode,
    pub triple: Triple,
    pub verdict: Verdict,
    pub metrics: Metrics,
    pub elapsed: Duration,
}

impl RunOutcome {
    /// Exit code: 0 for the verdict the task asked for, 1 for the
    /// negative verdict, 2 for inconclusive ones.
    pub fn exit_code(&self) -> i32 {
        exit_code(self.task, &self.verdict)
    }
}

pub fn exit_code(task: Task, v: &Verdict) -> i32 {
    match (task, v) {
        (_, Verdict::Inconclusive { .. }) => 2,
        (Task::Prove, Verdict::Proved) | (Task::Refute, Verdict::Refuted(_)) => 0,
        (Task::Prove, Verdict::NotProved(_)) | (Task::Refute, Verdict::NoCounterexampleFound) => 1,
        // A driver never returns the other task's verdicts.
        (Task::Prove, _) | (Task::Refute, _) => 2,
    }
}

/// Runs one task on a triple with a fresh solver session.
pub fn run_triple(t: &Triple, task: Task, mode: Mode, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let mut session = SmtSession::start(opts.solver.clone())?;
    let config = Config {
        prove_strategy: opts.strategy,
        disprove_strategy: opts.strategy,
        budget: opts.budget,
        lmax: opts.lmax,
        ..Config::default()
    };
    let start = Instant::now();
    let deadline = opts.time_limit.map(|d| start + d);
    let expired = move || deadline.is_some_and(|d| Instant::now() >= d);
    let mut engine = Engine::new(&mut session, config).with_interrupt(&expired);
    let verdict = match task {
        Task::Prove => engine.prove(t)?,
        Task::Refute => engine.disprove(t)?,
    };
    let metrics = engine.metrics.clone();
    Ok(RunOutcome { task, mode, triple: t.clone(), verdict, metrics, elapsed: start.elapsed() })
}

/// Checks a parsed spec under the requested options.
pub fn run_spec(spec: &SpecFile, task: Task, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let mode = opts.mode.unwrap_or_else(|| Mode::of_spec(spec));
    let t = triple_for(spec, mode, opts.ghost_cost)?;
    run_triple(&t, task, mode, opts)
}
