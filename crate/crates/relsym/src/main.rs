use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use relsym::bench::{self, Format};
use relsym::exec::{execute, parse_setting, Setting};
use relsym::report;
use relsym::run::{load_spec, run_spec, Mode, RunError, RunOptions, Task};
use relsym::smt::SolverConfig;
use relsym_core::engine::Strategy;

#[derive(Parser)]
#[command(name = "relsym", version, about = "Prove or refute relational specifications by relational symbolic execution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Try to prove a spec (exit 0 proved, 1 not proved, 2 inconclusive).
    Prove(CheckArgs),
    /// Search for a replayed counterexample (exit 0 refuted, 1 none found, 2 inconclusive).
    Refute(CheckArgs),
    /// Execute a spec's program concretely and print the final memory.
    Run(RunArgs),
    /// Run every spec of a corpus directory in the R, U and P modes.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rel,
    #[value(name = "self")]
    SelfComp,
    Prod,
    Unary,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Bfs,
    Dfs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Markdown,
    Csv,
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// Checking mode (default: the spec's own mode).
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Exploration order (default: dfs for prove, bfs for refute).
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Maximum number of configuration expansions.
    #[arg(long)]
    budget: Option<u64>,
    /// Solver executable (SMT-LIB2 on standard input).
    #[arg(long, default_value = "z3")]
    solver: String,
    /// Per-query solver timeout in milliseconds.
    #[arg(long, default_value_t = 10_000)]
    timeout_ms: u64,
    /// Wall-clock limit for the whole run in milliseconds.
    #[arg(long)]
    time_limit_ms: Option<u64>,
    /// Upper bound on symbolic array lengths in counterexamples.
    #[arg(long, default_value_t = 8)]
    lmax: i64,
    /// Count assignments in ghost variables (gamma, or gamma1/gamma2).
    #[arg(long)]
    ghost_cost: bool,
}

impl EngineArgs {
    fn options(&self) -> RunOptions {
        let (program, args) = solver_command(&self.solver);
        RunOptions {
            mode: self.mode.map(|m| match m {
                ModeArg::Rel => Mode::Rel,
                ModeArg::SelfComp => Mode::SelfComp,
                ModeArg::Prod => Mode::Product,
                ModeArg::Unary => Mode::Unary,
            }),
            strategy: self.strategy.map(|s| match s {
                StrategyArg::Bfs => Strategy::Bfs,
                StrategyArg::Dfs => Strategy::Dfs,
            }),
            budget: self.budget,
            lmax: self.lmax,
            ghost_cost: self.ghost_cost,
            solver: SolverConfig { program, args, timeout_ms: self.timeout_ms },
            time_limit: self.time_limit_ms.map(Duration::from_millis),
        }
    }
}

/// z3 needs `-in -smt2` to read a script from standard input; other
/// solvers are started without arguments.
fn solver_command(path: &str) -> (String, Vec<String>) {
    let is_z3 = Path::new(path).file_stem().is_some_and(|s| s == "z3");
    let args = if is_z3 { vec!["-in".into(), "-smt2".into()] } else { Vec::new() };
    (path.to_string(), args)
}

#[derive(Args)]
struct CheckArgs {
    /// Spec file.
    spec: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    /// Write the solver pruning checks as JSON lines to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write a JSON report to this file (`-` for standard output, in place
    /// of the text report).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Spec file.
    spec: PathBuf,
    /// Initial value, e.g. `x=3`, `a=[1,2]`, `x@2=1` (repeatable).
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
    /// Count assignments in ghost variables.
    #[arg(long)]
    ghost_cost: bool,
    /// Maximum number of steps.
    #[arg(long, default_value_t = 1_000_000)]
    fuel: u64,
    /// Print every step as a JSON line on standard output.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of `.spec` files.
    #[arg(default_value = "corpus")]
    dir: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_enum, default_value = "markdown")]
    format: FormatArg,
    /// Number of runs executed in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the table to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn is_stdout(path: &Path) -> bool {
    path == Path::new("-")
}

fn write_stdout(text: &str) -> Result<(), RunError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| RunError::Io("<stdout>".into(), e))
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    if is_stdout(path) {
        return write_stdout(text);
    }
    std::fs::write(path, text).map_err(|e| RunError::Io(path.display().to_string(), e))
}

fn check(args: &CheckArgs, task: Task) -> Result<i32, RunError> {
    let spec = load_spec(&args.spec)?;
    let outcome = run_spec(&spec, task, &args.engine.options())?;
    let name = args.spec.display().to_string();
    // A JSON report on standard output replaces the text report.
    if !args.json.as_deref().is_some_and(is_stdout) {
        write_stdout(&report::outcome_text(&name, &outcome))?;
    }
    if let Some(path) = &args.json {
        let v = report::outcome_json(&name, &outcome);
        write_file(path, &format!("{}\n", serde_json::to_string_pretty(&v).expect("report serializes")))?;
    }
    if let Some(path) = &args.trace {
        let lines: String = outcome.metrics.prune_log.iter().map(|e| format!("{}\n", report::prune_json(e))).collect();
        write_file(path, &lines)?;
    }
    Ok(outcome.exit_code())
}

fn run(args: &RunArgs) -> Result<i32, RunError> {
    let spec = load_spec(&args.spec)?;
    let settings: Vec<Setting> =
        args.set.iter().map(|s| parse_setting(s)).collect::<Result<_, _>>().map_err(RunError::Usage)?;
    let r = execute(&spec, &settings, args.ghost_cost, args.fuel, args.trace).map_err(RunError::Usage)?;
    let mut out = std::io::stdout().lock();
    for step in &r.trace {
        let _ = writeln!(out, "{step}");
    }
    let describe = relsym_core::concrete::assert_eval::describe;
    let _ = writeln!(out, "initial: {}", r.initial);
    let _ = writeln!(out, "requires: {}", describe(&r.pre));
    match &r.outcome {
        Ok(m) => {
            let _ = writeln!(out, "final: {m}");
        }
        Err(e) => {
            let _ = writeln!(out, "run failed: {e}");
        }
    }
    if let Some(p) = &r.post {
        let _ = writeln!(out, "ensures: {}", describe(p));
    }
    Ok(if r.outcome.is_ok() { 0 } else { 1 })
}

fn bench_cmd(args: &BenchArgs) -> Result<i32, RunError> {
    let files = bench::corpus_files(&args.dir)?;
    let rows = bench::bench(&files, &args.engine.options(), args.jobs)?;
    let format = match args.format {
        FormatArg::Markdown => Format::Markdown,
        FormatArg::Csv => Format::Csv,
    };
    let table = bench::render(&rows, format);
    match &args.out {
        Some(p) => write_file(p, &table)?,
        None => write_stdout(&table)?,
    }
    for r in &rows {
        if let Err(e) = &r.result {
            eprintln!("{} [{}]: {e}", r.example, r.mode);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Prove(a) => check(a, Task::Prove),
        Command::Refute(a) => check(a, Task::Refute),
        Command::Run(a) => run(a),
        Command::Bench(a) => bench_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("relsym: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
