//! An SMT-LIB2 session with an external solver process (z3 by default).
//!
//! One process serves every query of a run. Each query is wrapped in
//! `push`/`pop`, so symbol declarations and assertions never outlive it.
//! Queries are posed in `AUFLIA`; a query with a product of two
//! non-constant terms switches the session to `AUFNIRA` first.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use relsym_core::constraint::{ArithOp, Formula, Term};
use relsym_core::lang::{Sort, Sym};
use relsym_core::solver::{Model, SatStatus, Solver, SolverError};
use relsym_core::CmpOp;

/// Settings of a solver session.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Solver executable; it must accept SMT-LIB2 on standard input.
    pub program: String,
    pub args: Vec<String>,
    /// Per-query timeout in milliseconds; 0 disables it.
    pub timeout_ms: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { program: "z3".into(), args: vec!["-in".into(), "-smt2".into()], timeout_ms: 10_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Logic {
    Linear,
    Nonlinear,
}

impl Logic {
    fn name(self) -> &'static str {
        match self {
            Logic::Linear => "AUFLIA",
            Logic::Nonlinear => "AUFNIRA",
        }
    }
}

/// A running solver process.
pub struct SmtSession {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    config: SolverConfig,
    logic: Logic,
    /// Symbols declared by the current query.
    declared: BTreeSet<Sym>,
    /// Number of `check-sat` commands issued.
    pub queries: u64,
}

fn err(msg: impl Into<String>) -> SolverError {
    SolverError(msg.into())
}

impl SmtSession {
    /// Starts the solver process.
    pub fn start(config: SolverConfig) -> Result<Self, SolverError> {
        let mut child = Command::new(&config.program)
            .args(&config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| err(format!("cannot start `{}`: {e}", config.program)))?;
        let stdin = child.stdin.take().ok_or_else(|| err("solver stdin unavailable"))?;
        let stdout = BufReader::new(child.stdout.take().ok_or_else(|| err("solver stdout unavailable"))?);
        let mut s = SmtSession {
            child,
            stdin,
            stdout,
            config,
            logic: Logic::Linear,
            declared: BTreeSet::new(),
            queries: 0,
        };
        s.preamble()?;
        s.send("(echo \"ready\")")?;
        match s.read_sexp()?.as_str() {
            "ready" | "\"ready\"" => Ok(s),
            other => Err(err(format!("unexpected solver greeting: {other}"))),
        }
    }

    fn preamble(&mut self) -> Result<(), SolverError> {
        self.send("(set-option :print-success false)")?;
        self.send("(set-option :produce-models true)")?;
        if self.config.timeout_ms > 0 {
            let t = self.config.timeout_ms;
            self.send(&format!("(set-option :timeout {t})"))?;
        }
        let logic = self.logic.name();
        self.send(&format!("(set-logic {logic})"))
    }

    fn send(&mut self, cmd: &str) -> Result<(), SolverError> {
        writeln!(self.stdin, "{cmd}").map_err(|e| err(format!("writing to solver: {e}")))?;
        self.stdin.flush().map_err(|e| err(format!("writing to solver: {e}")))
    }

    /// Reads one complete s-expression or atom from the solver.
    fn read_sexp(&mut self) -> Result<String, SolverError> {
        let mut out = String::new();
        let mut depth = 0i64;
        let mut in_str = false;
        loop {
            let mut line = String::new();
            let n = self.stdout.read_line(&mut line).map_err(|e| err(format!("reading from solver: {e}")))?;
            if n == 0 {
                return Err(err("solver terminated unexpectedly"));
            }
            for c in line.chars() {
                match c {
                    '"' => in_str = !in_str,
                    '(' if !in_str => depth += 1,
                    ')' if !in_str => depth -= 1,
                    _ => {}
                }
            }
            out.push_str(&line);
            if depth <= 0 && !in_str && !out.trim().is_empty() {
                let s = out.trim().to_string();
                if s.starts_with("(error") {
                    return Err(err(format!("solver reported {s}")));
                }
                return Ok(s);
            }
        }
    }

    fn switch_logic(&mut self, logic: Logic) -> Result<(), SolverError> {
        if self.logic != logic {
            self.logic = logic;
            self.send("(reset)")?;
            self.preamble()?;
        }
        Ok(())
    }

    fn sym_name(s: Sym) -> String {
        match s.sort {
            Sort::Int => format!("|X{}|", s.id),
            Sort::Array => format!("|A{}|", s.id),
        }
    }

    fn declare(&mut self, syms: &BTreeSet<Sym>) -> Result<(), SolverError> {
        let mut cmd = String::new();
        for s in syms {
            let sort = match s.sort {
                Sort::Int => "Int",
                Sort::Array => "(Array Int Int)",
            };
            let _ = writeln!(cmd, "(declare-fun {} () {sort})", Self::sym_name(*s));
        }
        self.declared = syms.clone();
        if cmd.is_empty() {
            Ok(())
        } else {
            self.send(cmd.trim_end())
        }
    }
}

impl Drop for SmtSession {
    fn drop(&mut self) {
        let _ = self.send("(exit)");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// SMT-LIB2 rendering. Symbols not in `declared` (when given) are replaced
/// by default values, so that models can be queried about them.
struct Printer<'a> {
    declared: Option<&'a BTreeSet<Sym>>,
}

fn int_lit(v: i64) -> String {
    if v < 0 {
        format!("(- {})", v.unsigned_abs())
    } else {
        v.to_string()
    }
}

impl Printer<'_> {
    fn term(&self, t: &Term, out: &mut String) {
        match t {
            Term::Int(v) => out.push_str(&int_lit(*v)),
            Term::Sym(s) => match self.declared {
                Some(d) if !d.contains(s) => out.push_str(match s.sort {
                    Sort::Int => "0",
                    Sort::Array => "((as const (Array Int Int)) 0)",
                }),
                _ => out.push_str(&SmtSession::sym_name(*s)),
            },
            Term::Bound(x) => {
                let _ = write!(out, "|${x}|");
            }
            Term::Arith(op, a, b) => {
                let o = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                let _ = write!(out, "({o} ");
                self.term(a, out);
                out.push(' ');
                self.term(b, out);
                out.push(')');
            }
            Term::Neg(a) => {
                out.push_str("(- ");
                self.term(a, out);
                out.push(')');
            }
            Term::Select(a, i) => {
                out.push_str("(select ");
                self.term(a, out);
                out.push(' ');
                self.term(i, out);
                out.push(')');
            }
            Term::Store(a, i, v) => {
                out.push_str("(store ");
                self.term(a, out);
                out.push(' ');
                self.term(i, out);
                out.push(' ');
                self.term(v, out);
                out.push(')');
            }
            Term::Ite(c, a, b) => {
                out.push_str("(ite ");
                self.formula(c, out);
                out.push(' ');
                self.term(a, out);
                out.push(' ');
                self.term(b, out);
                out.push(')');
            }
        }
    }

    fn nary(&self, op: &str, unit: &str, fs: &[Formula], out: &mut String) {
        match fs {
            [] => out.push_str(unit),
            [f] => self.formula(f, out),
            _ => {
                let _ = write!(out, "({op}");
                for f in fs {
                    out.push(' ');
                    self.formula(f, out);
                }
                out.push(')');
            }
        }
    }

    fn formula(&self, f: &Formula, out: &mut String) {
        match f {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Cmp(op, a, b) => {
                let o = match op {
                    CmpOp::Eq | CmpOp::Ne => "=",
                    CmpOp::Lt => "<",
                    CmpOp::Le => "<=",
                    CmpOp::Gt => ">",
                    CmpOp::Ge => ">=",
                };
                if *op == CmpOp::Ne {
                    out.push_str("(not ");
                }
                let _ = write!(out, "({o} ");
                self.term(a, out);
                out.push(' ');
                self.term(b, out);
                out.push(')');
                if *op == CmpOp::Ne {
                    out.push(')');
                }
            }
            Formula::Not(a) => {
                out.push_str("(not ");
                self.formula(a, out);
                out.push(')');
            }
            Formula::And(fs) => self.nary("and", "true", fs, out),
            Formula::Or(fs) => self.nary("or", "false", fs, out),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                out.push_str(if matches!(f, Formula::Implies(..)) { "(=> " } else { "(= " });
                self.formula(a, out);
                out.push(' ');
                self.formula(b, out);
                out.push(')');
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let q = if matches!(f, Formula::Forall(..)) { "forall" } else { "exists" };
                let _ = write!(out, "({q} ((|${x}| Int)) ");
                self.formula(body, out);
                out.push(')');
            }
        }
    }
}

/// Renders a formula in SMT-LIB2 syntax.
pub fn to_smtlib(f: &Formula) -> String {
    let mut s = String::new();
    Printer { declared: None }.formula(f, &mut s);
    s
}

fn term_nonlinear(t: &Term) -> bool {
    match t {
        Term::Int(_) | Term::Sym(_) | Term::Bound(_) => false,
        Term::Arith(ArithOp::Mul, a, b) if a.as_int().is_none() && b.as_int().is_none() => true,
        Term::Arith(_, a, b) | Term::Select(a, b) => term_nonlinear(a) || term_nonlinear(b),
        Term::Neg(a) => term_nonlinear(a),
        Term::Store(a, i, v) => term_nonlinear(a) || term_nonlinear(i) || term_nonlinear(v),
        Term::Ite(c, a, b) => formula_nonlinear(c) || term_nonlinear(a) || term_nonlinear(b),
    }
}

fn formula_nonlinear(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False => false,
        Formula::Cmp(_, a, b) => term_nonlinear(a) || term_nonlinear(b),
        Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => formula_nonlinear(a),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(formula_nonlinear),
        Formula::Implies(a, b) | Formula::Iff(a, b) => formula_nonlinear(a) || formula_nonlinear(b),
    }
}

/// A minimal s-expression reader for `get-value` responses.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexp(s: &str) -> Option<Sexp> {
    fn tokens(s: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = String::new();
        let mut in_bar = false;
        for c in s.chars() {
            if in_bar {
                cur.push(c);
                if c == '|' {
                    in_bar = false;
                }
                continue;
            }
            match c {
                '(' | ')' => {
                    if !cur.is_empty() {
                        out.push(std::mem::take(&mut cur));
                    }
                    out.push(c.to_string());
                }
                '|' => {
                    in_bar = true;
                    cur.push(c);
                }
                c if c.is_whitespace() => {
                    if !cur.is_empty() {
                        out.push(std::mem::take(&mut cur));
                    }
                }
                c => cur.push(c),
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
        out
    }
    fn go(toks: &[String], at: &mut usize) -> Option<Sexp> {
        let t = toks.get(*at)?;
        *at += 1;
        match t.as_str() {
            "(" => {
                let mut items = Vec::new();
                loop {
                    if toks.get(*at)? == ")" {
                        *at += 1;
                        return Some(Sexp::List(items));
                    }
                    items.push(go(toks, at)?);
                }
            }
            ")" => None,
            a => Some(Sexp::Atom(a.to_string())),
        }
    }
    let toks = tokens(s);
    let mut at = 0;
    let e = go(&toks, &mut at)?;
    (at == toks.len()).then_some(e)
}

/// Reads an integer value: `5`, `(- 5)`.
fn sexp_int(e: &Sexp) -> Option<i64> {
    match e {
        Sexp::Atom(a) => a.parse().ok(),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(m), x] if m == "-" => sexp_int(x)?.checked_neg(),
            _ => None,
        },
    }
}

struct SessionModel<'a> {
    session: &'a mut SmtSession,
}

impl Model for SessionModel<'_> {
    fn eval(&mut self, terms: &[Term]) -> Result<Vec<i64>, SolverError> {
        if terms.is_empty() {
            return Ok(Vec::new());
        }
        let declared = self.session.declared.clone();
        let printer = Printer { declared: Some(&declared) };
        let mut out = Vec::with_capacity(terms.len());
        for chunk in terms.chunks(256) {
            let mut cmd = String::from("(get-value (");
            for t in chunk {
                printer.term(t, &mut cmd);
                cmd.push(' ');
            }
            cmd.push_str("))");
            self.session.send(&cmd)?;
            let resp = self.session.read_sexp()?;
            let parsed = parse_sexp(&resp).ok_or_else(|| err(format!("malformed get-value response: {resp}")))?;
            let Sexp::List(pairs) = parsed else {
                return Err(err(format!("malformed get-value response: {resp}")));
            };
            if pairs.len() != chunk.len() {
                return Err(err(format!("get-value returned {} values for {} terms", pairs.len(), chunk.len())));
            }
            for p in &pairs {
                let v = match p {
                    Sexp::List(kv) if kv.len() == 2 => sexp_int(&kv[1]),
                    _ => None,
                };
                out.push(v.ok_or_else(|| err(format!("non-integer model value in {resp}")))?);
            }
        }
        Ok(out)
    }
}

impl Solver for SmtSession {
    fn check_with(
        &mut self,
        fs: &[Formula],
        probe: &mut dyn FnMut(&mut dyn Model) -> Result<(), SolverError>,
    ) -> Result<SatStatus, SolverError> {
        let logic = if fs.iter().any(formula_nonlinear) { Logic::Nonlinear } else { Logic::Linear };
        self.switch_logic(logic)?;
        let mut syms = BTreeSet::new();
        for f in fs {
            f.collect_symbols(&mut syms);
        }
        self.send("(push 1)")?;
        self.declare(&syms)?;
        let printer = Printer { declared: None };
        let mut cmd = String::new();
        for f in fs {
            cmd.push_str("(assert ");
            printer.formula(f, &mut cmd);
            cmd.push_str(")\n");
        }
        cmd.push_str("(check-sat)");
        self.send(&cmd)?;
        self.queries += 1;
        let answer = self.read_sexp()?;
        let result = match answer.as_str() {
            "sat" => {
                probe(&mut SessionModel { session: self }).map(|()| SatStatus::Sat)
            }
            "unsat" => Ok(SatStatus::Unsat),
            "unknown" => {
                self.send("(get-info :reason-unknown)")?;
                let why = self.read_sexp()?;
                let reason = match parse_sexp(&why) {
                    Some(Sexp::List(items)) => match items.as_slice() {
                        [_, Sexp::Atom(r)] => r.trim_matches('"').to_string(),
                        _ => why.clone(),
                    },
                    _ => why.clone(),
                };
                Ok(SatStatus::Unknown(reason))
            }
            other => Err(err(format!("unexpected check-sat answer: {other}"))),
        };
        self.send("(pop 1)")?;
        self.declared.clear();
        result
    }
}
