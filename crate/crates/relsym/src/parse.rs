//! Parser for programs, assertions and spec files.
//!
//! The grammar is documented in `docs/grammar.md`. Parsing is a hand-written
//! recursive descent over a token stream; assertions need one point of
//! backtracking, to tell a parenthesized arithmetic expression from a
//! parenthesized assertion.

use std::collections::BTreeMap;
use std::fmt;

use relsym_core::assertion::{AExp, ArrExp, Assertion, CmpOp};
use relsym_core::lang::{is_well_formed, BinOp, Cmd, Expr, Ident, Side, UnOp, Vars};

/// A syntax or well-formedness error with its 1-based position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

type Result<T> = std::result::Result<T, ParseError>;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Ident(String),
    LVar(String),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Ident(x) => write!(f, "`{x}`"),
            Tok::LVar(x) => write!(f, "`${x}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

/// Longest punctuation first.
const PUNCT: &[&str] = &[
    "<==>", "==>", ":=", "!=", "<=", ">=", "&&", "||", "->", ":", ";", ",", ".", "(", ")", "[", "]", "{", "}", "+",
    "-", "*", "=", "<", ">", "!", "@",
];

const KEYWORDS: &[&str] = &[
    "skip", "if", "then", "else", "for", "in", "inv", "do", "len", "abs", "firstdiff", "forall", "exists", "true",
    "false",
];

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

fn lex(text: &str, origin: Pos) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, origin.line, origin.col);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<u64>().map_err(|_| err(line, col, format!("integer literal `{s}` is too large")))?;
            col += i - start;
            out.push((Tok::Int(v), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            if let Some(name) = s.strip_prefix('$') {
                if name.is_empty() {
                    return Err(err(pos.line, pos.col, "expected a logical variable name after `$`".into()));
                }
                out.push((Tok::LVar(name.to_string()), pos));
            } else {
                out.push((Tok::Ident(s), pos));
            }
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 4)].iter().collect();
        match PUNCT.iter().find(|p| rest.starts_with(*p)) {
            Some(p) => {
                i += p.len();
                col += p.len();
                out.push((Tok::Punct(p), pos));
            }
            None => return Err(err(line, col, format!("unexpected character `{c}`"))),
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    /// Whether run indices `@1`/`@2` are allowed in assertions.
    relational: bool,
}

impl Parser {
    fn new(text: &str, origin: Pos, relational: bool) -> Result<Self> {
        Ok(Parser { toks: lex(text, origin)?, at: 0, relational })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let p = self.pos();
        Err(ParseError { line: p.line, col: p.col, msg: msg.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T> {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> Result<Ident> {
        match self.peek().clone() {
            Tok::Ident(x) if !KEYWORDS.contains(&x.as_str()) => {
                self.bump();
                Ok(Ident::new(&x))
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn end(&self) -> Result<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => self.unexpected("end of input"),
        }
    }

    fn negative(&mut self, v: u64) -> Result<i64> {
        let n = -(v as i128);
        i64::try_from(n).or_else(|_| self.error("integer literal out of range"))
    }

    fn positive(&mut self, v: u64) -> Result<i64> {
        i64::try_from(v).or_else(|_| self.error("integer literal out of range"))
    }

    // ---- commands ----

    fn cmd(&mut self) -> Result<Cmd> {
        let first = self.stmt()?;
        if self.eat_punct(";") {
            if self.is_punct("}") || matches!(self.peek(), Tok::Eof) {
                return Ok(first);
            }
            let rest = self.cmd()?;
            return Ok(Cmd::Seq(Box::new(first), Box::new(rest)));
        }
        Ok(first)
    }

    fn block(&mut self) -> Result<Cmd> {
        self.expect_punct("{")?;
        if self.eat_punct("}") {
            return Ok(Cmd::Skip);
        }
        let c = self.cmd()?;
        self.expect_punct("}")?;
        Ok(c)
    }

    fn stmt(&mut self) -> Result<Cmd> {
        if self.is_punct("{") {
            return self.block();
        }
        if self.eat_kw("skip") {
            return Ok(Cmd::Skip);
        }
        if self.eat_kw("if") {
            let g = self.expr()?;
            self.expect_kw("then")?;
            let t = self.block()?;
            let f = if self.eat_kw("else") { self.block()? } else { Cmd::Skip };
            return Ok(Cmd::If(g, Box::new(t), Box::new(f)));
        }
        if self.eat_kw("for") {
            let x = self.ident()?;
            self.expect_kw("in")?;
            let lo = self.expr()?;
            self.expect_punct(":")?;
            let hi = self.expr()?;
            let inv = if self.eat_kw("inv") { Some(self.assertion()?) } else { None };
            self.expect_kw("do")?;
            let body = Box::new(self.block()?);
            return Ok(match inv {
                Some(a) => Cmd::ForInv(x, lo, hi, a, body),
                None => Cmd::For(x, lo, hi, body),
            });
        }
        let x = self.ident()?;
        if self.eat_punct("[") {
            let i = self.expr()?;
            self.expect_punct("]")?;
            self.expect_punct(":=")?;
            let v = self.expr()?;
            return Ok(Cmd::ArrAssign(x, i, v));
        }
        if self.is_punct("@") {
            return self.error("run indices are only allowed in assertions");
        }
        self.expect_punct(":=")?;
        Ok(Cmd::Assign(x, self.expr()?))
    }

    // ---- program expressions ----

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.expr_and()?;
        while self.eat_punct("||") {
            e = Expr::bin(BinOp::Or, e, self.expr_and()?);
        }
        Ok(e)
    }

    fn expr_and(&mut self) -> Result<Expr> {
        let mut e = self.expr_cmp()?;
        while self.eat_punct("&&") {
            e = Expr::bin(BinOp::And, e, self.expr_cmp()?);
        }
        Ok(e)
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek() {
            Tok::Punct("=") => Some(CmpOp::Eq),
            Tok::Punct("!=") => Some(CmpOp::Ne),
            Tok::Punct("<") => Some(CmpOp::Lt),
            Tok::Punct("<=") => Some(CmpOp::Le),
            Tok::Punct(">") => Some(CmpOp::Gt),
            Tok::Punct(">=") => Some(CmpOp::Ge),
            _ => None,
        }
    }

    fn expr_cmp(&mut self) -> Result<Expr> {
        let a = self.expr_add()?;
        if let Some(op) = self.cmp_op() {
            self.bump();
            let b = self.expr_add()?;
            return Ok(Expr::bin(cmp_binop(op), a, b));
        }
        Ok(a)
    }

    fn expr_add(&mut self) -> Result<Expr> {
        let mut e = self.expr_mul()?;
        loop {
            if self.eat_punct("+") {
                e = Expr::bin(BinOp::Add, e, self.expr_mul()?);
            } else if self.eat_punct("-") {
                e = Expr::bin(BinOp::Sub, e, self.expr_mul()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn expr_mul(&mut self) -> Result<Expr> {
        let mut e = self.expr_unary()?;
        while self.eat_punct("*") {
            e = Expr::bin(BinOp::Mul, e, self.expr_unary()?);
        }
        Ok(e)
    }

    fn expr_unary(&mut self) -> Result<Expr> {
        if self.eat_punct("-") {
            if let Tok::Int(v) = *self.peek() {
                self.bump();
                return Ok(Expr::Int(self.negative(v)?));
            }
            return Ok(Expr::Un(UnOp::Neg, Box::new(self.expr_unary()?)));
        }
        if self.eat_punct("!") {
            return Ok(Expr::Un(UnOp::Not, Box::new(self.expr_unary()?)));
        }
        self.expr_atom()
    }

    fn expr_atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(self.positive(v)?))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(k) if k == "len" => {
                self.bump();
                self.expect_punct("(")?;
                let a = self.ident()?;
                self.expect_punct(")")?;
                Ok(Expr::Len(a))
            }
            Tok::Ident(_) => {
                let x = self.ident()?;
                if self.is_punct("@") {
                    return self.error("run indices are only allowed in assertions");
                }
                if self.eat_punct("[") {
                    let i = self.expr()?;
                    self.expect_punct("]")?;
                    return Ok(Expr::Read(x, Box::new(i)));
                }
                Ok(Expr::Var(x))
            }
            _ => self.unexpected("an expression"),
        }
    }

    // ---- assertions ----

    fn assertion(&mut self) -> Result<Assertion> {
        let a = self.a_impl()?;
        if self.eat_punct("<==>") {
            let b = self.a_impl()?;
            return Ok(Assertion::Iff(Box::new(a), Box::new(b)));
        }
        Ok(a)
    }

    fn a_impl(&mut self) -> Result<Assertion> {
        let a = self.a_or()?;
        if self.eat_punct("==>") {
            let b = self.a_impl()?;
            return Ok(Assertion::implies(a, b));
        }
        Ok(a)
    }

    fn a_or(&mut self) -> Result<Assertion> {
        let mut a = self.a_and()?;
        while self.eat_punct("||") {
            a = Assertion::Or(Box::new(a), Box::new(self.a_and()?));
        }
        Ok(a)
    }

    fn a_and(&mut self) -> Result<Assertion> {
        let mut a = self.a_not()?;
        while self.eat_punct("&&") {
            a = Assertion::And(Box::new(a), Box::new(self.a_not()?));
        }
        Ok(a)
    }

    fn a_not(&mut self) -> Result<Assertion> {
        if self.eat_punct("!") {
            return Ok(Assertion::not(self.a_not()?));
        }
        for (kw, forall) in [("forall", true), ("exists", false)] {
            if self.eat_kw(kw) {
                let v = match self.bump() {
                    Tok::LVar(v) => Ident::new(&v),
                    _ => {
                        self.at -= 1;
                        return self.unexpected("a logical variable `$name`");
                    }
                };
                self.expect_punct(".")?;
                let body = Box::new(self.assertion()?);
                return Ok(if forall { Assertion::Forall(v, body) } else { Assertion::Exists(v, body) });
            }
        }
        if self.eat_kw("true") {
            return Ok(Assertion::True);
        }
        if self.eat_kw("false") {
            return Ok(Assertion::False);
        }
        if self.is_punct("(") {
            let save = self.at;
            if let Ok(a) = self.a_atom() {
                return Ok(a);
            }
            self.at = save;
            self.bump();
            let a = self.assertion()?;
            self.expect_punct(")")?;
            return Ok(a);
        }
        self.a_atom()
    }

    fn a_atom(&mut self) -> Result<Assertion> {
        let a = self.aexp()?;
        let Some(op) = self.cmp_op() else {
            return self.unexpected("a comparison operator");
        };
        self.bump();
        let b = self.aexp()?;
        Ok(Assertion::Cmp(op, a, b))
    }

    fn aexp(&mut self) -> Result<AExp> {
        let mut e = self.aexp_mul()?;
        loop {
            if self.eat_punct("+") {
                e = AExp::bin(BinOp::Add, e, self.aexp_mul()?);
            } else if self.eat_punct("-") {
                e = AExp::bin(BinOp::Sub, e, self.aexp_mul()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn aexp_mul(&mut self) -> Result<AExp> {
        let mut e = self.aexp_unary()?;
        while self.eat_punct("*") {
            e = AExp::bin(BinOp::Mul, e, self.aexp_unary()?);
        }
        Ok(e)
    }

    fn aexp_unary(&mut self) -> Result<AExp> {
        if self.eat_punct("-") {
            if let Tok::Int(v) = *self.peek() {
                self.bump();
                return Ok(AExp::Int(self.negative(v)?));
            }
            return Ok(AExp::Un(UnOp::Neg, Box::new(self.aexp_unary()?)));
        }
        self.aexp_atom()
    }

    fn index(&mut self) -> Result<Option<Side>> {
        if !self.eat_punct("@") {
            return Ok(None);
        }
        if !self.relational {
            self.at -= 1;
            return self.error("run indices are not allowed in unary specifications");
        }
        match self.bump() {
            Tok::Int(1) => Ok(Some(Side::Left)),
            Tok::Int(2) => Ok(Some(Side::Right)),
            _ => {
                self.at -= 1;
                self.unexpected("run index `1` or `2`")
            }
        }
    }

    fn arrexp(&mut self) -> Result<ArrExp> {
        let a = self.ident()?;
        let s = self.index()?;
        self.arr_updates(ArrExp::Name(a, s))
    }

    fn arr_updates(&mut self, mut arr: ArrExp) -> Result<ArrExp> {
        while self.eat_punct("{") {
            let i = self.aexp()?;
            self.expect_punct("->")?;
            let v = self.aexp()?;
            self.expect_punct("}")?;
            arr = ArrExp::Update(Box::new(arr), Box::new(i), Box::new(v));
        }
        Ok(arr)
    }

    fn aexp_atom(&mut self) -> Result<AExp> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(AExp::Int(self.positive(v)?))
            }
            Tok::LVar(v) => {
                self.bump();
                Ok(AExp::LVar(Ident::new(&v)))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.aexp()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(k) if k == "len" => {
                self.bump();
                self.expect_punct("(")?;
                let a = self.ident()?;
                let s = self.index()?;
                self.expect_punct(")")?;
                Ok(AExp::Len(a, s))
            }
            Tok::Ident(k) if k == "abs" => {
                self.bump();
                self.expect_punct("(")?;
                let e = self.aexp()?;
                self.expect_punct(")")?;
                Ok(AExp::Abs(Box::new(e)))
            }
            Tok::Ident(k) if k == "firstdiff" => {
                self.bump();
                self.expect_punct("(")?;
                let a = self.arrexp()?;
                self.expect_punct(",")?;
                let b = self.arrexp()?;
                self.expect_punct(",")?;
                let n = self.aexp()?;
                self.expect_punct(")")?;
                Ok(AExp::FirstDiff(Box::new(a), Box::new(b), Box::new(n)))
            }
            Tok::Ident(_) => {
                let x = self.ident()?;
                let s = self.index()?;
                if self.is_punct("{") || self.is_punct("[") {
                    let arr = self.arr_updates(ArrExp::Name(x, s))?;
                    self.expect_punct("[")?;
                    let i = self.aexp()?;
                    self.expect_punct("]")?;
                    return Ok(AExp::read(arr, i));
                }
                Ok(AExp::Var(x, s))
            }
            _ => self.unexpected("an arithmetic expression"),
        }
    }
}

fn cmp_binop(op: CmpOp) -> BinOp {
    match op {
        CmpOp::Eq => BinOp::Eq,
        CmpOp::Ne => BinOp::Ne,
        CmpOp::Lt => BinOp::Lt,
        CmpOp::Le => BinOp::Le,
        CmpOp::Gt => BinOp::Gt,
        CmpOp::Ge => BinOp::Ge,
    }
}

const ORIGIN: Pos = Pos { line: 1, col: 1 };

/// Parses a command.
pub fn parse_cmd(text: &str) -> Result<Cmd> {
    let mut p = Parser::new(text, ORIGIN, true)?;
    if matches!(p.peek(), Tok::Eof) {
        return Ok(Cmd::Skip);
    }
    let c = p.cmd()?;
    p.end()?;
    Ok(c)
}

/// Parses a program expression.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text, ORIGIN, true)?;
    let e = p.expr()?;
    p.end()?;
    Ok(e)
}

/// Parses an assertion; run indices are accepted.
pub fn parse_assertion(text: &str) -> Result<Assertion> {
    let mut p = Parser::new(text, ORIGIN, true)?;
    let a = p.assertion()?;
    p.end()?;
    Ok(a)
}

/// Whether a specification relates two runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecMode {
    Unary,
    Relational,
}

/// A parsed specification file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecFile {
    pub name: Option<String>,
    pub mode: SpecMode,
    pub ghost_cost: bool,
    pub requires: Assertion,
    pub ensures: Assertion,
    pub program: Cmd,
    /// Second program of two-program mode (run 2 executes it).
    pub program2: Option<Cmd>,
    /// `expect-*` keys, used by corpus tests.
    pub expect: BTreeMap<String, String>,
}

const KEYS: &[&str] = &["name", "mode", "ghost-cost", "requires", "ensures", "program", "program2"];

struct Section {
    key: String,
    value: String,
    origin: Pos,
}

/// Splits a spec file into `key: value` sections. A section starts at a
/// line beginning with a known key and runs until the next such line.
fn sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let header = line.split_once(':').filter(|(k, _)| {
            let k = k.trim_end();
            !k.is_empty()
                && !line.starts_with(char::is_whitespace)
                && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
                && (KEYS.contains(&k) || k.starts_with("expect-"))
        });
        match header {
            Some((k, rest)) if !rest.starts_with('=') => out.push(Section {
                key: k.trim_end().to_string(),
                value: rest.to_string(),
                origin: Pos { line: n + 1, col: k.len() + 2 },
            }),
            _ => match out.last_mut() {
                Some(s) => {
                    s.value.push('\n');
                    s.value.push_str(line);
                }
                None => {
                    let t = line.trim();
                    if !(t.is_empty() || t.starts_with('#') || t.starts_with("//")) {
                        return Err(ParseError {
                            line: n + 1,
                            col: 1,
                            msg: format!("expected a header key (one of {})", KEYS.join(", ")),
                        });
                    }
                }
            },
        }
    }
    Ok(out)
}

fn section_error<T>(s: &Section, msg: String) -> Result<T> {
    Err(ParseError { line: s.origin.line, col: s.origin.col, msg })
}

/// Parses a spec file.
pub fn parse_spec(text: &str) -> Result<SpecFile> {
    let secs = sections(text)?;
    let mut seen = BTreeMap::new();
    for s in &secs {
        if seen.insert(s.key.clone(), ()).is_some() {
            return section_error(s, format!("duplicate key `{}`", s.key));
        }
    }
    let get = |k: &str| secs.iter().find(|s| s.key == k);
    let mode = match get("mode").map(|s| (s, s.value.trim())) {
        None => SpecMode::Relational,
        Some((_, "relational" | "rel")) => SpecMode::Relational,
        Some((_, "unary")) => SpecMode::Unary,
        Some((s, v)) => return section_error(s, format!("unknown mode `{v}` (expected relational or unary)")),
    };
    let relational = mode == SpecMode::Relational;
    let ghost_cost = match get("ghost-cost").map(|s| (s, s.value.trim())) {
        None | Some((_, "off")) => false,
        Some((_, "on")) => true,
        Some((s, v)) => return section_error(s, format!("ghost-cost must be on or off, found `{v}`")),
    };
    let assertion = |k: &str| -> Result<Assertion> {
        match get(k) {
            None => Ok(Assertion::True),
            Some(s) => {
                let mut p = Parser::new(&s.value, s.origin, relational)?;
                let a = p.assertion()?;
                p.end()?;
                Ok(a)
            }
        }
    };
    let requires = assertion("requires")?;
    let ensures = assertion("ensures")?;
    let program_of = |s: &Section| -> Result<Cmd> {
        let mut p = Parser::new(&s.value, s.origin, relational)?;
        if matches!(p.peek(), Tok::Eof) {
            return Ok(Cmd::Skip);
        }
        let c = p.cmd()?;
        p.end()?;
        Ok(c)
    };
    let Some(prog) = get("program") else {
        return Err(ParseError { line: 1, col: 1, msg: "missing `program:` section".into() });
    };
    let program = program_of(prog)?;
    let program2 = match get("program2") {
        Some(s) if !relational => return section_error(s, "`program2` requires a relational specification".into()),
        Some(s) => Some(program_of(s)?),
        None => None,
    };
    let mut vars = Vars::of_cmd(&program);
    if let Some(c2) = &program2 {
        vars.add_cmd(c2);
    }
    vars.add_assertion(&requires);
    vars.add_assertion(&ensures);
    if let Some(x) = vars.conflicts().into_iter().next() {
        return section_error(prog, format!("`{x}` is used both as a scalar and as an array"));
    }
    if !is_well_formed(&program) || !program2.as_ref().is_none_or(is_well_formed) {
        return section_error(prog, "program is not well formed".into());
    }
    let expect = secs
        .iter()
        .filter_map(|s| s.key.strip_prefix("expect-").map(|k| (k.to_string(), s.value.trim().to_string())))
        .collect();
    Ok(SpecFile {
        name: get("name").map(|s| s.value.trim().to_string()),
        mode,
        ghost_cost,
        requires,
        ensures,
        program,
        program2,
        expect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment() {
        assert_eq!(parse_cmd("x := 0").unwrap(), Cmd::assign("x", Expr::Int(0)));
    }

    #[test]
    fn loop_with_relational_invariant() {
        let c = parse_cmd("for i in 1:n inv (z@1 = z@2) do { z := z + i }").unwrap();
        let Cmd::ForInv(x, lo, hi, inv, _) = c else { panic!("expected a loop with invariant") };
        assert_eq!(x, Ident::new("i"));
        assert_eq!((lo, hi), (Expr::Int(1), Expr::var("n")));
        assert_eq!(inv, Assertion::cmp(CmpOp::Eq, AExp::var_at("z", Side::Left), AExp::var_at("z", Side::Right)));
    }

    #[test]
    fn parenthesized_arithmetic_and_assertions() {
        let a = parse_assertion("(x + 1) <= y && (y < 3 || $k = 2)").unwrap();
        let Assertion::And(l, r) = a else { panic!() };
        assert!(matches!(*l, Assertion::Cmp(CmpOp::Le, AExp::Bin(..), _)));
        assert!(matches!(*r, Assertion::Or(..)));
    }

    #[test]
    fn negative_literals_fold() {
        assert_eq!(parse_expr("-3").unwrap(), Expr::Int(-3));
        assert_eq!(parse_expr("-(3)").unwrap(), Expr::Un(UnOp::Neg, Box::new(Expr::Int(3))));
        assert_eq!(parse_expr("-9223372036854775808").unwrap(), Expr::Int(i64::MIN));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_cmd("x := 1;\ny := ").unwrap_err();
        assert_eq!((e.line, e.col), (2, 6));
        let e = parse_spec("mode: unary\nrequires: x@1 = 0\nprogram: skip").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.msg.contains("run indices"));
    }

    #[test]
    fn scalar_used_as_array_is_rejected() {
        let e = parse_spec("program: x := 1; x[1] := 2").unwrap_err();
        assert!(e.msg.contains("both as a scalar and as an array"), "{e}");
    }

    #[test]
    fn spec_sections() {
        let s = parse_spec(
            "name: demo\nmode: relational\nghost-cost: on\nrequires: x@1 = x@2\nensures:\n  gamma@1 = gamma@2\nprogram:\n  x := x + 1;\n  y := 2\nexpect-prove: proved\n",
        )
        .unwrap();
        assert_eq!(s.name.as_deref(), Some("demo"));
        assert!(s.ghost_cost);
        assert_eq!(s.expect["prove"], "proved");
        assert!(matches!(s.program, Cmd::Seq(..)));
    }
}
