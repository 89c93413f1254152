//! Pretty-printing of programs and assertions in the concrete syntax.
//!
//! Output is fully parenthesized so that parsing it back yields the same
//! tree. Pair commands and symbolic values, which have no source syntax,
//! print as `<c1 | c2>` and `X17` for diagnostics only. Memories and
//! constraints print through their `Display` implementations.

use relsym_core::assertion::{AExp, ArrExp, Assertion};
use relsym_core::lang::{Cmd, Expr, Side, UnOp};

fn side(s: Option<Side>) -> &'static str {
    match s {
        None => "",
        Some(Side::Left) => "@1",
        Some(Side::Right) => "@2",
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    match e {
        Expr::Int(v) => v.to_string(),
        Expr::Var(x) => x.to_string(),
        Expr::Read(a, i) => format!("{a}[{}]", pretty_expr(i)),
        Expr::Len(a) => format!("len({a})"),
        Expr::Bin(op, a, b) => format!("({} {} {})", pretty_expr(a), op.symbol(), pretty_expr(b)),
        Expr::Un(UnOp::Neg, a) => format!("-({})", pretty_expr(a)),
        Expr::Un(UnOp::Not, a) => format!("!({})", pretty_expr(a)),
        Expr::Sym(s) => s.to_string(),
        Expr::Pair(a, b) => format!("<{} | {}>", pretty_expr(a), pretty_expr(b)),
    }
}

fn pretty_arr(a: &ArrExp) -> String {
    match a {
        ArrExp::Name(x, s) => format!("{x}{}", side(*s)),
        ArrExp::Update(a, i, v) => format!("{}{{{} -> {}}}", pretty_arr(a), pretty_aexp(i), pretty_aexp(v)),
    }
}

pub fn pretty_aexp(e: &AExp) -> String {
    match e {
        AExp::Int(v) => v.to_string(),
        AExp::Var(x, s) => format!("{x}{}", side(*s)),
        AExp::LVar(x) => format!("${x}"),
        AExp::Read(a, i) => format!("{}[{}]", pretty_arr(a), pretty_aexp(i)),
        AExp::Len(a, s) => format!("len({a}{})", side(*s)),
        AExp::Bin(op, a, b) => format!("({} {} {})", pretty_aexp(a), op.symbol(), pretty_aexp(b)),
        AExp::Un(_, a) => format!("-({})", pretty_aexp(a)),
        AExp::Abs(a) => format!("abs({})", pretty_aexp(a)),
        AExp::FirstDiff(a, b, n) => format!("firstdiff({}, {}, {})", pretty_arr(a), pretty_arr(b), pretty_aexp(n)),
    }
}

pub fn pretty_assertion(a: &Assertion) -> String {
    match a {
        Assertion::True => "true".into(),
        Assertion::False => "false".into(),
        Assertion::Cmp(op, x, y) => format!("({} {} {})", pretty_aexp(x), op.symbol(), pretty_aexp(y)),
        Assertion::Not(x) => format!("!({})", pretty_assertion(x)),
        Assertion::And(x, y) => format!("({} && {})", pretty_assertion(x), pretty_assertion(y)),
        Assertion::Or(x, y) => format!("({} || {})", pretty_assertion(x), pretty_assertion(y)),
        Assertion::Implies(x, y) => format!("({} ==> {})", pretty_assertion(x), pretty_assertion(y)),
        Assertion::Iff(x, y) => format!("({} <==> {})", pretty_assertion(x), pretty_assertion(y)),
        Assertion::Forall(v, x) => format!("(forall ${v}. {})", pretty_assertion(x)),
        Assertion::Exists(v, x) => format!("(exists ${v}. {})", pretty_assertion(x)),
    }
}

/// Prints a command on one line.
pub fn pretty(c: &Cmd) -> String {
    let mut out = String::new();
    write_cmd(c, None, &mut out);
    out
}

/// Prints a command over several lines, indented by `indent` levels.
pub fn pretty_indented(c: &Cmd, indent: usize) -> String {
    let mut out = String::new();
    write_cmd(c, Some(indent), &mut out);
    out
}

fn block(c: &Cmd, indent: Option<usize>, out: &mut String) {
    match indent {
        None => {
            out.push_str("{ ");
            write_cmd(c, None, out);
            out.push_str(" }");
        }
        Some(n) => {
            out.push_str("{\n");
            out.push_str(&"  ".repeat(n + 1));
            write_cmd(c, Some(n + 1), out);
            out.push('\n');
            out.push_str(&"  ".repeat(n));
            out.push('}');
        }
    }
}

fn write_cmd(c: &Cmd, indent: Option<usize>, out: &mut String) {
    match c {
        Cmd::Skip => out.push_str("skip"),
        Cmd::Seq(a, b) => {
            if matches!(**a, Cmd::Seq(..)) {
                block(a, indent, out);
            } else {
                write_cmd(a, indent, out);
            }
            out.push(';');
            match indent {
                None => out.push(' '),
                Some(n) => {
                    out.push('\n');
                    out.push_str(&"  ".repeat(n));
                }
            }
            write_cmd(b, indent, out);
        }
        Cmd::Assign(x, e) => {
            out.push_str(&format!("{x} := {}", pretty_expr(e)));
        }
        Cmd::ArrAssign(a, i, v) => {
            out.push_str(&format!("{a}[{}] := {}", pretty_expr(i), pretty_expr(v)));
        }
        Cmd::If(g, t, f) => {
            out.push_str(&format!("if {} then ", pretty_expr(g)));
            block(t, indent, out);
            out.push_str(" else ");
            block(f, indent, out);
        }
        Cmd::For(x, lo, hi, body) => {
            out.push_str(&format!("for {x} in {}:{} do ", pretty_expr(lo), pretty_expr(hi)));
            block(body, indent, out);
        }
        Cmd::ForInv(x, lo, hi, inv, body) => {
            out.push_str(&format!(
                "for {x} in {}:{} inv {} do ",
                pretty_expr(lo),
                pretty_expr(hi),
                pretty_assertion(inv)
            ));
            block(body, indent, out);
        }
        Cmd::Pair(a, b) => {
            out.push('<');
            write_cmd(a, None, out);
            out.push_str(" | ");
            write_cmd(b, None, out);
            out.push('>');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_assertion, parse_cmd};

    #[test]
    fn skip_prints_as_skip() {
        assert_eq!(pretty(&Cmd::Skip), "skip");
    }

    #[test]
    fn left_nested_sequences_keep_their_shape() {
        let c = Cmd::Seq(
            Box::new(Cmd::Seq(Box::new(Cmd::assign("x", Expr::Int(1))), Box::new(Cmd::Skip))),
            Box::new(Cmd::assign("y", Expr::Int(-2))),
        );
        assert_eq!(parse_cmd(&pretty(&c)).unwrap(), c);
        assert_eq!(parse_cmd(&pretty_indented(&c, 0)).unwrap(), c);
    }

    #[test]
    fn assertions_round_trip() {
        let text = "forall $t. (abs(a@1[$t] - a@2{1 -> 0}[$t]) <= k) && !(len(a@1) = 3) ==> firstdiff(a@1, a@2, 4) = 0";
        let a = parse_assertion(text).unwrap();
        assert_eq!(parse_assertion(&pretty_assertion(&a)).unwrap(), a);
    }
}
