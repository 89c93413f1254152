//! Concrete execution of spec programs (the `run` command).

use std::collections::BTreeMap;

use serde_json::json;

use relsym_core::concrete::assert_eval::{eval_rel_assertion, eval_unary_assertion};
use relsym_core::concrete::relational::run_r_observed;
use relsym_core::concrete::unary::run_u_observed;
use relsym_core::concrete::Ghost;
use relsym_core::lang::{ConcArray, ConcMem, Ident, Rel, RelConcMem, Side, Vars};
use relsym_core::EvalError;

use crate::parse::{SpecFile, SpecMode};
use crate::pretty::pretty;
use crate::run::spec_program;

/// A value given on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Array(Vec<i64>),
}

/// One `NAME[@1|@2]=VALUE` setting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Setting {
    pub name: String,
    pub side: Option<Side>,
    pub value: Value,
}

/// Parses `x=3`, `a=[1,2,3]`, `x@2=-1`.
pub fn parse_setting(text: &str) -> Result<Setting, String> {
    let (lhs, rhs) = text.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, found `{text}`"))?;
    let (name, side) = match lhs.trim().split_once('@') {
        Some((n, "1")) => (n, Some(Side::Left)),
        Some((n, "2")) => (n, Some(Side::Right)),
        Some((_, s)) => return Err(format!("run index must be 1 or 2, found `{s}`")),
        None => (lhs.trim(), None),
    };
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("invalid identifier `{name}`"));
    }
    let rhs = rhs.trim();
    let int = |s: &str| s.trim().parse::<i64>().map_err(|_| format!("invalid integer `{}`", s.trim()));
    let value = match rhs.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        Some(inner) if inner.trim().is_empty() => Value::Array(Vec::new()),
        Some(inner) => Value::Array(inner.split(',').map(int).collect::<Result<_, _>>()?),
        None => Value::Int(int(rhs)?),
    };
    Ok(Setting { name: name.to_string(), side, value })
}

/// Result of a concrete run.
#[derive(Clone, Debug)]
pub struct ExecReport {
    pub initial: String,
    pub outcome: Result<String, EvalError>,
    pub pre: Result<bool, EvalError>,
    pub post: Option<Result<bool, EvalError>>,
    /// One JSON object per step, when tracing.
    pub trace: Vec<serde_json::Value>,
}

fn ghost_of(spec: &SpecFile, ghost_cost: bool) -> Ghost {
    if ghost_cost || spec.ghost_cost {
        Ghost::On
    } else {
        Ghost::Off
    }
}

/// Runs the program of `spec` from the memory described by `settings`;
/// unset scalars are 0 and unset arrays empty. Ghost counters start at 0.
pub fn execute(
    spec: &SpecFile,
    settings: &[Setting],
    ghost_cost: bool,
    fuel: u64,
    trace: bool,
) -> Result<ExecReport, String> {
    let cmd = spec_program(spec);
    let ghost = ghost_of(spec, ghost_cost);
    let mut vars = Vars::of_cmd(&cmd);
    vars.add_assertion(&spec.requires);
    vars.add_assertion(&spec.ensures);
    for s in settings {
        let known = match s.value {
            Value::Int(_) => vars.scalars.contains(&Ident::new(&s.name)),
            Value::Array(_) => vars.arrays.contains(&Ident::new(&s.name)),
        };
        if !known {
            return Err(format!("`{}` is not a {} of the spec", s.name, match s.value {
                Value::Int(_) => "scalar",
                Value::Array(_) => "array",
            }));
        }
    }
    let lvars = BTreeMap::new();
    let mut steps = Vec::new();
    let mut record = |n: usize, rule: &str, c: &relsym_core::lang::Cmd, mem: String| {
        if trace {
            steps.push(json!({ "step": n, "rule": rule, "command": pretty(c), "memory": mem }));
        }
    };
    match spec.mode {
        SpecMode::Unary => {
            let mut m = ConcMem::new();
            for x in &vars.scalars {
                m.scalars.insert(x.clone(), 0);
            }
            for a in &vars.arrays {
                m.arrays.insert(a.clone(), ConcArray(Vec::new()));
            }
            for s in settings {
                if s.side.is_some() {
                    return Err(format!("run index on `{}` in a unary spec", s.name));
                }
                match &s.value {
                    Value::Int(v) => m.scalars.insert(Ident::new(&s.name), *v).map(|_| ()),
                    Value::Array(v) => m.arrays.insert(Ident::new(&s.name), ConcArray(v.clone())).map(|_| ()),
                };
            }
            for g in ghost.counters() {
                m.scalars.insert(Ident::new(g), 0);
            }
            let pre = eval_unary_assertion(&m, &spec.requires, &lvars);
            let mut n = 0;
            let run = run_u_observed(&m, &cmd, fuel, ghost, |c, s| {
                n += 1;
                record(n, s.rule.name(), c, s.mem.to_string());
            });
            let post = run.as_ref().ok().map(|m1| eval_unary_assertion(m1, &spec.ensures, &lvars));
            Ok(ExecReport { initial: m.to_string(), outcome: run.map(|m| m.to_string()), pre, post, trace: steps })
        }
        SpecMode::Relational => {
            let mut left: BTreeMap<Ident, Value> = BTreeMap::new();
            let mut right: BTreeMap<Ident, Value> = BTreeMap::new();
            for x in &vars.scalars {
                left.insert(x.clone(), Value::Int(0));
                right.insert(x.clone(), Value::Int(0));
            }
            for a in &vars.arrays {
                left.insert(a.clone(), Value::Array(Vec::new()));
                right.insert(a.clone(), Value::Array(Vec::new()));
            }
            for s in settings {
                let x = Ident::new(&s.name);
                if s.side != Some(Side::Right) {
                    left.insert(x.clone(), s.value.clone());
                }
                if s.side != Some(Side::Left) {
                    right.insert(x, s.value.clone());
                }
            }
            let mut m = RelConcMem::new();
            for (x, v1) in &left {
                match (v1, &right[x]) {
                    (Value::Int(a), Value::Int(b)) => {
                        m.scalars.insert(x.clone(), Rel::new(*a, *b));
                    }
                    (Value::Array(a), Value::Array(b)) => {
                        m.arrays.insert(x.clone(), Rel::new(ConcArray(a.clone()), ConcArray(b.clone())));
                    }
                    _ => return Err(format!("`{x}` is set to a scalar in one run and an array in the other")),
                }
            }
            for g in ghost.counters() {
                m.scalars.insert(Ident::new(g), Rel::One(0));
            }
            let pre = eval_rel_assertion(&m, &spec.requires, &lvars);
            let mut n = 0;
            let run = run_r_observed(&m, &cmd, fuel, ghost, |c, s| {
                n += 1;
                record(n, s.rule.name(), c, s.mem.to_string());
            });
            let post = run.as_ref().ok().map(|m1| eval_rel_assertion(m1, &spec.ensures, &lvars));
            Ok(ExecReport { initial: m.to_string(), outcome: run.map(|m| m.to_string()), pre, post, trace: steps })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings() {
        assert_eq!(
            parse_setting("a@2=[1, -2]").unwrap(),
            Setting { name: "a".into(), side: Some(Side::Right), value: Value::Array(vec![1, -2]) }
        );
        assert_eq!(parse_setting("x=-4").unwrap().value, Value::Int(-4));
        assert!(parse_setting("x@3=1").is_err());
    }
}
