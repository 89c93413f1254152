//! Human-readable and JSON reports of runs.

use serde_json::{json, Value};

use relsym_core::engine::{ConcState, Metrics, PruneEvent, PruneStatus, Reason, Transcript, Verdict, Witness};

use crate::pretty::pretty_expr;
use crate::run::{RunOutcome, Task};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

fn task_name(t: Task) -> &'static str {
    match t {
        Task::Prove => "prove",
        Task::Refute => "refute",
    }
}

pub fn metrics_json(m: &Metrics, elapsed_ms: f64) -> Value {
    let rules: serde_json::Map<String, Value> =
        m.steps_by_rule.iter().map(|(r, n)| (r.name().to_string(), json!(n))).collect();
    json!({
        "#BS": m.big_steps,
        "#SS": m.small_steps,
        "#SMT": m.smt_calls,
        "#S": m.finals,
        "time_ms": elapsed_ms,
        "expansions": m.expansions,
        "assignment_steps": m.assignment_steps(),
        "pruned": m.pruned(),
        "steps_by_rule": rules,
    })
}

fn state_json(s: &ConcState) -> Value {
    json!(s.to_string())
}

fn transcript_json(t: &Transcript) -> Value {
    json!({
        "initial": state_json(&t.initial),
        "logical_variables": t.lvars.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "precondition": relsym_core::concrete::assert_eval::describe(&t.pre),
        "final": match &t.outcome {
            Ok(m) => state_json(m),
            Err(e) => json!({ "error": e.to_string() }),
        },
        "postcondition": t.post.as_ref().map(relsym_core::concrete::assert_eval::describe),
        "confirms": t.confirms(),
    })
}

fn witness_json(w: &Witness) -> Value {
    json!({
        "substitution": w.sigma.to_string(),
        "replay": transcript_json(&w.transcript),
    })
}

fn reason_kind(r: &Reason) -> &'static str {
    match r {
        Reason::SolverUnknown(_) => "solver-unknown",
        Reason::Budget => "budget",
        Reason::Interrupted => "interrupted",
        Reason::EntryFailed(_) => "entry-failed",
        Reason::NotInductive { .. } => "not-inductive",
        Reason::WeakInvariant(_) => "weak-invariant",
        Reason::StrengthUnknown { .. } => "strength-unknown",
        Reason::WitnessTooLarge => "witness-too-large",
        Reason::ReplayFailed(_) => "replay-failed",
    }
}

pub fn prune_json(e: &PruneEvent) -> Value {
    json!({
        "event": "prune-check",
        "guard": pretty_expr(&e.guard),
        "outcome": format!("{:?}", e.outcome),
        "status": match e.status {
            PruneStatus::Pruned => "pruned",
            PruneStatus::Kept => "kept",
            PruneStatus::Unknown => "unknown",
        },
        "depth": e.depth,
    })
}

/// The JSON report of a prove/refute run.
pub fn outcome_json(spec: &str, o: &RunOutcome) -> Value {
    let mut v = json!({
        "schema_version": SCHEMA_VERSION,
        "spec": spec,
        "task": task_name(o.task),
        "mode": o.mode.name(),
        "verdict": o.verdict.name(),
        "exit_code": o.exit_code(),
        "metrics": metrics_json(&o.metrics, o.elapsed.as_secs_f64() * 1000.0),
    });
    let obj = v.as_object_mut().expect("report is an object");
    match &o.verdict {
        Verdict::Refuted(w) => {
            obj.insert("witness".into(), witness_json(w));
        }
        Verdict::NotProved(fs) => {
            let items: Vec<Value> = fs
                .iter()
                .map(|f| json!({ "memory": format!("{}", AnyMemDisplay(&f.mem)), "constraints": f.constraints.to_string() }))
                .collect();
            obj.insert("failed_finals".into(), json!(items));
        }
        Verdict::Inconclusive { reasons, candidate } => {
            let rs: Vec<Value> =
                reasons.iter().map(|r| json!({ "kind": reason_kind(r), "message": r.to_string() })).collect();
            obj.insert("reasons".into(), json!(rs));
            if let Some(c) = candidate {
                obj.insert(
                    "candidate".into(),
                    json!({
                        "weak_loops": c.weak_loops.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        "witness": witness_json(&c.witness),
                    }),
                );
            }
        }
        Verdict::Proved | Verdict::NoCounterexampleFound => {}
    }
    v
}

struct AnyMemDisplay<'a>(&'a relsym_core::symbolic::AnyMem);

impl std::fmt::Display for AnyMemDisplay<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            relsym_core::symbolic::AnyMem::Unary(m) => write!(f, "{m}"),
            relsym_core::symbolic::AnyMem::Rel(m) => write!(f, "{m}"),
        }
    }
}

fn transcript_text(t: &Transcript, out: &mut String) {
    out.push_str(&format!("  initial memory: {}\n", t.initial));
    if !t.lvars.is_empty() {
        let lv: Vec<String> = t.lvars.iter().map(|(k, v)| format!("${k} = {v}")).collect();
        out.push_str(&format!("  logical variables: {}\n", lv.join(", ")));
    }
    match &t.outcome {
        Ok(m) => out.push_str(&format!("  final memory:   {m}\n")),
        Err(e) => out.push_str(&format!("  run failed:     {e}\n")),
    }
    let post = t.post.as_ref().map(relsym_core::concrete::assert_eval::describe).unwrap_or_else(|| "not evaluated".into());
    out.push_str(&format!(
        "  precondition {}, postcondition {}\n",
        relsym_core::concrete::assert_eval::describe(&t.pre),
        post
    ));
}

/// The metric line shared by all reports.
pub fn metrics_line(m: &Metrics, elapsed: std::time::Duration) -> String {
    format!(
        "#BS {}  #SS {}  #SMT {}  #S {}  time {:.3}s",
        m.big_steps,
        m.small_steps,
        m.smt_calls,
        m.finals,
        elapsed.as_secs_f64()
    )
}

/// The plain-text report of a prove/refute run.
pub fn outcome_text(spec: &str, o: &RunOutcome) -> String {
    let mut out = format!("{spec} [{} mode]: {}\n", o.mode.name(), o.verdict.name());
    match &o.verdict {
        Verdict::Proved | Verdict::NoCounterexampleFound => {}
        Verdict::NotProved(fs) => {
            out.push_str(&format!("{} final configuration(s) may violate the postcondition:\n", fs.len()));
            for f in fs.iter().take(5) {
                out.push_str(&format!("  memory {} under {}\n", AnyMemDisplay(&f.mem), f.constraints));
            }
        }
        Verdict::Refuted(w) => {
            out.push_str("counterexample (replayed concretely):\n");
            transcript_text(&w.transcript, &mut out);
        }
        Verdict::Inconclusive { reasons, candidate } => {
            for r in reasons {
                out.push_str(&format!("  reason: {r}\n"));
            }
            if let Some(c) = candidate {
                let weak: Vec<String> = c.weak_loops.iter().map(|x| format!("`{x}`")).collect();
                out.push_str(&format!(
                    "candidate counterexample through loop(s) over {} whose invariant is weak; it may be spurious:\n",
                    weak.join(", ")
                ));
                transcript_text(&c.witness.transcript, &mut out);
            }
        }
    }
    out.push_str(&metrics_line(&o.metrics, o.elapsed));
    out.push('\n');
    out
}
