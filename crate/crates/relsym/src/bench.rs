//! The benchmark table: every corpus spec under the relational,
//! self-composition and product modes.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use relsym_core::engine::{Metrics, Reason, Verdict};

use crate::run::{load_spec, run_spec, Mode, RunError, RunOptions, Task};

/// Output format of the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
}

/// The result of one (spec, mode) cell.
#[derive(Clone, Debug)]
pub struct Row {
    pub example: String,
    pub mode: Mode,
    pub result: Result<(Verdict, Metrics, Duration), String>,
}

impl Row {
    /// The run hit its budget or wall-clock limit.
    pub fn timed_out(&self) -> bool {
        matches!(&self.result, Ok((Verdict::Inconclusive { reasons, .. }, _, _))
            if reasons.iter().any(|r| matches!(r, Reason::Budget | Reason::Interrupted)))
    }

    /// The solver answered unknown somewhere.
    pub fn unknown(&self) -> bool {
        matches!(&self.result, Ok((Verdict::Inconclusive { reasons, .. }, _, _))
            if reasons.iter().any(|r| matches!(r, Reason::SolverUnknown(_) | Reason::StrengthUnknown { .. })))
    }

    /// Cells after the Example and R/U/P columns.
    pub fn cells(&self) -> Vec<String> {
        match &self.result {
            Err(_) => vec!["-".into(), "-".into(), "-".into(), "-".into(), "-".into(), "error".into()],
            Ok((v, m, t)) => {
                let time = if self.timed_out() {
                    "↑".to_string()
                } else if self.unknown() {
                    "✗".to_string()
                } else {
                    format!("{:.3}", t.as_secs_f64())
                };
                vec![
                    m.big_steps.to_string(),
                    m.small_steps.to_string(),
                    m.smt_calls.to_string(),
                    m.finals.to_string(),
                    time,
                    v.name().to_string(),
                ]
            }
        }
    }
}

pub const HEADER: [&str; 8] = ["Example", "R/U/P", "#BS", "#SS", "#SMT", "#S", "time", "verdict"];

/// Spec files of a corpus directory, sorted by name.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let shown = dir.display().to_string();
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| RunError::Io(shown.clone(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "spec"))
        .collect();
    out.sort();
    Ok(out)
}

fn example_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Runs the benchmark over `files`. Relational specs run in all three
/// modes, unary ones in unary mode. A spec whose `expect-refute` key is
/// set is refuted, every other one is proved. `jobs` cells run in
/// parallel, each with its own solver session.
pub fn bench(files: &[PathBuf], opts: &RunOptions, jobs: usize) -> Result<Vec<Row>, RunError> {
    let mut work = Vec::new();
    for f in files {
        let spec = load_spec(f)?;
        let task = if spec.expect.contains_key("refute") && !spec.expect.contains_key("prove") {
            Task::Refute
        } else {
            Task::Prove
        };
        let modes: &[Mode] = match Mode::of_spec(&spec) {
            Mode::Unary => &[Mode::Unary],
            _ => &[Mode::Rel, Mode::SelfComp, Mode::Product],
        };
        for &m in modes {
            work.push((example_name(f), spec.clone(), task, m));
        }
    }
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<(usize, Row)>> = Mutex::new(Vec::new());
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some((name, spec, task, mode)) = work.get(i) else { break };
        let o = RunOptions { mode: Some(*mode), ..opts.clone() };
        let result = run_spec(spec, *task, &o).map(|r| (r.verdict, r.metrics, r.elapsed)).map_err(|e| e.to_string());
        let row = Row { example: name.clone(), mode: *mode, result };
        rows.lock().expect("bench rows lock").push((i, row));
    };
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(worker);
        }
    });
    let mut rows = rows.into_inner().expect("bench rows lock");
    rows.sort_by_key(|(i, _)| *i);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders the table.
pub fn render(rows: &[Row], format: Format) -> String {
    let lines: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut l = vec![r.example.clone(), r.mode.letter().to_string()];
            l.extend(r.cells());
            l
        })
        .collect();
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&HEADER.join(","));
            out.push('\n');
            for l in &lines {
                let fields: Vec<String> = l.iter().map(|f| csv_field(f)).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
        }
        Format::Markdown => {
            out.push_str(&format!("| {} |\n", HEADER.join(" | ")));
            out.push_str(&format!("|{}\n", "---|".repeat(HEADER.len())));
            for l in &lines {
                out.push_str(&format!("| {} |\n", l.join(" | ")));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(reasons: Vec<Reason>) -> Row {
        Row {
            example: "demo".into(),
            mode: Mode::Rel,
            result: Ok((Verdict::Inconclusive { reasons, candidate: None }, Metrics::default(), Duration::ZERO)),
        }
    }

    #[test]
    fn timeouts_and_unknowns_use_the_table_notation() {
        assert_eq!(row(vec![Reason::Budget]).cells()[4], "↑");
        assert_eq!(row(vec![Reason::SolverUnknown("timeout".into())]).cells()[4], "✗");
    }

    #[test]
    fn markdown_has_every_metric_column() {
        let t = render(&[row(vec![])], Format::Markdown);
        for h in ["Example", "R/U/P", "#BS", "#SS", "#SMT", "#S", "time"] {
            assert!(t.lines().next().unwrap().contains(h));
        }
        assert!(t.contains("| demo | R |"));
    }
}
