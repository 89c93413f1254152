//! Every corpus spec reaches the verdict its `expect-*` key records.

mod common;

use relsym::run::{run_spec, RunOptions, Task};

fn check(name: &str) {
    let spec = common::corpus_spec(name);
    let mut checked = 0;
    for (key, task) in [("prove", Task::Prove), ("refute", Task::Refute)] {
        let Some(expected) = spec.expect.get(key) else { continue };
        let outcome = run_spec(&spec, task, &RunOptions::default()).expect("run completes");
        assert_eq!(outcome.verdict.name(), expected, "{name}: {key}");
        checked += 1;
    }
    assert!(checked > 0, "{name} has no expectation");
}

#[test]
fn cdf_monotone_len5() {
    check("cdf_monotone_len5");
}

#[test]
fn cdf_monotone_refute() {
    check("cdf_monotone_refute");
}

#[test]
fn cost_equiv_len5() {
    check("cost_equiv_len5");
}

#[test]
fn increment() {
    check("increment");
}

#[test]
fn ni_array() {
    check("ni_array");
}

#[test]
fn ni_strong_inv() {
    check("ni_strong_inv");
}

#[test]
fn ni_weak_inv() {
    check("ni_weak_inv");
}

#[test]
fn skip_true() {
    check("skip_true");
}

#[test]
fn sort_lipschitz() {
    check("sort_lipschitz");
}

#[test]
fn strength_strong() {
    check("strength_strong");
}

#[test]
fn strength_weak() {
    check("strength_weak");
}

#[test]
fn every_corpus_file_has_a_test() {
    let mut names: Vec<String> = relsym::bench::corpus_files(&common::corpus_dir())
        .unwrap()
        .iter()
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "cdf_monotone_len5",
            "cdf_monotone_refute",
            "cost_equiv_len5",
            "increment",
            "ni_array",
            "ni_strong_inv",
            "ni_weak_inv",
            "skip_true",
            "sort_lipschitz",
            "strength_strong",
            "strength_weak",
        ]
    );
}
