//! Parser round trips and solver-checked branch partitions.

mod common;

#[test]
fn parse_round_trips_expressions() {
    common::parse_round_trips_expressions(256).unwrap();
}

#[test]
fn parse_round_trips_assertions() {
    common::parse_round_trips_assertions(256).unwrap();
}

#[test]
fn parse_round_trips_commands() {
    common::parse_round_trips_commands(256).unwrap();
}

#[test]
fn unary_guards_exclusive_smt() {
    common::unary_guards_exclusive_smt(64).unwrap();
}

#[test]
fn relational_branches_partition_smt() {
    common::relational_branches_partition_smt(64).unwrap();
}
