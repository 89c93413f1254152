//! Front end, solver session and reporting for the `relsym` engine.
//!
//! * [`parse`] and [`pretty`] — the concrete syntax of programs,
//!   assertions and spec files;
//! * [`smt`] — an SMT-LIB2 session with an external solver;
//! * [`run`] — turning spec files into triples and running the engine;
//! * [`exec`] — concrete execution of spec programs;
//! * [`report`] and [`bench`] — text/JSON reports and benchmark tables.

pub mod bench;
pub mod exec;
pub mod parse;
pub mod pretty;
pub mod report;
pub mod run;
pub mod smt;
