//! Configured verification runs and their reports.

pub mod config;
pub mod harness;
pub mod report;
pub mod sampling;
pub mod suites;

pub use config::{HeckeRow, HeckeSource, RunConfig, SUITES};
pub use harness::{compare_scalars, conjecture_check, theorem71_instance, ConjectureCheck, LChoice, Proportionality};
pub use report::{CheckRecord, Status, Summary, VerificationReport};
pub use suites::run_suites;
