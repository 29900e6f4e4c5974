//! Verification harness for `fraclap-core`: suite configuration, the suite
//! runner, reports and the `fraclap` command line.

pub mod cli;
pub mod config;
pub mod report;
pub mod suites;

pub use config::{Suite, SuiteConfig};
pub use report::{Check, Record, Report, Summary};
pub use suites::run_suite;
