//! Scenario-driven front end for `qdim-core`: scenario parsing, request
//! execution, output formatting and the seeded invariant suite.

pub mod output;
pub mod runner;
pub mod scenario;
pub mod verify;

pub use runner::{run, ResultRecord, RunOptions, RunReport};
pub use scenario::{parse_scenario, Scenario, ScenarioError};
pub use verify::{run_suite, VerifyReport};
