//! Command-line surface and file formats for the `ifbf` solver: JSON problem
//! configs, CSV iteration traces, and the `plan | run | check | compare`
//! subcommands with their stable exit codes.

pub mod commands;
pub mod config;
pub mod logging;
pub mod trace_io;

/// Stable exit codes of the CLI.
pub mod exit_code {
    /// Success; for `run`, the solve converged.
    pub const OK: i32 = 0;
    /// The planner found the configuration infeasible.
    pub const INFEASIBLE: i32 = 2;
    /// The solve hit its iteration budget before converging.
    pub const MAX_ITERATIONS: i32 = 3;
    /// Non-finite values were encountered during the solve.
    pub const NUMERICAL_FAILURE: i32 = 4;
    /// A trace check found violations.
    pub const CHECK_FAILED: i32 = 5;
    /// Unreadable input: missing file, malformed JSON or CSV, bad usage.
    pub const PARSE: i32 = 64;
    /// The configuration names an unsupported combination (custom
    /// generators, variant/problem mismatches, rejected problem data).
    pub const UNSUPPORTED: i32 = 65;
}
