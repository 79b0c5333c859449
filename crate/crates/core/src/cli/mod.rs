//! Batch front end: JSON configurations in, grid fields and JSON/CSV reports out.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 failed assumption check, 4 solver nonconvergence, 5 non-monotone operator.

mod commands;
mod config;

pub use commands::{
    cmd_check, cmd_solve, cmd_study, exit_code, run, BetaCheck, CheckReport, Command,
    OperatorCheck, RunArgs, StudyReport, StudyRow, EXIT_ASSUMPTION, EXIT_CONFIG, EXIT_FAILURE,
    EXIT_MONOTONICITY, EXIT_NONCONVERGENCE, EXIT_OK, SOLVE_FIELDS,
};
pub use config::{
    CheckConfig, FieldPreset, GridConfig, Operators, ProblemConfig, RunConfig, StudyConfig,
};
