//! Command-line front end: problem files, command dispatch and reports.

pub mod commands;
pub mod problem;
pub mod report;

pub use commands::{run, Command, Options};
pub use problem::{load, Loaded, ProblemFile};
pub use report::{Report, Status};
