//! Library side of the `kmsat` binary: option handling, the single-instance
//! runner, the external solver protocol and the benchmark orchestrator.

pub mod bench;
pub mod error;
pub mod external;
pub mod options;
pub mod report;
pub mod run;

pub use error::CliError;
pub use options::{Format, Lift, RunOptions};
pub use report::{ReportVerdict, RunReport};
pub use run::{run_formula, Run, RunConfig, SolverChoice};

/// Exit codes of the binary.
pub mod exit {
    pub const SAT: i32 = 0;
    pub const ERROR: i32 = 2;
    pub const TIMEOUT: i32 = 10;
    pub const UNSAT: i32 = 20;
}
