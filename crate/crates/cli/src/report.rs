use crate::options::RunOptions;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportVerdict {
    Sat,
    Unsat,
    Timeout,
    Budget,
    /// The instance could not be run (parse failure, solver crash, ...).
    Error,
}

impl ReportVerdict {
    pub fn exit_code(self) -> i32 {
        match self {
            ReportVerdict::Sat => crate::exit::SAT,
            ReportVerdict::Unsat => crate::exit::UNSAT,
            ReportVerdict::Timeout => crate::exit::TIMEOUT,
            ReportVerdict::Budget | ReportVerdict::Error => crate::exit::ERROR,
        }
    }

    pub fn solved(self) -> bool {
        matches!(self, ReportVerdict::Sat | ReportVerdict::Unsat)
    }
}

/// One line of a report; times are wall-clock milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub id: String,
    pub options: RunOptions,
    /// `None` for `encode`, which does not decide the instance unless the
    /// encoder itself refutes it.
    pub verdict: Option<ReportVerdict>,
    pub vars: u32,
    pub clauses: usize,
    pub labels: usize,
    pub encode_ms: f64,
    pub solve_ms: f64,
    /// Present iff the verdict is sat.
    pub model_check: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    pub fn new(id: impl Into<String>, options: RunOptions) -> Self {
        RunReport {
            id: id.into(),
            options,
            verdict: None,
            vars: 0,
            clauses: 0,
            labels: 0,
            encode_ms: 0.0,
            solve_ms: 0.0,
            model_check: None,
            error: None,
        }
    }

    /// The same report with the timing fields zeroed, for reproducibility
    /// comparisons.
    pub fn without_timings(&self) -> Self {
        RunReport { encode_ms: 0.0, solve_ms: 0.0, ..self.clone() }
    }

    pub fn total_ms(&self) -> f64 {
        self.encode_ms + self.solve_ms
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}
