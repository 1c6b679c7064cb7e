//! Preprocess, encode, solve and certify one formula.

use crate::error::CliError;
use crate::external::solve_external;
use crate::options::RunOptions;
use crate::report::{ReportVerdict, RunReport};
use kmsat::encoder::{encode, EncodeError, EncodeResult, Label};
use kmsat::formula::{FormulaStore, NodeId};
use kmsat::satsolver::{CnfFormula, SolveResult, Solver, SolverConfig};
use kmsat::semantics::{extract_model, KripkeModel};
use std::str::FromStr;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    Embedded,
    /// Command line of an external solver, see [`crate::external`].
    External(String),
}

impl FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            _ if s == "embedded" => Ok(SolverChoice::Embedded),
            Some(("external", cmd)) if !cmd.trim().is_empty() => Ok(SolverChoice::External(cmd.to_string())),
            _ => Err(format!("expected 'embedded' or 'external:<command>', found '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub options: RunOptions,
    pub solver: SolverChoice,
    /// Wall-clock limit on encoding plus solving.
    pub timeout: Option<Duration>,
    /// Limit on the size of the DIMACS rendering of the encoding.
    pub max_bytes: Option<u64>,
}

/// Everything a run produced; `encoding` is absent when the encoder gave up.
pub struct Run {
    pub report: RunReport,
    pub encoding: Option<EncodeResult>,
    pub model: Option<KripkeModel>,
}

/// Length in bytes of `write_dimacs(cnf)`, without building it.
pub fn dimacs_len(cnf: &CnfFormula) -> u64 {
    let digits = |mut n: u64| {
        let mut d = 1;
        while n >= 10 {
            n /= 10;
            d += 1;
        }
        d
    };
    let header = format!("p cnf {} {}\n", cnf.num_vars, cnf.clauses.len()).len() as u64;
    let body: u64 = cnf
        .clauses
        .iter()
        .map(|c| c.iter().map(|&l| digits(l.unsigned_abs() as u64) + u64::from(l < 0) + 1).sum::<u64>() + 2)
        .sum();
    header + body
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Preprocesses and encodes `f`, filling the size fields of `report`.
pub fn encode_into(
    store: &mut FormulaStore,
    f: NodeId,
    config: &RunConfig,
    deadline: Option<Instant>,
    report: &mut RunReport,
) -> Result<EncodeResult, ReportVerdict> {
    let start = Instant::now();
    let g = store.preprocess(f, &config.options.preprocess());
    let enc = encode(store, g, &kmsat::encoder::EncodeOptions { deadline, ..config.options.encode() });
    report.encode_ms = ms(start.elapsed());
    let enc = match enc {
        Ok(enc) => enc,
        Err(e @ EncodeError::Budget { .. }) => {
            report.error = Some(e.to_string());
            return Err(ReportVerdict::Budget);
        }
        Err(EncodeError::Timeout) => return Err(ReportVerdict::Timeout),
    };
    report.vars = enc.cnf.num_vars;
    report.clauses = enc.cnf.num_clauses();
    report.labels = enc.stats.labels;
    if let Some(limit) = config.max_bytes {
        let size = dimacs_len(&enc.cnf);
        if size > limit {
            report.error = Some(format!("DIMACS output of {size} bytes exceeds the limit of {limit}"));
            return Err(ReportVerdict::Budget);
        }
    }
    Ok(enc)
}

pub fn run_formula(id: &str, store: &mut FormulaStore, f: NodeId, config: &RunConfig) -> Run {
    let start = Instant::now();
    let deadline = config.timeout.map(|t| start + t);
    let mut report = RunReport::new(id, config.options);
    let enc = match encode_into(store, f, config, deadline, &mut report) {
        Ok(enc) => enc,
        Err(verdict) => {
            report.verdict = Some(verdict);
            return Run { report, encoding: None, model: None };
        }
    };
    if enc.trivial.is_some() {
        report.verdict = Some(ReportVerdict::Unsat);
        return Run { report, encoding: Some(enc), model: None };
    }
    let solve_start = Instant::now();
    let result = match &config.solver {
        SolverChoice::Embedded => Ok(Solver::new(&enc.cnf, SolverConfig::default()).solve(deadline)),
        SolverChoice::External(cmd) => solve_external(cmd, &enc.cnf, deadline),
    };
    report.solve_ms = ms(solve_start.elapsed());
    let mut model = None;
    match result {
        Ok(SolveResult::Unsat) => report.verdict = Some(ReportVerdict::Unsat),
        Ok(SolveResult::Timeout) => report.verdict = Some(ReportVerdict::Timeout),
        Ok(SolveResult::Sat(mu)) => {
            report.verdict = Some(ReportVerdict::Sat);
            match extract_model(store, &enc, &mu) {
                Ok(m) => {
                    report.model_check = Some(m.eval(store, &Label::root(), f).unwrap_or(false));
                    model = Some(m);
                }
                Err(e) => {
                    report.model_check = Some(false);
                    report.error = Some(e.to_string());
                }
            }
        }
        Err(e) => {
            report.verdict = Some(ReportVerdict::Error);
            report.error = Some(e.to_string());
        }
    }
    Run { report, encoding: Some(enc), model }
}

/// Parses `text` and runs it; parse failures become an error report.
pub fn run_text(id: &str, text: &str, config: &RunConfig) -> Run {
    let mut store = FormulaStore::new();
    match kmsat::formula::parse(&mut store, text) {
        Ok(f) => run_formula(id, &mut store, f, config),
        Err(e) => {
            let mut report = RunReport::new(id, config.options);
            report.verdict = Some(ReportVerdict::Error);
            report.error = Some(CliError::Parse { path: id.into(), source: e }.to_string());
            Run { report, encoding: None, model: None }
        }
    }
}
