//! Preprocess, encode, solve and certify in one call.

use crate::encoder::Label;
use crate::encoder::{encode, EncodeError, EncodeOptions, EncodeStats};
use crate::formula::{FormulaStore, NodeId, PreprocessOptions};
use crate::satsolver::{SolveResult, Solver, SolverConfig};
use crate::semantics::{extract_model, KripkeModel};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PipelineOptions {
    pub preprocess: PreprocessOptions,
    pub encode: EncodeOptions,
    pub solver: SolverConfig,
    /// Wall-clock limit for encoding plus solving.
    pub timeout: Option<Duration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Sat,
    Unsat,
    Timeout,
    Budget,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Sat => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Timeout => "timeout",
            Verdict::Budget => "budget",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub verdict: Verdict,
    pub stats: EncodeStats,
    pub encode_ms: f64,
    pub solve_ms: f64,
    /// Present when the verdict is sat.
    pub model: Option<KripkeModel>,
    /// Whether the extracted model satisfies the input formula at the root.
    pub model_check: Option<bool>,
}

pub fn decide(store: &mut FormulaStore, f: NodeId, opts: &PipelineOptions) -> Outcome {
    let start = Instant::now();
    let deadline = opts.timeout.map(|t| start + t);
    let g = store.preprocess(f, &opts.preprocess);
    let enc_opts = EncodeOptions { deadline, ..opts.encode };
    let enc = encode(store, g, &enc_opts);
    let encode_ms = ms(start.elapsed());
    let mut out = Outcome {
        verdict: Verdict::Unsat,
        stats: EncodeStats::default(),
        encode_ms,
        solve_ms: 0.0,
        model: None,
        model_check: None,
    };
    let enc = match enc {
        Ok(e) => e,
        Err(EncodeError::Budget { .. }) => {
            out.verdict = Verdict::Budget;
            return out;
        }
        Err(EncodeError::Timeout) => {
            out.verdict = Verdict::Timeout;
            return out;
        }
    };
    out.stats = enc.stats;
    if enc.trivial.is_some() {
        return out;
    }
    let solve_start = Instant::now();
    let result = Solver::new(&enc.cnf, opts.solver).solve(deadline);
    out.solve_ms = ms(solve_start.elapsed());
    match result {
        SolveResult::Unsat => {}
        SolveResult::Timeout => out.verdict = Verdict::Timeout,
        SolveResult::Sat(mu) => {
            out.verdict = Verdict::Sat;
            let model = extract_model(store, &enc, &mu).ok();
            out.model_check = Some(model.as_ref().is_some_and(|m| m.eval(store, &Label::root(), f).unwrap_or(false)));
            out.model = model;
        }
    }
    out
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}
