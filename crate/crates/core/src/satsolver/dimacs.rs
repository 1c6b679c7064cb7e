use super::CnfFormula;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("line {line}: literal {lit} out of range 1..={num_vars}")]
    LiteralOutOfRange { line: usize, lit: i64, num_vars: u32 },
    #[error("line {line}: unexpected token '{token}'")]
    BadToken { line: usize, token: String },
    #[error("unterminated clause at end of input")]
    UnterminatedClause,
    #[error("header declares {declared} clauses, body has {found}")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("solver output: {0}")]
    SolverOutput(String),
}

/// Parses DIMACS CNF text.
///
/// Tautological clauses and repeated literals are removed on ingestion.
pub fn read_dimacs(text: &str) -> Result<CnfFormula, DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::MalformedHeader { line, reason: "duplicate header".into() });
            }
            let parts: Vec<_> = trimmed.split_whitespace().collect();
            let bad = |reason: &str| DimacsError::MalformedHeader { line, reason: reason.into() };
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(bad("expected 'p cnf <vars> <clauses>'"));
            }
            let vars = parts[2].parse::<u32>().map_err(|_| bad("bad variable count"))?;
            let count = parts[3].parse::<usize>().map_err(|_| bad("bad clause count"))?;
            header = Some((vars, count));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(DimacsError::MalformedHeader { line, reason: "clause before header".into() });
        };
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| DimacsError::BadToken { line, token: tok.into() })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() > u64::from(num_vars) {
                return Err(DimacsError::LiteralOutOfRange { line, lit, num_vars });
            } else {
                current.push(lit as i32);
            }
        }
    }
    let Some((num_vars, declared)) = header else {
        return Err(DimacsError::MalformedHeader { line: 0, reason: "missing header".into() });
    };
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    if declared != clauses.len() {
        return Err(DimacsError::ClauseCountMismatch { declared, found: clauses.len() });
    }
    Ok(CnfFormula::new(num_vars, clauses))
}

pub fn write_dimacs(cnf: &CnfFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len());
    for c in &cnf.clauses {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

/// Solver output: verdict line plus `v` lines for a model.
pub fn write_model(model: Option<&[bool]>) -> String {
    let mut out = String::new();
    match model {
        None => out.push_str("s UNSATISFIABLE\n"),
        Some(values) => {
            out.push_str("s SATISFIABLE\n");
            for chunk in values.iter().enumerate().collect::<Vec<_>>().chunks(10) {
                out.push('v');
                for &(i, &b) in chunk {
                    let v = i as i64 + 1;
                    let _ = write!(out, " {}", if b { v } else { -v });
                }
                out.push('\n');
            }
            out.push_str("v 0\n");
        }
    }
    out
}

/// Reads solver output in the competition format written by
/// [`write_model`]. `Ok(None)` is unsat; an unknown status is an error.
/// Variables missing from the `v` lines default to false.
pub fn read_model(text: &str, num_vars: u32) -> Result<Option<Vec<bool>>, DimacsError> {
    let bad = |m: String| DimacsError::SolverOutput(m);
    let mut status = None;
    let mut values = vec![false; num_vars as usize];
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("s") => status = Some(parts.collect::<Vec<_>>().join(" ")),
            Some("v") => {
                for tok in parts {
                    let lit: i64 = tok.parse().map_err(|_| bad(format!("bad literal '{tok}'")))?;
                    if lit == 0 {
                        continue;
                    }
                    let idx = lit.unsigned_abs() as usize;
                    if idx > values.len() {
                        return Err(bad(format!("literal {lit} out of range")));
                    }
                    values[idx - 1] = lit > 0;
                }
            }
            _ => {}
        }
    }
    match status.as_deref() {
        Some("SATISFIABLE") => Ok(Some(values)),
        Some("UNSATISFIABLE") => Ok(None),
        Some(other) => Err(bad(format!("status '{other}'"))),
        None => Err(bad("no status line".into())),
    }
}
