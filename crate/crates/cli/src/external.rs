//! Runs a third-party SAT solver on a DIMACS file.
//!
//! The command is split on whitespace and the path of a temporary DIMACS
//! file is appended as the last argument. Its standard output must follow
//! the competition format (`s SATISFIABLE` / `s UNSATISFIABLE` plus `v`
//! lines); the exit status is ignored.

use crate::error::CliError;
use kmsat::satsolver::{read_model, write_dimacs, CnfFormula, SolveResult};
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

pub fn solve_external(command: &str, cnf: &CnfFormula, deadline: Option<Instant>) -> Result<SolveResult, CliError> {
    let mut parts = command.split_whitespace();
    let program = parts.next().ok_or_else(|| CliError::External("empty command".into()))?;
    let mut file = tempfile::Builder::new()
        .suffix(".cnf")
        .tempfile()
        .map_err(|e| CliError::External(format!("temporary file: {e}")))?;
    file.write_all(write_dimacs(cnf).as_bytes())
        .and_then(|_| file.flush())
        .map_err(|e| CliError::External(format!("temporary file: {e}")))?;
    let mut child = Command::new(program)
        .args(parts)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| CliError::External(format!("cannot start '{program}': {e}")))?;
    let mut stdout = child.stdout.take().expect("stdout is piped");
    // drain on a thread so a chatty solver cannot block on a full pipe
    let reader = std::thread::spawn(move || {
        let mut out = String::new();
        stdout.read_to_string(&mut out).map(|_| out)
    });
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if deadline.is_some_and(|d| Instant::now() >= d) => {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(SolveResult::Timeout);
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(CliError::External(e.to_string())),
        }
    }
    let text = reader
        .join()
        .map_err(|_| CliError::External("output reader panicked".into()))?
        .map_err(|e| CliError::External(e.to_string()))?;
    match read_model(&text, cnf.num_vars)? {
        None => Ok(SolveResult::Unsat),
        Some(model) if cnf.is_satisfied_by(&model) => Ok(SolveResult::Sat(model)),
        Some(_) => Err(CliError::External("reported model does not satisfy the formula".into())),
    }
}
