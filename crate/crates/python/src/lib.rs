//! Python module `pykmsat`: parsing, preprocessing, encoding, solving,
//! generators and the reference oracle.

use kmsat::benchgen::{self, BranchParams, RandomCnfParams};
use kmsat::encoder::{self, EncodeOptions, EncodeResult};
use kmsat::formula::{self, Form, FormulaStore, LiftMode, NodeId, PreprocessOptions};
use kmsat::pipeline::{self, PipelineOptions};
use kmsat::satsolver::{self, CnfFormula, SolveResult, Solver, SolverConfig};
use kmsat::semantics::{self, OracleLimits, OracleVerdict};
use pyo3::exceptions::{PyTimeoutError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::time::Duration;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_form(s: &str) -> PyResult<Form> {
    match s {
        "bnf" => Ok(Form::Bnf),
        "nnf" => Ok(Form::Nnf),
        _ => Err(value_error(format!("format must be 'bnf' or 'nnf', not '{s}'"))),
    }
}

fn parse_lift(s: &str) -> PyResult<LiftMode> {
    match s {
        "no" => Ok(LiftMode::NoLift),
        "yes" => Ok(LiftMode::Lift),
        "ctrl" => Ok(LiftMode::CtrlLift),
        _ => Err(value_error(format!("lift must be 'no', 'yes' or 'ctrl', not '{s}'"))),
    }
}

/// A K_m formula with its own node store.
#[pyclass(name = "Formula", skip_from_py_object)]
#[derive(Clone)]
struct PyFormula {
    store: FormulaStore,
    root: NodeId,
}

impl PyFormula {
    fn map(&self, f: impl FnOnce(&mut FormulaStore, NodeId) -> NodeId) -> PyFormula {
        let mut store = self.store.clone();
        let root = f(&mut store, self.root);
        PyFormula { store, root }
    }
}

#[pymethods]
impl PyFormula {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let mut store = FormulaStore::new();
        let root = formula::parse(&mut store, text).map_err(value_error)?;
        Ok(PyFormula { store, root })
    }

    fn depth(&self) -> u32 {
        self.store.depth(self.root)
    }

    /// Distinct subformulas.
    fn size(&self) -> usize {
        self.store.dag_size(self.root)
    }

    fn to_nnf(&self) -> Self {
        self.map(|s, f| s.to_nnf(f))
    }

    fn to_bnf(&self) -> Self {
        self.map(|s, f| s.to_bnf(f))
    }

    fn simplify(&self) -> Self {
        self.map(|s, f| s.simplify(f))
    }

    #[pyo3(signature = (format = "bnf", lift = "no", simplify = true))]
    fn preprocess(&self, format: &str, lift: &str, simplify: bool) -> PyResult<Self> {
        let opts = PreprocessOptions { format: parse_form(format)?, lift: parse_lift(lift)?, simplify };
        Ok(self.map(|s, f| s.preprocess(f, &opts)))
    }

    fn __str__(&self) -> String {
        self.store.display(self.root)
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.store.display(self.root))
    }
}

/// The CNF produced for a formula, with its labels and clause origins.
#[pyclass(name = "Encoding")]
struct PyEncoding {
    inner: EncodeResult,
    sidecar: String,
}

#[pymethods]
impl PyEncoding {
    #[getter]
    fn num_vars(&self) -> u32 {
        self.inner.cnf.num_vars
    }

    #[getter]
    fn clauses(&self) -> Vec<Vec<i32>> {
        self.inner.cnf.clauses.clone()
    }

    #[getter]
    fn labels(&self) -> usize {
        self.inner.stats.labels
    }

    /// True when encoding alone found the formula unsatisfiable.
    #[getter]
    fn trivial_unsat(&self) -> bool {
        self.inner.trivial.is_some()
    }

    /// `(label, rule, group)` for each clause.
    fn trace(&self) -> Vec<(String, String, u32)> {
        self.inner
            .trace
            .iter()
            .map(|t| (self.inner.labels.display(t.label), format!("{:?}", t.rule).to_lowercase(), t.group))
            .collect()
    }

    fn dimacs(&self) -> String {
        satsolver::write_dimacs(&self.inner.cnf)
    }

    /// One line per variable: `var label formula`.
    fn variable_map(&self) -> String {
        self.sidecar.clone()
    }
}

/// Preprocesses and encodes `formula`.
#[pyfunction]
#[pyo3(signature = (formula, format = "bnf", lift = "no", simplify = true, plr = false, bcp = false))]
fn encode(formula: &PyFormula, format: &str, lift: &str, simplify: bool, plr: bool, bcp: bool) -> PyResult<PyEncoding> {
    let opts = PreprocessOptions { format: parse_form(format)?, lift: parse_lift(lift)?, simplify };
    let mut store = formula.store.clone();
    let g = store.preprocess(formula.root, &opts);
    let inner =
        encoder::encode(&mut store, g, &EncodeOptions { plr, bcp, ..Default::default() }).map_err(value_error)?;
    let sidecar = inner.sidecar(&store);
    Ok(PyEncoding { inner, sidecar })
}

/// Decides satisfiability; returns a dict with the verdict, sizes, timings
/// and, when satisfiable, the checked Kripke model as a text dump.
#[pyfunction]
#[pyo3(signature = (formula, format = "bnf", lift = "no", simplify = true, plr = false, bcp = false, timeout = None))]
#[allow(clippy::too_many_arguments)]
fn decide<'py>(
    py: Python<'py>,
    formula: &PyFormula,
    format: &str,
    lift: &str,
    simplify: bool,
    plr: bool,
    bcp: bool,
    timeout: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = PipelineOptions {
        preprocess: PreprocessOptions { format: parse_form(format)?, lift: parse_lift(lift)?, simplify },
        encode: EncodeOptions { plr, bcp, ..Default::default() },
        solver: SolverConfig::default(),
        timeout: timeout.map(Duration::from_secs_f64),
    };
    let mut store = formula.store.clone();
    let out = pipeline::decide(&mut store, formula.root, &opts);
    let d = PyDict::new(py);
    d.set_item("verdict", out.verdict.as_str())?;
    d.set_item("vars", out.stats.vars)?;
    d.set_item("clauses", out.stats.clauses)?;
    d.set_item("labels", out.stats.labels)?;
    d.set_item("encode_ms", out.encode_ms)?;
    d.set_item("solve_ms", out.solve_ms)?;
    d.set_item("model_check", out.model_check)?;
    d.set_item("model", out.model.map(|m| m.to_dump()))?;
    Ok(d)
}

/// Solves a CNF given as lists of nonzero integers. Returns the model as a
/// list of booleans (index `v - 1` for variable `v`) or None when unsat.
#[pyfunction]
#[pyo3(signature = (num_vars, clauses, timeout = None))]
fn solve_cnf(num_vars: u32, clauses: Vec<Vec<i32>>, timeout: Option<f64>) -> PyResult<Option<Vec<bool>>> {
    if let Some(&l) = clauses.iter().flatten().find(|l| **l == 0 || l.unsigned_abs() > num_vars) {
        return Err(value_error(format!("literal {l} out of range for {num_vars} variables")));
    }
    let cnf = CnfFormula::new(num_vars, clauses);
    let deadline = timeout.map(|t| std::time::Instant::now() + Duration::from_secs_f64(t));
    match Solver::new(&cnf, SolverConfig::default()).solve(deadline) {
        SolveResult::Sat(m) => Ok(Some(m)),
        SolveResult::Unsat => Ok(None),
        SolveResult::Timeout => Err(PyTimeoutError::new_err("solver timed out")),
    }
}

/// Reference decision procedure, independent of the encoder. Raises
/// ValueError when the formula exceeds the size guard.
#[pyfunction]
#[pyo3(signature = (formula, max_depth = None, max_modal_atoms = None))]
fn oracle(formula: &PyFormula, max_depth: Option<u32>, max_modal_atoms: Option<usize>) -> PyResult<bool> {
    let mut limits = OracleLimits::default();
    if let Some(d) = max_depth {
        limits.max_depth = d;
    }
    if let Some(a) = max_modal_atoms {
        limits.max_modal_atoms = a;
    }
    let v = semantics::brute_force_oracle_with(&formula.store, formula.root, limits).map_err(value_error)?;
    Ok(v == OracleVerdict::Sat)
}

#[pyfunction]
fn branch_n(h: u32) -> PyResult<PyFormula> {
    let mut store = FormulaStore::new();
    let root = benchgen::gen_branch_n(&mut store, BranchParams { h }).map_err(value_error)?;
    Ok(PyFormula { store, root })
}

#[pyfunction]
fn branch_p(h: u32) -> PyResult<PyFormula> {
    let mut store = FormulaStore::new();
    let root = benchgen::gen_branch_p(&mut store, BranchParams { h }).map_err(value_error)?;
    Ok(PyFormula { store, root })
}

/// Random box-CNF with `l` clauses of `k` literals over `n` atoms.
#[pyfunction]
#[pyo3(signature = (d, l, k = 3, n = 3, m = 1, p = 0.5, seed = 0))]
fn random_boxcnf(d: u32, l: u32, k: u32, n: u32, m: u32, p: f64, seed: u64) -> PyResult<PyFormula> {
    let mut store = FormulaStore::new();
    let params = RandomCnfParams { d, l, k, n, m, p, seed };
    let root = benchgen::gen_random_boxcnf(&mut store, &params).map_err(value_error)?;
    Ok(PyFormula { store, root })
}

#[pyfunction]
fn derive_seed(base: u64, index: u64) -> u64 {
    benchgen::derive_seed(base, index)
}

#[pymodule]
fn pykmsat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFormula>()?;
    m.add_class::<PyEncoding>()?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(solve_cnf, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(branch_n, m)?)?;
    m.add_function(wrap_pyfunction!(branch_p, m)?)?;
    m.add_function(wrap_pyfunction!(random_boxcnf, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    Ok(())
}
