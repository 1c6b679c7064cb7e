//! Kripke structures, the satisfaction relation, model extraction from a
//! propositional assignment, and a tableau oracle.

mod oracle;

pub use oracle::{
    brute_force_oracle, brute_force_oracle_with, OracleLimits, OracleVerdict, ORACLE_MAX_DEPTH, ORACLE_MAX_MODAL_ATOMS,
};

use crate::encoder::{EncodeResult, Label, LabelId};
use crate::formula::{FormulaStore, Node, NodeId};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("assignment does not satisfy the encoding")]
    AssignmentMismatch,
    #[error("oracle guard: depth {depth} (max {max_depth}), {modal_atoms} modal atoms (max {max_atoms})")]
    Guard { depth: u32, max_depth: u32, modal_atoms: usize, max_atoms: usize },
    #[error("model dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

/// A finite Kripke structure whose states are labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    pub states: BTreeSet<Label>,
    /// Unmentioned `(state, atom)` pairs are false.
    pub valuation: BTreeMap<(Label, u32), bool>,
    pub relations: BTreeMap<u32, BTreeSet<(Label, Label)>>,
}

impl Default for KripkeModel {
    fn default() -> Self {
        Self::single_state()
    }
}

impl KripkeModel {
    /// Only the root state, no edges, every atom false.
    pub fn single_state() -> Self {
        KripkeModel { states: BTreeSet::from([Label::root()]), valuation: BTreeMap::new(), relations: BTreeMap::new() }
    }

    pub fn atom(&self, state: &Label, atom: u32) -> bool {
        self.valuation.get(&(state.clone(), atom)).copied().unwrap_or(false)
    }

    pub fn successors<'a>(&'a self, state: &'a Label, r: u32) -> impl Iterator<Item = &'a Label> + 'a {
        self.relations
            .get(&r)
            .into_iter()
            .flat_map(move |set| set.range((state.clone(), Label::root())..).take_while(move |(p, _)| p == state))
            .map(|(_, c)| c)
    }

    pub fn add_edge(&mut self, r: u32, parent: Label, child: Label) {
        self.states.insert(parent.clone());
        self.states.insert(child.clone());
        self.relations.entry(r).or_default().insert((parent, child));
    }

    /// `M, state |= f`.
    pub fn eval(&self, store: &FormulaStore, state: &Label, f: NodeId) -> Result<bool, SemanticsError> {
        if !self.states.contains(state) {
            return Err(SemanticsError::UnknownState(state.to_string()));
        }
        Ok(self.holds(store, state, f))
    }

    fn holds(&self, store: &FormulaStore, state: &Label, f: NodeId) -> bool {
        match store.node(f) {
            Node::True => true,
            Node::False => false,
            Node::Atom(a) => self.atom(state, *a),
            Node::Not(g) => !self.holds(store, state, *g),
            Node::And(cs) => cs.iter().all(|&c| self.holds(store, state, c)),
            Node::Or(cs) => cs.iter().any(|&c| self.holds(store, state, c)),
            Node::Box(r, g) => self.successors(state, *r).all(|s| self.holds(store, s, *g)),
            Node::Dia(r, g) => self.successors(state, *r).any(|s| self.holds(store, s, *g)),
        }
    }

    /// Text dump: `s <label>`, `v <label> <atom> <0|1>`, `r <modality> <parent> <child>`.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        for s in &self.states {
            let _ = writeln!(out, "s {s}");
        }
        for ((s, a), v) in &self.valuation {
            let _ = writeln!(out, "v {s} {a} {}", u8::from(*v));
        }
        for (r, edges) in &self.relations {
            for (p, c) in edges {
                let _ = writeln!(out, "r {r} {p} {c}");
            }
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self, SemanticsError> {
        let mut m = KripkeModel { states: BTreeSet::new(), valuation: BTreeMap::new(), relations: BTreeMap::new() };
        for (i, line) in text.lines().enumerate() {
            let err = |message: String| SemanticsError::Dump { line: i + 1, message };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let label = |s: &str| s.parse::<Label>().map_err(err);
            let num = |s: &str| s.parse::<u32>().map_err(|_| err(format!("bad number '{s}'")));
            match parts.as_slice() {
                [] => {}
                ["s", l] => {
                    m.states.insert(label(l)?);
                }
                ["v", l, a, v] => {
                    let v = match *v {
                        "0" => false,
                        "1" => true,
                        _ => return Err(err(format!("bad truth value '{v}'"))),
                    };
                    m.valuation.insert((label(l)?, num(a)?), v);
                }
                ["r", r, p, c] => {
                    let (p, c) = (label(p)?, label(c)?);
                    if !m.states.contains(&p) || !m.states.contains(&c) {
                        return Err(err("edge between undeclared states".into()));
                    }
                    m.relations.entry(num(r)?).or_default().insert((p, c));
                }
                _ => return Err(err(format!("unrecognized line '{line}'"))),
            }
        }
        if !m.states.contains(&Label::root()) {
            return Err(SemanticsError::Dump { line: 0, message: "root state 1 missing".into() });
        }
        Ok(m)
    }
}

/// Builds a Kripke model from a total assignment `model` (indexed by
/// `var - 1`) of the encoding.
///
/// States are the labels carrying variables plus the targets of taken
/// edges; atoms are read off the `A<label, p>` variables; `parent -> child`
/// is an edge when the literal of the pi formula that created (or reused)
/// `child` is true. Literals fixed by pure literal reduction override the
/// assignment.
pub fn extract_model(store: &FormulaStore, enc: &EncodeResult, model: &[bool]) -> Result<KripkeModel, SemanticsError> {
    if !enc.cnf.is_satisfied_by(model) || enc.trivial.is_some() {
        return Err(SemanticsError::AssignmentMismatch);
    }
    let mut value: Vec<bool> = (0..enc.vars.len()).map(|i| model.get(i).copied().unwrap_or(false)).collect();
    for &l in &enc.fixed {
        value[l.unsigned_abs() as usize - 1] = l > 0;
    }
    let lit_true = |l: i32| value[l.unsigned_abs() as usize - 1] == (l > 0);
    let name = |l: LabelId| Label(enc.labels.path(l));
    let mut m = KripkeModel::single_state();
    for (i, &(l, f)) in enc.vars.iter().enumerate() {
        let state = name(l);
        m.states.insert(state.clone());
        if let Node::Atom(a) = store.node(f) {
            m.valuation.insert((state, *a), value[i]);
        }
    }
    for e in &enc.pi_edges {
        if e.live && e.head.is_some_and(lit_true) {
            m.add_edge(e.modality, name(e.parent), name(e.child));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode, EncodeOptions};
    use crate::formula::parse;
    use crate::satsolver::{solve, SolveResult};

    #[test]
    fn eval_basics() {
        let mut s = FormulaStore::new();
        let m = KripkeModel::single_state();
        let root = Label::root();
        let t = s.top();
        let b = s.bottom();
        let box_f = s.boxed(1, b);
        let dia_t = s.dia(1, t);
        assert!(m.eval(&s, &root, t).unwrap());
        assert!(m.eval(&s, &root, box_f).unwrap());
        assert!(!m.eval(&s, &root, dia_t).unwrap());
        assert!(m.eval(&s, &Label::root().child(1, 1), t).is_err());
    }

    #[test]
    fn eval_follows_edges() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "(& (dia 1 p1) (box 1 p2) (~ (box 2 p1)))").unwrap();
        let mut m = KripkeModel::single_state();
        let c = Label::root().child(1, 1);
        let d = Label::root().child(1, 2);
        m.add_edge(1, Label::root(), c.clone());
        m.add_edge(2, Label::root(), d);
        m.valuation.insert((c.clone(), 1), true);
        m.valuation.insert((c, 2), true);
        assert!(m.eval(&s, &Label::root(), f).unwrap());
    }

    #[test]
    fn dump_round_trip() {
        let mut m = KripkeModel::single_state();
        m.add_edge(2, Label::root(), Label::root().child(1, 2));
        m.valuation.insert((Label::root(), 3), true);
        let text = m.to_dump();
        assert_eq!(text, "s 1\ns 1.1^2\nv 1 3 1\nr 2 1 1.1^2\n");
        assert_eq!(KripkeModel::from_dump(&text).unwrap(), m);
        assert!(KripkeModel::from_dump("s 1\nr 1 1 1.1\n").is_err());
        assert!(KripkeModel::from_dump("s 1.1\n").is_err());
    }

    fn certify(text: &str) -> KripkeModel {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, text).unwrap();
        let enc = encode(&mut s, f, &EncodeOptions::default()).unwrap();
        let SolveResult::Sat(mu) = solve(&enc.cnf) else { panic!("expected sat") };
        let m = extract_model(&s, &enc, &mu).unwrap();
        assert!(m.eval(&s, &Label::root(), f).unwrap());
        m
    }

    #[test]
    fn extraction_examples() {
        let m = certify("(dia 1 p1)");
        assert_eq!(m.states.len(), 2);
        let child = Label::root().child(1, 1);
        assert!(m.relations[&1].contains(&(Label::root(), child.clone())));
        assert!(m.atom(&child, 1));

        let m = certify("(box 1 false)");
        assert_eq!(m.states.len(), 1);
        assert!(m.relations.values().all(|e| e.is_empty()));

        certify("(~ (box 1 false))");
    }

    #[test]
    fn extraction_rejects_non_models() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "(& p1 p2)").unwrap();
        let enc = encode(&mut s, f, &EncodeOptions::default()).unwrap();
        let zeros = vec![false; enc.cnf.num_vars as usize];
        assert_eq!(extract_model(&s, &enc, &zeros), Err(SemanticsError::AssignmentMismatch));
    }
}
