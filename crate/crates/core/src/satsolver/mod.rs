//! Propositional CNF, DIMACS I/O and an embedded CDCL solver.

mod cdcl;
mod dimacs;

pub use cdcl::{Deduction, SolveResult, Solver, SolverConfig};
use std::collections::{HashMap, HashSet};

pub use dimacs::{read_dimacs, read_model, write_dimacs, write_model, DimacsError};

/// Clause database over variables `1..=num_vars`; literals are signed
/// variable indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    /// Builds a formula, dropping duplicate literals inside a clause and
    /// tautological clauses.
    pub fn new(num_vars: u32, clauses: impl IntoIterator<Item = Vec<i32>>) -> Self {
        let mut out = Vec::new();
        for mut c in clauses {
            let mut seen = std::collections::HashSet::new();
            c.retain(|l| seen.insert(*l));
            if c.iter().any(|l| seen.contains(&-l)) {
                continue;
            }
            out.push(c);
        }
        Self { num_vars, clauses: out }
    }

    /// The canonical contradiction `A1 & ~A1`.
    pub fn contradiction() -> Self {
        Self { num_vars: 1, clauses: vec![vec![1], vec![-1]] }
    }

    pub fn is_contradiction_sentinel(&self) -> bool {
        self.num_vars == 1 && self.clauses == [vec![1], vec![-1]]
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// True iff `model` (indexed by `var - 1`) satisfies every clause.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = model.get(l.unsigned_abs() as usize - 1).copied().unwrap_or(false);
                v == (l > 0)
            })
        })
    }
}

impl CnfFormula {
    /// True iff some bijective renaming of the variables (polarity kept)
    /// maps the clause multiset of `self` onto that of `other`. Backtracking
    /// search; intended for small formulas.
    pub fn is_isomorphic(&self, other: &CnfFormula) -> bool {
        let a = normalized(&self.clauses);
        let b = normalized(&other.clauses);
        if a.len() != b.len() {
            return false;
        }
        let sig_a = signatures(&a);
        let sig_b = signatures(&b);
        if sig_a.len() != sig_b.len() {
            return false;
        }
        let mut ha: Vec<_> = sig_a.values().cloned().collect();
        let mut hb: Vec<_> = sig_b.values().cloned().collect();
        ha.sort();
        hb.sort();
        if ha != hb {
            return false;
        }
        let target: HashSet<Vec<i32>> = b.iter().cloned().collect();
        let mut order: Vec<u32> = sig_a.keys().copied().collect();
        order.sort_unstable();
        let mut search = IsoSearch {
            a: &a,
            b: &b,
            target,
            sig_a: &sig_a,
            sig_b: &sig_b,
            order,
            map: HashMap::new(),
            used: HashSet::new(),
        };
        search.go(0)
    }
}

fn normalized(clauses: &[Vec<i32>]) -> Vec<Vec<i32>> {
    let mut out: Vec<Vec<i32>> = clauses
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();
    out.sort();
    out
}

/// Per variable: sorted list of (clause length, polarity) occurrences.
fn signatures(clauses: &[Vec<i32>]) -> HashMap<u32, Vec<(usize, bool)>> {
    let mut sig: HashMap<u32, Vec<(usize, bool)>> = HashMap::new();
    for c in clauses {
        for &l in c {
            sig.entry(l.unsigned_abs()).or_default().push((c.len(), l > 0));
        }
    }
    for v in sig.values_mut() {
        v.sort_unstable();
    }
    sig
}

struct IsoSearch<'a> {
    a: &'a [Vec<i32>],
    b: &'a [Vec<i32>],
    target: HashSet<Vec<i32>>,
    sig_a: &'a HashMap<u32, Vec<(usize, bool)>>,
    sig_b: &'a HashMap<u32, Vec<(usize, bool)>>,
    order: Vec<u32>,
    map: HashMap<u32, u32>,
    used: HashSet<u32>,
}

impl IsoSearch<'_> {
    fn image(&self, c: &[i32]) -> Option<Vec<i32>> {
        let mut out = Vec::with_capacity(c.len());
        for &l in c {
            let v = *self.map.get(&l.unsigned_abs())? as i32;
            out.push(if l > 0 { v } else { -v });
        }
        out.sort_unstable();
        Some(out)
    }

    fn go(&mut self, i: usize) -> bool {
        if i == self.order.len() {
            let mut img: Vec<Vec<i32>> = self.a.iter().map(|c| self.image(c).expect("total map")).collect();
            img.sort();
            return img == self.b;
        }
        let v = self.order[i];
        let mut candidates: Vec<u32> = self
            .sig_b
            .iter()
            .filter(|(w, s)| !self.used.contains(w) && *s == &self.sig_a[&v])
            .map(|(&w, _)| w)
            .collect();
        candidates.sort_unstable();
        for w in candidates {
            self.map.insert(v, w);
            self.used.insert(w);
            let consistent = self
                .a
                .iter()
                .filter(|c| c.iter().any(|l| l.unsigned_abs() == v))
                .all(|c| self.image(c).is_none_or(|img| self.target.contains(&img)));
            if consistent && self.go(i + 1) {
                return true;
            }
            self.map.remove(&v);
            self.used.remove(&w);
        }
        false
    }
}

/// Decides `cnf` with the default configuration.
pub fn solve(cnf: &CnfFormula) -> SolveResult {
    Solver::new(cnf, SolverConfig::default()).solve(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isomorphism_renames_but_keeps_polarity() {
        let a = CnfFormula::new(3, vec![vec![1, -2], vec![2, 3], vec![-3]]);
        let b = CnfFormula::new(3, vec![vec![-1], vec![3, -2], vec![2, 1]]);
        assert!(a.is_isomorphic(&b));
        let c = CnfFormula::new(3, vec![vec![-1, -2], vec![2, 3], vec![-3]]);
        assert!(!a.is_isomorphic(&c));
        let d = CnfFormula::new(3, vec![vec![1, -2], vec![2, 3], vec![3]]);
        assert!(!a.is_isomorphic(&d));
    }
}
