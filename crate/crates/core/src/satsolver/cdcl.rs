//! Conflict-driven clause learning over two watched literals.
//!
//! The public surface mirrors the classic DPLL loop: [`Solver::decide`],
//! [`Solver::deduce`], [`Solver::analyze_conflict`] and backjumping. The
//! decision heuristic is activity based with ties broken by the lowest
//! variable index, so runs are reproducible.

use super::CnfFormula;
use std::time::Instant;

/// Internal literal: `2 * (var - 1) + negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lit(u32);

impl Lit {
    fn from_dimacs(l: i32) -> Self {
        let v = l.unsigned_abs() - 1;
        Lit(2 * v + u32::from(l < 0))
    }
    fn to_dimacs(self) -> i32 {
        let v = (self.0 / 2 + 1) as i32;
        if self.0 & 1 == 1 {
            -v
        } else {
            v
        }
    }
    fn var(self) -> usize {
        (self.0 / 2) as usize
    }
    fn neg(self) -> Lit {
        Lit(self.0 ^ 1)
    }
    fn idx(self) -> usize {
        self.0 as usize
    }
}

const UNASSIGNED: i8 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverConfig {
    /// Luby restarts; off by default.
    pub restarts: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// Total model, `model[v - 1]` is the value of variable `v`.
    Sat(Vec<bool>),
    Unsat,
    Timeout,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

/// Outcome of exhaustive unit propagation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Deduction {
    Sat,
    /// The falsified clause, as DIMACS literals.
    Conflict(Vec<i32>),
    Unknown,
}

/// Binary max-heap of variables keyed by activity, ties to the lower index.
#[derive(Debug, Clone, Default)]
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn new(n: usize) -> Self {
        let mut h = VarHeap { heap: Vec::with_capacity(n), pos: vec![None; n] };
        for v in 0..n {
            h.pos[v] = Some(v);
            h.heap.push(v);
        }
        h
    }

    fn better(act: &[f64], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if !Self::better(act, v, self.heap[p]) {
                break;
            }
            self.heap[i] = self.heap[p];
            self.pos[self.heap[i]] = Some(i);
            i = p;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && Self::better(act, self.heap[r], self.heap[l]) { r } else { l };
            if !Self::better(act, self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v] = Some(i);
        self.up(i, act);
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn bumped(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.up(i, act);
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    num_original: usize,
    watches: Vec<Vec<usize>>,
    value: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    heap: VarHeap,
    seen: Vec<bool>,
    /// Set when the clause database is unsatisfiable at level 0.
    root_conflict: bool,
    config: SolverConfig,
    pub conflicts: u64,
    pub decisions: u64,
}

impl Solver {
    pub fn new(cnf: &CnfFormula, config: SolverConfig) -> Self {
        let n = cnf.num_vars as usize;
        let mut s = Solver {
            num_vars: n,
            clauses: Vec::new(),
            num_original: 0,
            watches: vec![Vec::new(); 2 * n],
            value: vec![UNASSIGNED; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            phase: vec![false; n],
            heap: VarHeap::new(n),
            seen: vec![false; n],
            root_conflict: false,
            config,
            conflicts: 0,
            decisions: 0,
        };
        for c in &cnf.clauses {
            let lits: Vec<Lit> = c.iter().map(|&l| Lit::from_dimacs(l)).collect();
            s.add_clause(lits);
        }
        s.num_original = s.clauses.len();
        s
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.value[l.var()];
        if l.0 & 1 == 1 {
            -v
        } else {
            v
        }
    }

    fn add_clause(&mut self, mut lits: Vec<Lit>) {
        if self.root_conflict {
            return;
        }
        lits.sort_by_key(|l| l.0);
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return;
        }
        match lits.len() {
            0 => self.root_conflict = true,
            1 => match self.lit_value(lits[0]) {
                1 => {}
                -1 => self.root_conflict = true,
                _ => self.enqueue(lits[0], None),
            },
            _ => {
                let id = self.clauses.len();
                self.watches[lits[0].idx()].push(id);
                self.watches[lits[1].idx()].push(id);
                self.clauses.push(lits);
            }
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var();
        self.value[v] = if l.0 & 1 == 1 { -1 } else { 1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation to fixpoint; returns a falsified clause on conflict.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p.neg();
            let mut ws = std::mem::take(&mut self.watches[false_lit.idx()]);
            let mut i = 0;
            let mut conflict = None;
            while i < ws.len() {
                let cid = ws[i];
                let clause = &mut self.clauses[cid];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                if self.lit_value(first) == 1 {
                    i += 1;
                    continue;
                }
                let clause = &self.clauses[cid];
                let replacement = (2..clause.len()).find(|&k| self.lit_value(clause[k]) != -1);
                if let Some(k) = replacement {
                    let clause = &mut self.clauses[cid];
                    clause.swap(1, k);
                    let w = clause[1];
                    self.watches[w.idx()].push(cid);
                    ws.swap_remove(i);
                    continue;
                }
                if self.lit_value(first) == -1 {
                    conflict = Some(cid);
                    break;
                }
                self.enqueue(first, Some(cid));
                i += 1;
            }
            let restored = &mut self.watches[false_lit.idx()];
            ws.append(restored);
            *restored = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// Exhaustive unit propagation under the current assignment.
    pub fn deduce(&mut self) -> Deduction {
        if self.root_conflict {
            return Deduction::Conflict(Vec::new());
        }
        if let Some(c) = self.propagate() {
            if self.decision_level() == 0 {
                self.root_conflict = true;
            }
            return Deduction::Conflict(self.clauses[c].iter().map(|l| l.to_dimacs()).collect());
        }
        let all_assigned = self.trail.len() == self.num_vars;
        let all_satisfied =
            || self.clauses[..self.num_original].iter().all(|c| c.iter().any(|&l| self.lit_value(l) == 1));
        if all_assigned || all_satisfied() {
            Deduction::Sat
        } else {
            Deduction::Unknown
        }
    }

    /// Branches on the most active unassigned variable; false if none is left.
    pub fn decide(&mut self) -> bool {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.value[v] == UNASSIGNED {
                self.decisions += 1;
                self.trail_lim.push(self.trail.len());
                let l = Lit(2 * v as u32 + u32::from(!self.phase[v]));
                self.enqueue(l, None);
                return true;
            }
        }
        false
    }

    /// Pushes a decision on a chosen literal.
    pub fn assume(&mut self, lit: i32) {
        self.trail_lim.push(self.trail.len());
        self.enqueue(Lit::from_dimacs(lit), None);
    }

    pub fn current_level(&self) -> u32 {
        self.decision_level()
    }

    fn find_clause(&self, conflict: &[i32]) -> Option<usize> {
        let mut want: Vec<u32> = conflict.iter().map(|&l| Lit::from_dimacs(l).0).collect();
        want.sort_unstable();
        self.clauses.iter().position(|c| {
            let mut have: Vec<u32> = c.iter().map(|l| l.0).collect();
            have.sort_unstable();
            have == want
        })
    }

    /// First-UIP analysis of a conflict clause returned by [`Self::deduce`].
    ///
    /// Returns the learned clause (asserting literal first) and the level
    /// to backjump to. Requires a conflict above level 0.
    pub fn analyze_conflict(&mut self, conflict: &[i32]) -> (Vec<i32>, u32) {
        let cid = self.find_clause(conflict).expect("conflict clause comes from this solver");
        let (learned, level) = self.analyze(cid);
        (learned.iter().map(|l| l.to_dimacs()).collect(), level)
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn analyze(&mut self, conflict: usize) -> (Vec<Lit>, u32) {
        let current = self.decision_level();
        debug_assert!(current > 0);
        let mut learned = vec![Lit(0)];
        let mut pending = 0usize;
        let mut clause = conflict;
        let mut index = self.trail.len();
        let mut p: Option<Lit> = None;
        loop {
            let lits = self.clauses[clause].clone();
            for &q in lits.iter().filter(|&&q| Some(q) != p) {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= current {
                        pending += 1;
                    } else {
                        learned.push(q);
                    }
                }
            }
            // next seen literal on the trail
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var()] = false;
            pending -= 1;
            if pending == 0 {
                learned[0] = lit.neg();
                break;
            }
            p = Some(lit);
            clause = self.reason[lit.var()].expect("propagated literal has a reason");
        }
        for l in &learned[1..] {
            self.seen[l.var()] = false;
        }
        let mut back = 0;
        if learned.len() > 1 {
            let mut best = 1;
            for i in 2..learned.len() {
                if self.level[learned[i].var()] > self.level[learned[best].var()] {
                    best = i;
                }
            }
            learned.swap(1, best);
            back = self.level[learned[1].var()];
        }
        self.var_inc /= 0.95;
        (learned, back)
    }

    /// Learned clauses kept in the database, plus the literals fixed at
    /// level 0 as unit clauses. All are consequences of the input.
    pub fn learned_clauses(&self) -> Vec<Vec<i32>> {
        let mut out: Vec<Vec<i32>> =
            self.clauses[self.num_original..].iter().map(|c| c.iter().map(|l| l.to_dimacs()).collect()).collect();
        let root_end = self.trail_lim.first().copied().unwrap_or(self.trail.len());
        out.extend(self.trail[..root_end].iter().map(|l| vec![l.to_dimacs()]));
        out
    }

    /// Undoes all assignments above `level`.
    pub fn backjump(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level as usize];
        for i in (keep..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var();
            self.phase[v] = l.0 & 1 == 0;
            self.value[v] = UNASSIGNED;
            self.reason[v] = None;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(level as usize);
        self.qhead = keep;
    }

    fn learn(&mut self, learned: Vec<Lit>) {
        if learned.len() == 1 {
            self.enqueue(learned[0], None);
        } else {
            let id = self.clauses.len();
            self.watches[learned[0].idx()].push(id);
            self.watches[learned[1].idx()].push(id);
            let asserting = learned[0];
            self.clauses.push(learned);
            self.enqueue(asserting, Some(id));
        }
    }

    /// Luby sequence, 0-based: 1 1 2 1 1 2 4 ...
    fn luby(mut i: u64) -> u64 {
        let mut size = 1u64;
        let mut seq = 0u32;
        while size < i + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != i {
            size = (size - 1) >> 1;
            seq -= 1;
            i %= size;
        }
        1u64 << seq
    }

    /// Runs the CDCL loop; the model of a `Sat` answer is re-checked against
    /// the original clauses before it is returned.
    pub fn solve(&mut self, deadline: Option<Instant>) -> SolveResult {
        if self.root_conflict {
            return SolveResult::Unsat;
        }
        let mut restart_count = 0u64;
        let mut budget = Self::luby(0) * 100;
        let mut since_restart = 0u64;
        loop {
            if let Some(c) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.root_conflict = true;
                    return SolveResult::Unsat;
                }
                let (learned, level) = self.analyze(c);
                self.backjump(level);
                self.learn(learned);
                since_restart += 1;
                if self.conflicts.is_multiple_of(1024) && deadline.is_some_and(|d| Instant::now() >= d) {
                    return SolveResult::Timeout;
                }
                continue;
            }
            if self.config.restarts && since_restart >= budget {
                restart_count += 1;
                budget = Self::luby(restart_count) * 100;
                since_restart = 0;
                self.backjump(0);
                continue;
            }
            if self.decisions.is_multiple_of(4096) && deadline.is_some_and(|d| Instant::now() >= d) {
                return SolveResult::Timeout;
            }
            if !self.decide() {
                let model: Vec<bool> = self.value.iter().map(|&v| v == 1).collect();
                let ok = self.clauses[..self.num_original]
                    .iter()
                    .all(|c| c.iter().any(|l| model[l.var()] == (l.0 & 1 == 0)));
                assert!(ok, "solver produced a non-model");
                return SolveResult::Sat(model);
            }
        }
    }
}
