//! The labeled K_m to propositional CNF encoding.
//!
//! `Def(σ, ψ)` obligations are expanded breadth-first over labels and, within
//! one label, in the order alpha/beta, pi, nu. Optional on-the-fly passes:
//! unit propagation over the clauses generated so far (BCP) and pure literal
//! reduction when a label is finished (PLR). Valid clauses are never emitted.
//!
//! Every obligation carries a demand count: the number of live clauses that
//! still need it defined. When the count drops to zero the obligation is
//! not expanded, or its clauses are withdrawn if it already was.

mod label;

pub use label::{Label, LabelId, LabelInfo, LabelTree};

use crate::formula::{Category, FormulaStore, Node, NodeId};
use crate::satsolver::CnfFormula;
use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeOptions {
    pub plr: bool,
    pub bcp: bool,
    pub max_clauses: usize,
    pub max_labels: usize,
    pub deadline: Option<Instant>,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self { plr: false, bcp: false, max_clauses: 1 << 26, max_labels: 1 << 22, deadline: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("budget exhausted: more than {limit} {what}")]
    Budget { what: &'static str, limit: usize },
    #[error("encoding timed out")]
    Timeout,
}

/// Which rule produced a clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Root,
    Alpha,
    Beta,
    Pi,
    Nu,
    /// A unit fixed by on-the-fly propagation.
    Unit,
}

/// Origin of one output clause. Clauses sharing `group` come from one
/// expansion step (all conjuncts of one alpha formula, or one nu/pi pair).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClauseTrace {
    pub label: LabelId,
    pub rule: Rule,
    pub modality: u32,
    pub group: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EncodeStats {
    pub labels: usize,
    pub vars: usize,
    pub clauses: usize,
    pub dropped_by_plr: usize,
    /// Obligations that were referenced but never expanded.
    pub defs_skipped: usize,
    pub valid_dropped: usize,
}

/// A successor edge candidate: `parent --r--> child`, taken when the head
/// literal of the pi formula is true.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PiEdge {
    pub parent: LabelId,
    pub child: LabelId,
    pub modality: u32,
    pub pi: NodeId,
    pub head: Option<i32>,
    /// False when the pi obligation was withdrawn after expansion.
    pub live: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trivial {
    Unsat,
}

#[derive(Debug, Clone)]
pub struct EncodeResult {
    pub cnf: CnfFormula,
    pub root_var: Option<u32>,
    pub stats: EncodeStats,
    pub trivial: Option<Trivial>,
    pub labels: LabelTree,
    /// `vars[v - 1]` is the labeled formula of variable `v`.
    pub vars: Vec<(LabelId, NodeId)>,
    /// Literals fixed by pure literal reduction; their variables occur in no
    /// output clause.
    pub fixed: Vec<i32>,
    pub pi_edges: Vec<PiEdge>,
    /// `trace[i]` describes `cnf.clauses[i]`.
    pub trace: Vec<ClauseTrace>,
    varmap: HashMap<(LabelId, NodeId), u32>,
}

impl EncodeResult {
    /// Variable of `A<label, node>`, if one was allocated.
    pub fn var_of(&self, label: LabelId, node: NodeId) -> Option<u32> {
        self.varmap.get(&(label, node)).copied()
    }

    /// One line per variable: `<var> <label> <formula>`.
    pub fn sidecar(&self, store: &FormulaStore) -> String {
        let mut out = String::new();
        for (i, &(l, f)) in self.vars.iter().enumerate() {
            let _ = writeln!(out, "{} {} {}", i + 1, self.labels.display(l), store.display(f));
        }
        out
    }

    fn contradiction(labels: LabelTree, stats: EncodeStats) -> Self {
        let cnf = CnfFormula::contradiction();
        let stats = EncodeStats { labels: labels.len(), vars: 1, clauses: 2, ..stats };
        EncodeResult {
            cnf,
            root_var: None,
            stats,
            trivial: Some(Trivial::Unsat),
            labels,
            vars: Vec::new(),
            fixed: Vec::new(),
            pi_edges: Vec::new(),
            trace: (0..2)
                .map(|group| ClauseTrace { label: LabelId::ROOT, rule: Rule::Unit, modality: 0, group })
                .collect(),
            varmap: HashMap::new(),
        }
    }
}

#[derive(Debug)]
enum Abort {
    Conflict,
    Error(EncodeError),
}

impl From<EncodeError> for Abort {
    fn from(e: EncodeError) -> Self {
        Abort::Error(e)
    }
}

type ObId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ClauseState {
    Live,
    Satisfied,
    Killed,
}

#[derive(Debug, Clone, Copy)]
struct Implicate {
    lit: i32,
    ob: ObId,
    held: bool,
}

#[derive(Debug, Clone)]
struct Clause {
    lits: Vec<i32>,
    implicates: Vec<Implicate>,
    state: ClauseState,
}

#[derive(Debug, Clone)]
struct Obligation {
    label: LabelId,
    node: NodeId,
    cat: Category,
    demand: u32,
    expanded: bool,
    queued: bool,
    owned: Vec<usize>,
    child: Option<LabelId>,
    /// 1-based position among the distinct pi formulas of the same modality
    /// at this label.
    pi_index: u32,
}

#[derive(Debug, Clone, Default)]
struct LabelWork {
    ab: VecDeque<ObId>,
    pis: Vec<ObId>,
    nus: Vec<ObId>,
    vars: Vec<u32>,
    finalized: bool,
}

/// Literal of a labeled formula before variable allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Key {
    Const(bool),
    Var { label: LabelId, node: NodeId, positive: bool },
}

struct Encoder<'s> {
    store: &'s mut FormulaStore,
    opts: EncodeOptions,
    labels: LabelTree,
    work: Vec<LabelWork>,
    varmap: HashMap<(LabelId, NodeId), u32>,
    vars: Vec<(LabelId, NodeId)>,
    /// Indexed by variable; slot 0 unused. 1 true, -1 false, 0 unassigned.
    value: Vec<i8>,
    by_plr: Vec<bool>,
    occ: Vec<Vec<usize>>,
    pos: Vec<u32>,
    neg: Vec<u32>,
    clauses: Vec<Clause>,
    trace: Vec<ClauseTrace>,
    obs: Vec<Obligation>,
    obmap: HashMap<(LabelId, NodeId), ObId>,
    queue: Vec<u32>,
    qhead: usize,
    touched: Vec<u32>,
    pi_records: Vec<(LabelId, ObId)>,
    root_var: u32,
    groups: u32,
    stats: EncodeStats,
}

/// Encodes a preprocessed formula.
pub fn encode(store: &mut FormulaStore, root: NodeId, opts: &EncodeOptions) -> Result<EncodeResult, EncodeError> {
    match store.node(root) {
        Node::True => {
            return Ok(EncodeResult {
                cnf: CnfFormula::default(),
                root_var: None,
                stats: EncodeStats { labels: 1, ..Default::default() },
                trivial: None,
                labels: LabelTree::with_root(),
                vars: Vec::new(),
                fixed: Vec::new(),
                pi_edges: Vec::new(),
                trace: Vec::new(),
                varmap: HashMap::new(),
            })
        }
        Node::False => return Ok(EncodeResult::contradiction(LabelTree::with_root(), EncodeStats::default())),
        _ => {}
    }
    let mut enc = Encoder {
        store,
        opts: *opts,
        labels: LabelTree::with_root(),
        work: vec![LabelWork::default()],
        varmap: HashMap::new(),
        vars: Vec::new(),
        value: vec![0],
        by_plr: vec![false],
        occ: vec![Vec::new()],
        pos: vec![0],
        neg: vec![0],
        clauses: Vec::new(),
        trace: Vec::new(),
        obs: Vec::new(),
        obmap: HashMap::new(),
        queue: Vec::new(),
        qhead: 0,
        touched: Vec::new(),
        pi_records: Vec::new(),
        root_var: 0,
        groups: 0,
        stats: EncodeStats::default(),
    };
    match enc.run(root) {
        Ok(()) => Ok(enc.finish()),
        Err(Abort::Conflict) => {
            let stats = enc.stats;
            Ok(EncodeResult::contradiction(enc.labels, stats))
        }
        Err(Abort::Error(e)) => Err(e),
    }
}

impl Encoder<'_> {
    fn trace(&mut self, label: LabelId, rule: Rule, modality: u32) -> ClauseTrace {
        self.groups += 1;
        ClauseTrace { label, rule, modality, group: self.groups - 1 }
    }

    fn key(&self, label: LabelId, f: NodeId) -> Key {
        match self.store.node(f) {
            Node::True => Key::Const(true),
            Node::False => Key::Const(false),
            Node::Not(g) => Key::Var { label, node: *g, positive: false },
            _ => Key::Var { label, node: f, positive: true },
        }
    }

    fn var(&mut self, label: LabelId, node: NodeId) -> u32 {
        if let Some(&v) = self.varmap.get(&(label, node)) {
            return v;
        }
        self.vars.push((label, node));
        let v = self.vars.len() as u32;
        self.varmap.insert((label, node), v);
        self.value.push(0);
        self.by_plr.push(false);
        self.occ.push(Vec::new());
        self.pos.push(0);
        self.neg.push(0);
        self.work[label.index()].vars.push(v);
        v
    }

    fn lit_value(&self, lit: i32) -> i8 {
        let v = self.value[lit.unsigned_abs() as usize];
        if lit < 0 {
            -v
        } else {
            v
        }
    }

    fn ensure_ob(&mut self, label: LabelId, node: NodeId) -> Option<ObId> {
        if let Some(&id) = self.obmap.get(&(label, node)) {
            return Some(id);
        }
        let cat = self.store.classify(node);
        if matches!(cat, Category::Literal | Category::Constant(_)) {
            return None;
        }
        let id = self.obs.len();
        let mut pi_index = 0;
        match cat {
            Category::Pi(r, _) => {
                pi_index = 1 + self.pis_of(label, r).len() as u32;
                self.work[label.index()].pis.push(id);
            }
            Category::Nu(..) => self.work[label.index()].nus.push(id),
            _ => {}
        }
        self.obs.push(Obligation {
            label,
            node,
            cat,
            demand: 0,
            expanded: false,
            queued: false,
            owned: Vec::new(),
            child: None,
            pi_index,
        });
        self.obmap.insert((label, node), id);
        Some(id)
    }

    fn add_demand(&mut self, ob: ObId) {
        let o = &mut self.obs[ob];
        o.demand += 1;
        if o.demand == 1 && !o.expanded {
            debug_assert!(!self.work[o.label.index()].finalized, "demand on a finished label");
            if matches!(o.cat, Category::Alpha(_) | Category::Beta(_)) && !o.queued {
                o.queued = true;
                self.work[o.label.index()].ab.push_back(ob);
            }
        }
    }

    fn release(&mut self, ob: ObId) {
        let mut stack = vec![ob];
        while let Some(ob) = stack.pop() {
            let o = &mut self.obs[ob];
            o.demand -= 1;
            if o.demand > 0 || !o.expanded {
                continue;
            }
            o.expanded = false;
            for cid in std::mem::take(&mut o.owned) {
                if self.clauses[cid].state == ClauseState::Live {
                    self.uncount(cid);
                }
                let c = &mut self.clauses[cid];
                c.state = ClauseState::Killed;
                for imp in &mut c.implicates {
                    if imp.held {
                        imp.held = false;
                        stack.push(imp.ob);
                    }
                }
            }
        }
    }

    fn uncount(&mut self, cid: usize) {
        for i in 0..self.clauses[cid].lits.len() {
            let l = self.clauses[cid].lits[i];
            let v = l.unsigned_abs();
            if l > 0 {
                self.pos[v as usize] -= 1;
            } else {
                self.neg[v as usize] -= 1;
            }
            if self.opts.plr {
                self.touched.push(v);
            }
        }
    }

    fn satisfy(&mut self, cid: usize) {
        self.uncount(cid);
        self.clauses[cid].state = ClauseState::Satisfied;
        let mut released = Vec::new();
        for i in 0..self.clauses[cid].implicates.len() {
            let imp = self.clauses[cid].implicates[i];
            if imp.held && self.lit_value(imp.lit) != 1 {
                self.clauses[cid].implicates[i].held = false;
                released.push(imp.ob);
            }
        }
        for ob in released {
            self.release(ob);
        }
    }

    fn check_budget(&self) -> Result<(), EncodeError> {
        if self.clauses.len() > self.opts.max_clauses {
            return Err(EncodeError::Budget { what: "clauses", limit: self.opts.max_clauses });
        }
        if self.clauses.len().is_multiple_of(1024) && self.opts.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(EncodeError::Timeout);
        }
        Ok(())
    }

    /// Emits `heads -> OR implicates`, i.e. the clause
    /// `~L<h1> | ... | L<i1> | ...`.
    fn emit(
        &mut self,
        owner: Option<ObId>,
        trace: ClauseTrace,
        heads: &[(LabelId, NodeId)],
        implicates: &[(LabelId, NodeId)],
    ) -> Result<(), Abort> {
        // (label, node, positive, implicate formula)
        let mut lits: Vec<(LabelId, NodeId, bool, Option<NodeId>)> = Vec::new();
        let items = heads.iter().map(|&(l, f)| (l, f, false)).chain(implicates.iter().map(|&(l, f)| (l, f, true)));
        for (l, f, is_implicate) in items {
            match self.key(l, f) {
                Key::Const(b) => {
                    // a true literal makes the clause valid, a false one vanishes
                    if b == is_implicate {
                        self.stats.valid_dropped += 1;
                        return Ok(());
                    }
                }
                Key::Var { label, node, positive } => {
                    let positive = positive == is_implicate;
                    let imp = is_implicate.then_some(f);
                    match lits.iter_mut().find(|x| x.0 == label && x.1 == node) {
                        Some(x) if x.2 != positive => {
                            self.stats.valid_dropped += 1;
                            return Ok(());
                        }
                        Some(x) => {
                            if x.3.is_none() {
                                x.3 = imp;
                            }
                        }
                        None => lits.push((label, node, positive, imp)),
                    }
                }
            }
        }
        let existing = |enc: &Self, l: LabelId, n: NodeId, p: bool| {
            enc.varmap.get(&(l, n)).map(|&v| enc.lit_value(if p { v as i32 } else { -(v as i32) }))
        };
        let satisfied = lits.iter().any(|&(l, n, p, _)| existing(self, l, n, p) == Some(1));
        let mut clause = Clause { lits: Vec::new(), implicates: Vec::new(), state: ClauseState::Live };
        let mut demanded = Vec::new();
        for &(l, n, p, imp) in &lits {
            let value = existing(self, l, n, p);
            if satisfied && value != Some(1) {
                if let Some(f) = imp {
                    self.ensure_ob(l, f);
                }
                continue;
            }
            let v = self.var(l, n) as i32;
            let lit = if p { v } else { -v };
            clause.lits.push(lit);
            if let Some(f) = imp {
                if let Some(ob) = self.ensure_ob(l, f) {
                    let held = self.lit_value(lit) != -1;
                    clause.implicates.push(Implicate { lit, ob, held });
                    if held {
                        demanded.push(ob);
                    }
                }
            }
        }
        let cid = self.clauses.len();
        if satisfied {
            clause.state = ClauseState::Satisfied;
        }
        self.clauses.push(clause);
        self.trace.push(trace);
        if let Some(o) = owner {
            self.obs[o].owned.push(cid);
        }
        for ob in demanded {
            self.add_demand(ob);
        }
        self.check_budget()?;
        if satisfied {
            return Ok(());
        }
        let mut unassigned = None;
        let mut free = 0;
        for i in 0..self.clauses[cid].lits.len() {
            let l = self.clauses[cid].lits[i];
            let v = l.unsigned_abs() as usize;
            self.occ[v].push(cid);
            if l > 0 {
                self.pos[v] += 1;
            } else {
                self.neg[v] += 1;
            }
            if self.lit_value(l) == 0 {
                free += 1;
                unassigned = Some(l);
            }
        }
        if self.opts.bcp {
            match (free, unassigned) {
                (0, _) => return Err(Abort::Conflict),
                (1, Some(l)) => {
                    self.assign(l);
                    self.propagate()?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn assign(&mut self, lit: i32) {
        let v = lit.unsigned_abs();
        self.value[v as usize] = if lit > 0 { 1 } else { -1 };
        self.queue.push(v);
    }

    fn propagate(&mut self) -> Result<(), Abort> {
        while self.qhead < self.queue.len() {
            let v = self.queue[self.qhead] as usize;
            self.qhead += 1;
            let mut i = 0;
            while i < self.occ[v].len() {
                let cid = self.occ[v][i];
                i += 1;
                if self.clauses[cid].state != ClauseState::Live {
                    continue;
                }
                if self.clauses[cid].lits.iter().any(|&l| self.lit_value(l) == 1) {
                    self.satisfy(cid);
                    continue;
                }
                let mut free = self.clauses[cid].lits.iter().filter(|&&l| self.lit_value(l) == 0);
                let first = free.next().copied();
                let more = free.next().is_some();
                // implicates that just became false are no longer needed
                let mut released = Vec::new();
                for imp in &mut self.clauses[cid].implicates {
                    if imp.held && self.value[imp.lit.unsigned_abs() as usize] != 0 {
                        imp.held = false;
                        released.push(imp.ob);
                    }
                }
                for ob in released {
                    self.release(ob);
                }
                match (first, more) {
                    (None, _) => return Err(Abort::Conflict),
                    (Some(l), false) => self.assign(l),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    fn run(&mut self, root: NodeId) -> Result<(), Abort> {
        let root_trace = self.trace(LabelId::ROOT, Rule::Root, 0);
        self.emit(None, root_trace, &[], &[(LabelId::ROOT, root)])?;
        self.root_var = 1;
        let mut next = 0;
        while next < self.labels.len() {
            if self.opts.deadline.is_some_and(|d| Instant::now() >= d) {
                return Err(EncodeError::Timeout.into());
            }
            let sigma = LabelId(next as u32);
            self.process_label(sigma)?;
            self.work[next].finalized = true;
            if self.opts.plr {
                let vars = self.work[next].vars.clone();
                self.touched.extend(vars);
                self.run_plr();
            }
            next += 1;
        }
        Ok(())
    }

    fn alive(&self, ob: ObId) -> bool {
        self.obs[ob].demand > 0
    }

    fn process_label(&mut self, sigma: LabelId) -> Result<(), Abort> {
        // alpha / beta
        while let Some(ob) = self.work[sigma.index()].ab.pop_front() {
            self.obs[ob].queued = false;
            if !self.alive(ob) || self.obs[ob].expanded {
                continue;
            }
            self.obs[ob].expanded = true;
            let node = self.obs[ob].node;
            match self.obs[ob].cat.clone() {
                Category::Alpha(mut parts) => {
                    dedup_in_order(&mut parts);
                    let t = self.trace(sigma, Rule::Alpha, 0);
                    for part in parts {
                        self.emit(Some(ob), t, &[(sigma, node)], &[(sigma, part)])?;
                        if !self.obs[ob].expanded {
                            break;
                        }
                    }
                }
                Category::Beta(mut parts) => {
                    dedup_in_order(&mut parts);
                    let imps: Vec<_> = parts.into_iter().map(|p| (sigma, p)).collect();
                    let t = self.trace(sigma, Rule::Beta, 0);
                    self.emit(Some(ob), t, &[(sigma, node)], &imps)?;
                }
                _ => unreachable!("only alpha/beta obligations are queued"),
            }
        }

        let mut modalities: Vec<u32> = self.work[sigma.index()]
            .pis
            .iter()
            .chain(&self.work[sigma.index()].nus)
            .map(|&ob| match self.obs[ob].cat {
                Category::Pi(r, _) | Category::Nu(r, _) => r,
                _ => unreachable!(),
            })
            .collect();
        modalities.sort_unstable();
        modalities.dedup();

        // pi: proper successors first, then the "some successor" formulas
        for &r in &modalities {
            let pis = self.pis_of(sigma, r);
            for &ob in &pis {
                let Category::Pi(_, body) = self.obs[ob].cat else { unreachable!() };
                if matches!(self.store.node(body), Node::True) || !self.alive(ob) || self.obs[ob].expanded {
                    continue;
                }
                let child = match self.obs[ob].child {
                    Some(c) => c,
                    None => self.new_child(sigma, ob)?,
                };
                self.obs[ob].child = Some(child);
                self.obs[ob].expanded = true;
                self.pi_records.push((sigma, ob));
                let node = self.obs[ob].node;
                let t = self.trace(sigma, Rule::Pi, r);
                self.emit(Some(ob), t, &[(sigma, node)], &[(child, body)])?;
            }
            for &ob in &pis {
                let Category::Pi(_, body) = self.obs[ob].cat else { unreachable!() };
                if !matches!(self.store.node(body), Node::True) || !self.alive(ob) || self.obs[ob].expanded {
                    continue;
                }
                let reuse = pis
                    .iter()
                    .copied()
                    .find(|&o| o != ob && self.obs[o].expanded && self.alive(o) && self.obs[o].child.is_some());
                let child = match reuse {
                    Some(o) => self.obs[o].child.expect("checked"),
                    None => match self.obs[ob].child {
                        Some(c) => c,
                        None => self.new_child(sigma, ob)?,
                    },
                };
                self.obs[ob].child = Some(child);
                self.obs[ob].expanded = true;
                self.pi_records.push((sigma, ob));
            }
        }

        // nu
        for &r in &modalities {
            let nus: Vec<ObId> = self.work[sigma.index()]
                .nus
                .iter()
                .copied()
                .filter(|&ob| matches!(self.obs[ob].cat, Category::Nu(q, _) if q == r))
                .collect();
            let pis = self.pis_of(sigma, r);
            for ob in nus {
                if !self.alive(ob) || self.obs[ob].expanded {
                    continue;
                }
                self.obs[ob].expanded = true;
                let Category::Nu(_, body) = self.obs[ob].cat else { unreachable!() };
                let node = self.obs[ob].node;
                for &pi in &pis {
                    if !self.obs[ob].expanded {
                        break;
                    }
                    if !self.obs[pi].expanded || !self.alive(pi) {
                        continue;
                    }
                    let child = self.obs[pi].child.expect("expanded pi has a successor");
                    let pi_node = self.obs[pi].node;
                    let t = self.trace(sigma, Rule::Nu, r);
                    self.emit(Some(ob), t, &[(sigma, node), (sigma, pi_node)], &[(child, body)])?;
                }
            }
        }
        Ok(())
    }

    fn pis_of(&self, sigma: LabelId, r: u32) -> Vec<ObId> {
        self.work[sigma.index()]
            .pis
            .iter()
            .copied()
            .filter(|&ob| matches!(self.obs[ob].cat, Category::Pi(q, _) if q == r))
            .collect()
    }

    fn new_child(&mut self, sigma: LabelId, pi: ObId) -> Result<LabelId, Abort> {
        if self.labels.len() >= self.opts.max_labels {
            return Err(EncodeError::Budget { what: "labels", limit: self.opts.max_labels }.into());
        }
        let Category::Pi(r, _) = self.obs[pi].cat else { unreachable!() };
        let child = self.labels.push_child(sigma, self.obs[pi].pi_index, r);
        self.work.push(LabelWork::default());
        Ok(child)
    }

    fn run_plr(&mut self) {
        while let Some(v) = self.touched.pop() {
            let vi = v as usize;
            if self.value[vi] != 0 || v == self.root_var {
                continue;
            }
            let label = self.vars[vi - 1].0;
            if !self.work[label.index()].finalized {
                continue;
            }
            let lit = match (self.pos[vi], self.neg[vi]) {
                (p, 0) if p > 0 => v as i32,
                (0, n) if n > 0 => -(v as i32),
                _ => continue,
            };
            self.value[vi] = if lit > 0 { 1 } else { -1 };
            self.by_plr[vi] = true;
            let mut i = 0;
            while i < self.occ[vi].len() {
                let cid = self.occ[vi][i];
                i += 1;
                if self.clauses[cid].state == ClauseState::Live {
                    self.satisfy(cid);
                    self.stats.dropped_by_plr += 1;
                }
            }
        }
    }

    fn finish(mut self) -> EncodeResult {
        let mut clauses = Vec::new();
        let mut trace = Vec::new();
        for v in 1..self.value.len() {
            if self.value[v] != 0 && !self.by_plr[v] {
                clauses.push(vec![if self.value[v] > 0 { v as i32 } else { -(v as i32) }]);
                let t = self.trace(self.vars[v - 1].0, Rule::Unit, 0);
                trace.push(t);
            }
        }
        for (c, t) in self.clauses.iter().zip(&self.trace) {
            if c.state == ClauseState::Live {
                debug_assert!(c.lits.iter().all(|&l| self.lit_value(l) != 1));
                clauses.push(c.lits.iter().copied().filter(|&l| self.lit_value(l) == 0).collect());
                trace.push(*t);
            }
        }
        let fixed = (1..self.value.len())
            .filter(|&v| self.by_plr[v])
            .map(|v| if self.value[v] > 0 { v as i32 } else { -(v as i32) })
            .collect();
        let pi_edges = self
            .pi_records
            .iter()
            .map(|&(parent, ob)| {
                let o = &self.obs[ob];
                let head = match self.key(parent, o.node) {
                    Key::Var { label, node, positive } => {
                        self.varmap.get(&(label, node)).map(|&v| if positive { v as i32 } else { -(v as i32) })
                    }
                    Key::Const(_) => None,
                };
                let Category::Pi(r, _) = o.cat else { unreachable!() };
                PiEdge {
                    parent,
                    child: o.child.expect("expanded"),
                    modality: r,
                    pi: o.node,
                    head,
                    live: o.expanded && o.demand > 0,
                }
            })
            .collect();
        let cnf = CnfFormula { num_vars: self.vars.len() as u32, clauses };
        self.stats.labels = self.labels.len();
        self.stats.vars = self.vars.len();
        self.stats.clauses = cnf.clauses.len();
        self.stats.defs_skipped = self.obs.iter().filter(|o| !o.expanded).count();
        EncodeResult {
            cnf,
            root_var: Some(self.root_var),
            stats: self.stats,
            trivial: None,
            labels: self.labels,
            vars: self.vars,
            fixed,
            pi_edges,
            trace,
            varmap: self.varmap,
        }
    }
}

fn dedup_in_order(v: &mut Vec<NodeId>) {
    let mut seen = std::collections::HashSet::new();
    v.retain(|x| seen.insert(*x));
}

#[cfg(test)]
mod tests;
