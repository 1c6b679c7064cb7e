//! Normal forms and the preprocessing rewrites applied before encoding.

use super::{FormulaStore, Node, NodeId};
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Form {
    /// Box normal form: only box, negated box, and/or, literals.
    #[default]
    Bnf,
    /// Negative normal form: negation only on atoms.
    Nnf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LiftMode {
    #[default]
    NoLift,
    Lift,
    /// Lift only boxes that are not shared in the DAG.
    CtrlLift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PreprocessOptions {
    pub format: Form,
    pub lift: LiftMode,
    /// Boolean simplification; on by default, switched off only to inspect
    /// raw encodings.
    pub simplify: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self { format: Form::Bnf, lift: LiftMode::NoLift, simplify: true }
    }
}

fn kind_rank(node: &Node) -> u8 {
    match node {
        Node::True => 0,
        Node::False => 1,
        Node::Atom(_) => 2,
        Node::Not(_) => 3,
        Node::Box(..) => 4,
        Node::Dia(..) => 5,
        Node::And(_) => 6,
        Node::Or(_) => 7,
    }
}

impl FormulaStore {
    /// Canonical order used to sort the children of and/or nodes.
    pub fn canonical_cmp(&self, a: NodeId, b: NodeId) -> Ordering {
        let (na, nb) = (self.node(a), self.node(b));
        let modality = |n: &Node| match n {
            Node::Box(r, _) | Node::Dia(r, _) => *r,
            _ => 0,
        };
        let atom = |n: &Node| match n {
            Node::Atom(k) => *k,
            _ => 0,
        };
        kind_rank(na)
            .cmp(&kind_rank(nb))
            .then(modality(na).cmp(&modality(nb)))
            .then(atom(na).cmp(&atom(nb)))
            .then_with(|| self.children(a).cmp(self.children(b)))
    }

    /// The representation of `~f` in the given formalism.
    ///
    /// Pushes the negation one level through and/or and (in NNF) through
    /// the modal operators; an involution on every node.
    pub fn negate(&mut self, f: NodeId, form: Form) -> NodeId {
        match self.node(f).clone() {
            Node::True => self.bottom(),
            Node::False => self.top(),
            Node::Atom(_) => self.not(f),
            Node::Not(g) => g,
            Node::And(cs) => {
                let neg: Vec<_> = cs.into_iter().map(|c| self.negate(c, form)).collect();
                self.or(neg)
            }
            Node::Or(cs) => {
                let neg: Vec<_> = cs.into_iter().map(|c| self.negate(c, form)).collect();
                self.and(neg)
            }
            Node::Box(r, g) => match form {
                Form::Bnf => self.not(f),
                Form::Nnf => {
                    let ng = self.negate(g, form);
                    self.dia(r, ng)
                }
            },
            Node::Dia(r, g) => match form {
                Form::Bnf => self.not(f),
                Form::Nnf => {
                    let ng = self.negate(g, form);
                    self.boxed(r, ng)
                }
            },
        }
    }

    pub fn to_nnf(&mut self, f: NodeId) -> NodeId {
        let mut memo = HashMap::new();
        self.convert(f, true, Form::Nnf, &mut memo)
    }

    pub fn to_bnf(&mut self, f: NodeId) -> NodeId {
        let mut memo = HashMap::new();
        self.convert(f, true, Form::Bnf, &mut memo)
    }

    pub fn to_form(&mut self, f: NodeId, form: Form) -> NodeId {
        match form {
            Form::Bnf => self.to_bnf(f),
            Form::Nnf => self.to_nnf(f),
        }
    }

    /// Converts `f` (if `positive`) or `~f` into the target form.
    fn convert(&mut self, f: NodeId, positive: bool, form: Form, memo: &mut HashMap<(NodeId, bool), NodeId>) -> NodeId {
        if let Some(&g) = memo.get(&(f, positive)) {
            return g;
        }
        let out = match (self.node(f).clone(), positive) {
            (Node::True, p) | (Node::False, p) if p => f,
            (Node::True, _) => self.bottom(),
            (Node::False, _) => self.top(),
            (Node::Atom(_), true) => f,
            (Node::Atom(_), false) => self.not(f),
            (Node::Not(g), p) => self.convert(g, !p, form, memo),
            (Node::And(cs), p) | (Node::Or(cs), p) => {
                let conj = matches!(self.node(f), Node::And(_)) == p;
                let parts: Vec<_> = cs.into_iter().map(|c| self.convert(c, p, form, memo)).collect();
                if conj {
                    self.and(parts)
                } else {
                    self.or(parts)
                }
            }
            (Node::Box(r, g), true) => {
                let b = self.convert(g, true, form, memo);
                self.boxed(r, b)
            }
            (Node::Box(r, g), false) => match form {
                Form::Bnf => {
                    let b = self.convert(g, true, form, memo);
                    let bx = self.boxed(r, b);
                    self.not(bx)
                }
                Form::Nnf => {
                    let b = self.convert(g, false, form, memo);
                    self.dia(r, b)
                }
            },
            (Node::Dia(r, g), true) => match form {
                Form::Bnf => {
                    let b = self.convert(g, false, form, memo);
                    let bx = self.boxed(r, b);
                    self.not(bx)
                }
                Form::Nnf => {
                    let b = self.convert(g, true, form, memo);
                    self.dia(r, b)
                }
            },
            (Node::Dia(r, g), false) => {
                let b = self.convert(g, false, form, memo);
                self.boxed(r, b)
            }
        };
        memo.insert((f, positive), out);
        out
    }

    /// Flattens nested and/or, removes duplicate children and sorts them in
    /// the canonical order.
    pub fn normalize_atoms(&mut self, f: NodeId) -> NodeId {
        let mut memo = HashMap::new();
        self.normalize_memo(f, &mut memo)
    }

    fn normalize_memo(&mut self, f: NodeId, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        if let Some(&g) = memo.get(&f) {
            return g;
        }
        let out = match self.node(f).clone() {
            Node::True | Node::False | Node::Atom(_) => f,
            Node::Not(g) => {
                let g = self.normalize_memo(g, memo);
                self.not(g)
            }
            Node::Box(r, g) => {
                let g = self.normalize_memo(g, memo);
                self.boxed(r, g)
            }
            Node::Dia(r, g) => {
                let g = self.normalize_memo(g, memo);
                self.dia(r, g)
            }
            Node::And(cs) | Node::Or(cs) => {
                let conj = matches!(self.node(f), Node::And(_));
                let normalized: Vec<_> = cs.into_iter().map(|c| self.normalize_memo(c, memo)).collect();
                self.build_flat(normalized, conj)
            }
        };
        memo.insert(f, out);
        out
    }

    /// Builds a flattened, deduplicated, canonically sorted junction from
    /// already normalized children.
    fn build_flat(&mut self, children: Vec<NodeId>, conj: bool) -> NodeId {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match self.node(c) {
                Node::And(gs) if conj => flat.extend_from_slice(gs),
                Node::Or(gs) if !conj => flat.extend_from_slice(gs),
                _ => flat.push(c),
            }
        }
        let mut seen = HashSet::new();
        flat.retain(|c| seen.insert(*c));
        flat.sort_by(|&a, &b| self.canonical_cmp(a, b));
        if conj {
            self.and(flat)
        } else {
            self.or(flat)
        }
    }

    /// Number of occurrences of every node in the tree unfolding of `root`,
    /// saturating at 2.
    fn occurrence_counts(&self, root: NodeId) -> HashMap<NodeId, u8> {
        let order = self.reachable(root);
        let mut count: HashMap<NodeId, u8> = HashMap::new();
        count.insert(root, 1);
        // parents have larger ids than their children
        for &f in order.iter().rev() {
            let k = count.get(&f).copied().unwrap_or(0);
            for &c in self.children(f) {
                let e = count.entry(c).or_insert(0);
                *e = (*e).saturating_add(k).min(2);
            }
        }
        count
    }

    /// Applies the box lifting rules bottom-up.
    ///
    /// On NNF input the disjunctive rule takes its diamond shape,
    /// `dia a | dia b => dia (a | b)`.
    pub fn box_lift(&mut self, f: NodeId, mode: LiftMode) -> NodeId {
        if mode == LiftMode::NoLift {
            return f;
        }
        let f = self.normalize_atoms(f);
        let shared = match mode {
            LiftMode::CtrlLift => self.occurrence_counts(f),
            _ => HashMap::new(),
        };
        let mut memo = HashMap::new();
        self.lift_memo(f, &shared, &mut memo)
    }

    fn lift_memo(&mut self, f: NodeId, shared: &HashMap<NodeId, u8>, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        if let Some(&g) = memo.get(&f) {
            return g;
        }
        let out = match self.node(f).clone() {
            Node::True | Node::False | Node::Atom(_) => f,
            Node::Not(g) => {
                let g = self.lift_memo(g, shared, memo);
                self.not(g)
            }
            Node::Box(r, g) => {
                let g = self.lift_memo(g, shared, memo);
                self.boxed(r, g)
            }
            Node::Dia(r, g) => {
                let g = self.lift_memo(g, shared, memo);
                self.dia(r, g)
            }
            Node::And(cs) | Node::Or(cs) => {
                let conj = matches!(self.node(f), Node::And(_));
                let lifted: Vec<_> = cs.into_iter().map(|c| self.lift_memo(c, shared, memo)).collect();
                let unshared = |id: NodeId| shared.get(&id).copied().unwrap_or(0) < 2;
                // box children of an and; negated box (or diamond) children of an or
                let mut groups: Vec<((u32, bool), Vec<NodeId>)> = Vec::new();
                let mut rest = Vec::new();
                for c in lifted {
                    let candidate = match (self.node(c), conj) {
                        (Node::Box(r, body), true) if unshared(c) => Some(((*r, false), *body)),
                        (Node::Dia(r, body), false) if unshared(c) => Some(((*r, true), *body)),
                        (Node::Not(b), false) => match self.node(*b) {
                            Node::Box(r, body) if unshared(*b) && unshared(c) => Some(((*r, false), *body)),
                            _ => None,
                        },
                        _ => None,
                    };
                    match candidate {
                        Some((key, body)) => match groups.iter_mut().find(|(k, _)| *k == key) {
                            Some((_, bodies)) => bodies.push(body),
                            None => groups.push((key, vec![body])),
                        },
                        None => rest.push(c),
                    }
                }
                for ((r, diamond), bodies) in groups {
                    let merged = if bodies.len() == 1 {
                        bodies[0]
                    } else {
                        // boxes merge their bodies conjunctively, diamonds disjunctively
                        let body = self.build_flat(bodies, !diamond);
                        self.lift_memo(body, shared, memo)
                    };
                    rest.push(match (conj, diamond) {
                        (true, _) => self.boxed(r, merged),
                        (false, true) => self.dia(r, merged),
                        (false, false) => {
                            let bx = self.boxed(r, merged);
                            self.not(bx)
                        }
                    });
                }
                self.build_flat(rest, conj)
            }
        };
        memo.insert(f, out);
        out
    }

    /// Boolean simplification to a fixpoint.
    pub fn simplify(&mut self, f: NodeId) -> NodeId {
        let mut cur = f;
        loop {
            let mut memo = HashMap::new();
            let next = self.simplify_memo(cur, &mut memo);
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    fn lookup_not(&self, f: NodeId) -> Option<NodeId> {
        match self.node(f) {
            Node::Not(g) => Some(*g),
            _ => self.index.get(&Node::Not(f)).copied(),
        }
    }

    fn simplify_memo(&mut self, f: NodeId, memo: &mut HashMap<NodeId, NodeId>) -> NodeId {
        if let Some(&g) = memo.get(&f) {
            return g;
        }
        let out = match self.node(f).clone() {
            Node::True | Node::False | Node::Atom(_) => f,
            Node::Not(g) => {
                let g = self.simplify_memo(g, memo);
                self.not(g)
            }
            Node::Box(r, g) => {
                let g = self.simplify_memo(g, memo);
                if matches!(self.node(g), Node::True) {
                    g
                } else {
                    self.boxed(r, g)
                }
            }
            Node::Dia(r, g) => {
                let g = self.simplify_memo(g, memo);
                if matches!(self.node(g), Node::False) {
                    g
                } else {
                    self.dia(r, g)
                }
            }
            Node::And(cs) | Node::Or(cs) => {
                let conj = matches!(self.node(f), Node::And(_));
                let simplified: Vec<_> = cs.into_iter().map(|c| self.simplify_memo(c, memo)).collect();
                self.simplify_junction(simplified, conj)
            }
        };
        memo.insert(f, out);
        out
    }

    fn simplify_junction(&mut self, children: Vec<NodeId>, conj: bool) -> NodeId {
        let absorbing = self.constant(!conj);
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match self.node(c) {
                Node::And(gs) if conj => flat.extend_from_slice(gs),
                Node::Or(gs) if !conj => flat.extend_from_slice(gs),
                _ => flat.push(c),
            }
        }
        let mut seen = HashSet::new();
        flat.retain(|c| seen.insert(*c));
        // complement: phi and ~phi side by side
        if flat.iter().any(|&c| self.lookup_not(c).is_some_and(|n| seen.contains(&n))) {
            return absorbing;
        }
        // absorption: phi1 & (phi1 | phi2) => phi1, and dually
        let mut kept = Vec::with_capacity(flat.len());
        for &c in &flat {
            let absorbed = match self.node(c) {
                Node::Or(gs) if conj => gs.iter().any(|g| seen.contains(g)),
                Node::And(gs) if !conj => gs.iter().any(|g| seen.contains(g)),
                _ => false,
            };
            if !absorbed {
                kept.push(c);
            }
        }
        if conj {
            self.and(kept)
        } else {
            self.or(kept)
        }
    }

    /// The full preprocessing pipeline applied before encoding.
    pub fn preprocess(&mut self, f: NodeId, opts: &PreprocessOptions) -> NodeId {
        let mut g = self.to_form(f, opts.format);
        g = self.normalize_atoms(g);
        if opts.simplify {
            g = self.simplify(g);
            g = self.normalize_atoms(g);
        }
        if opts.lift != LiftMode::NoLift {
            g = self.box_lift(g, opts.lift);
            g = self.normalize_atoms(g);
            if opts.simplify {
                g = self.simplify(g);
                g = self.normalize_atoms(g);
            }
        }
        g
    }

    /// True iff `f` satisfies the structural invariant of `form`.
    pub fn is_in_form(&self, f: NodeId, form: Form) -> bool {
        self.reachable(f).into_iter().all(|g| match (self.node(g), form) {
            (Node::Dia(..), Form::Bnf) => false,
            (Node::Not(h), Form::Bnf) => matches!(self.node(*h), Node::Atom(_) | Node::Box(..)),
            (Node::Not(h), Form::Nnf) => matches!(self.node(*h), Node::Atom(_)),
            _ => true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    const PHI_NNF: &str = "(& (| (dia 1 p1) (dia 1 (| p2 p3))) (box 1 (~ p1)) (box 1 (~ p2)) (box 1 (~ p3)))";
    const PHI_BNF: &str = "(& (| (~ (box 1 (~ p1))) (~ (box 1 (& (~ p2) (~ p3))))) \
                           (box 1 (~ p1)) (box 1 (~ p2)) (box 1 (~ p3)))";

    fn p(s: &mut FormulaStore, text: &str) -> NodeId {
        parse(s, text).unwrap()
    }

    #[test]
    fn negate_dualizes_per_form() {
        let mut s = FormulaStore::new();
        let a1 = p(&mut s, "p1");
        let na1 = p(&mut s, "(~ p1)");
        assert_eq!(s.negate(a1, Form::Bnf), na1);
        let b = p(&mut s, "(box 1 p1)");
        let nb = p(&mut s, "(~ (box 1 p1))");
        assert_eq!(s.negate(b, Form::Bnf), nb);
        let conj = p(&mut s, "(& p1 p2)");
        let disj = p(&mut s, "(| (~ p1) (~ p2))");
        assert_eq!(s.negate(conj, Form::Bnf), disj);
        let d = p(&mut s, "(dia 1 (~ p1))");
        assert_eq!(s.negate(b, Form::Nnf), d);
        assert_eq!(s.negate(d, Form::Nnf), b);
    }

    #[test]
    fn nnf_examples() {
        let mut s = FormulaStore::new();
        let f = p(&mut s, "(~ (box 1 p1))");
        let g = p(&mut s, "(dia 1 (~ p1))");
        assert_eq!(s.to_nnf(f), g);
        let f = p(&mut s, "(~ (& p1 (dia 1 p2)))");
        let g = p(&mut s, "(| (~ p1) (box 1 (~ p2)))");
        assert_eq!(s.to_nnf(f), g);
        assert!(s.is_in_form(g, Form::Nnf));
    }

    #[test]
    fn bnf_examples() {
        let mut s = FormulaStore::new();
        let f = p(&mut s, "(dia 1 p1)");
        let g = p(&mut s, "(~ (box 1 (~ p1)))");
        assert_eq!(s.to_bnf(f), g);
        let nnf = p(&mut s, PHI_NNF);
        let bnf = p(&mut s, PHI_BNF);
        assert_eq!(s.to_bnf(nnf), bnf);
        let b = p(&mut s, "(box 1 p1)");
        assert_eq!(s.to_bnf(b), b);
    }

    #[test]
    fn normalization_examples() {
        let mut s = FormulaStore::new();
        let a = p(&mut s, "(box 1 (| p2 p1))");
        let b = p(&mut s, "(box 1 (| p1 p2))");
        assert_eq!(s.normalize_atoms(a), s.normalize_atoms(b));
        let c = p(&mut s, "(box 1 (| p1 (| p2 p3)))");
        let d = p(&mut s, "(box 1 (| p1 p2 p3))");
        assert_eq!(s.normalize_atoms(c), d);
    }

    #[test]
    fn lifting_examples() {
        let mut s = FormulaStore::new();
        let bnf = p(&mut s, PHI_BNF);
        let lifted = s.box_lift(bnf, LiftMode::Lift);
        let want = p(&mut s, "(& (~ (box 1 (& (~ p1) (~ p2) (~ p3)))) (box 1 (& (~ p1) (~ p2) (~ p3))))");
        assert_eq!(lifted, s.normalize_atoms(want));

        let ctrl = s.box_lift(bnf, LiftMode::CtrlLift);
        let want = p(
            &mut s,
            "(& (| (~ (box 1 (~ p1))) (~ (box 1 (& (~ p2) (~ p3))))) (box 1 (~ p1)) (box 1 (& (~ p2) (~ p3))))",
        );
        assert_eq!(ctrl, s.normalize_atoms(want));

        let plain = p(&mut s, "(& p1 p2)");
        assert_eq!(s.box_lift(plain, LiftMode::Lift), plain);
    }

    #[test]
    fn lifting_reaches_nested_fixpoint() {
        let mut s = FormulaStore::new();
        let f = p(&mut s, "(& (box 1 (box 1 p1)) (box 1 (box 1 p2)) (box 2 p3))");
        let g = p(&mut s, "(& (box 1 (box 1 (& p1 p2))) (box 2 p3))");
        let lifted = s.box_lift(f, LiftMode::Lift);
        assert_eq!(lifted, s.normalize_atoms(g));
    }

    #[test]
    fn simplification_examples() {
        let mut s = FormulaStore::new();
        let f = p(&mut s, "(& (~ (box 1 (& (~ p1) (~ p2) (~ p3)))) (box 1 (& (~ p1) (~ p2) (~ p3))))");
        let bot = s.bottom();
        let top = s.top();
        assert_eq!(s.simplify(f), bot);
        let f = p(&mut s, "(box 2 true)");
        assert_eq!(s.simplify(f), top);
        let f = p(&mut s, "(| p1 false)");
        let a1 = s.atom(1);
        assert_eq!(s.simplify(f), a1);
        let f = p(&mut s, "(& p1 (| p1 p2))");
        assert_eq!(s.simplify(f), a1);
        let f = p(&mut s, "(| p1 (& p1 p2) (~ p3))");
        let g = p(&mut s, "(| p1 (~ p3))");
        assert_eq!(s.simplify(f), g);
        let f = p(&mut s, "(& p1 p1 p2)");
        let g = p(&mut s, "(& p1 p2)");
        assert_eq!(s.simplify(f), g);
        let f = p(&mut s, "(~ (box 1 (| p1 (~ p1))))");
        assert_eq!(s.simplify(f), bot);
    }

    #[test]
    fn preprocess_keeps_forms() {
        let mut s = FormulaStore::new();
        let f = p(&mut s, "(-> (dia 2 (& p1 (box 1 p2))) (~ (| p3 (dia 1 p1))))");
        for format in [Form::Bnf, Form::Nnf] {
            for lift in [LiftMode::NoLift, LiftMode::Lift, LiftMode::CtrlLift] {
                let g = s.preprocess(f, &PreprocessOptions { format, lift, simplify: true });
                assert!(s.is_in_form(g, format), "{format:?} {lift:?}");
            }
        }
    }
}
