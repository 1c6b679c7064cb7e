use super::SemanticsError;
use crate::formula::{FormulaStore, Node, NodeId};
use std::collections::HashMap;

pub const ORACLE_MAX_DEPTH: u32 = 3;
pub const ORACLE_MAX_MODAL_ATOMS: usize = 12;

/// Size guard of the oracle; the search is exponential in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_depth: u32,
    pub max_modal_atoms: usize,
}

impl OracleLimits {
    /// No guard; callers accept the exponential worst case.
    pub const NONE: OracleLimits = OracleLimits { max_depth: u32::MAX, max_modal_atoms: usize::MAX };
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_depth: ORACLE_MAX_DEPTH, max_modal_atoms: ORACLE_MAX_MODAL_ATOMS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Sat,
    Unsat,
}

/// Decides K_m satisfiability by a KSAT-style search.
///
/// At each state the signed formulas are treated as Boolean constraints over
/// the propositional atoms and the modal atoms (box and diamond nodes). A
/// small DPLL loop (three-valued early pruning plus unit forcing) looks for
/// a partial assignment making all of them true; the modal literals it
/// fixes are then checked by recursing on one successor per existential
/// literal, carrying every universal body of the same modality. A failing
/// successor yields a nogood over the modal literals involved, which is
/// valid at every state and is kept for the rest of the search. Shares
/// nothing with the encoder.
pub fn brute_force_oracle(store: &FormulaStore, f: NodeId) -> Result<OracleVerdict, SemanticsError> {
    brute_force_oracle_with(store, f, OracleLimits::default())
}

pub fn brute_force_oracle_with(
    store: &FormulaStore,
    f: NodeId,
    limits: OracleLimits,
) -> Result<OracleVerdict, SemanticsError> {
    let depth = store.depth(f);
    let modal_atoms =
        store.reachable(f).into_iter().filter(|&g| matches!(store.node(g), Node::Box(..) | Node::Dia(..))).count();
    if depth > limits.max_depth || modal_atoms > limits.max_modal_atoms {
        return Err(SemanticsError::Guard {
            depth,
            max_depth: limits.max_depth,
            modal_atoms,
            max_atoms: limits.max_modal_atoms,
        });
    }
    let mut t = Tableau { store, memo: HashMap::new(), nogoods: Vec::new() };
    Ok(if t.state_sat(vec![(f, true)]) { OracleVerdict::Sat } else { OracleVerdict::Unsat })
}

type Signed = (NodeId, bool);
type Assignment = HashMap<NodeId, bool>;

struct Tableau<'s> {
    store: &'s FormulaStore,
    memo: HashMap<Vec<Signed>, bool>,
    /// Clauses over modal atoms: at least one literal must hold.
    nogoods: Vec<Vec<Signed>>,
}

impl Tableau<'_> {
    fn state_sat(&mut self, mut todo: Vec<Signed>) -> bool {
        todo.sort_unstable();
        todo.dedup();
        if let Some(&v) = self.memo.get(&todo) {
            return v;
        }
        let v = self.search(&todo, Assignment::new());
        self.memo.insert(todo, v);
        v
    }

    fn is_var(&self, f: NodeId) -> bool {
        matches!(self.store.node(f), Node::Atom(_) | Node::Box(..) | Node::Dia(..))
    }

    fn eval(&self, f: NodeId, asg: &Assignment) -> Option<bool> {
        match self.store.node(f) {
            Node::True => Some(true),
            Node::False => Some(false),
            Node::Atom(_) | Node::Box(..) | Node::Dia(..) => asg.get(&f).copied(),
            Node::Not(g) => self.eval(*g, asg).map(|v| !v),
            Node::And(cs) | Node::Or(cs) => {
                let conj = matches!(self.store.node(f), Node::And(_));
                let mut open = false;
                for &c in cs {
                    match self.eval(c, asg) {
                        Some(v) if v != conj => return Some(!conj),
                        Some(_) => {}
                        None => open = true,
                    }
                }
                if open {
                    None
                } else {
                    Some(conj)
                }
            }
        }
    }

    /// Assigns what `f = sign` forces directly. Returns false on a clash.
    fn force(&self, f: NodeId, sign: bool, asg: &mut Assignment, changed: &mut bool) -> bool {
        if self.is_var(f) {
            return match asg.get(&f) {
                Some(&v) => v == sign,
                None => {
                    asg.insert(f, sign);
                    *changed = true;
                    true
                }
            };
        }
        match self.store.node(f) {
            Node::True => sign,
            Node::False => !sign,
            Node::Not(g) => self.force(*g, !sign, asg, changed),
            Node::And(cs) | Node::Or(cs) => {
                let conj = matches!(self.store.node(f), Node::And(_)) == sign;
                if conj {
                    return cs.iter().all(|&c| self.force(c, sign, asg, changed));
                }
                let mut open = None;
                for &c in cs {
                    match self.eval(c, asg) {
                        Some(v) if v == sign => return true,
                        Some(_) => {}
                        None if open.is_some() => return true,
                        None => open = Some(c),
                    }
                }
                match open {
                    Some(c) => self.force(c, sign, asg, changed),
                    None => false,
                }
            }
            Node::Atom(_) | Node::Box(..) | Node::Dia(..) => unreachable!(),
        }
    }

    fn first_open_var(&self, f: NodeId, asg: &Assignment) -> Option<NodeId> {
        if self.is_var(f) {
            return (!asg.contains_key(&f)).then_some(f);
        }
        self.store.children(f).iter().find_map(|&c| {
            if self.eval(c, asg).is_some() {
                None
            } else {
                self.first_open_var(c, asg)
            }
        })
    }

    fn search(&mut self, todo: &[Signed], mut asg: Assignment) -> bool {
        // propagate to fixpoint
        loop {
            let mut changed = false;
            for &(f, sign) in todo {
                if self.eval(f, &asg) == Some(!sign) || !self.force(f, sign, &mut asg, &mut changed) {
                    return false;
                }
            }
            for ng in &self.nogoods {
                let mut open = None;
                let mut satisfied = false;
                let mut open_count = 0;
                for &(v, want) in ng {
                    match asg.get(&v) {
                        Some(&x) if x == want => satisfied = true,
                        Some(_) => {}
                        None => {
                            open_count += 1;
                            open = Some((v, want));
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match (open_count, open) {
                    (0, _) => return false,
                    (1, Some((v, want))) => {
                        asg.insert(v, want);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
        let pending = todo.iter().find(|&&(f, _)| self.eval(f, &asg).is_none());
        if let Some(&(f, _)) = pending {
            let v = self.first_open_var(f, &asg).expect("an undetermined formula has an open variable");
            for value in [true, false] {
                let mut next = asg.clone();
                next.insert(v, value);
                if self.search(todo, next) {
                    return true;
                }
            }
            return false;
        }
        self.modal_check(&asg)
    }

    fn modal_check(&mut self, asg: &Assignment) -> bool {
        let mut exists = Vec::new();
        let mut forall = Vec::new();
        let mut keys: Vec<_> = asg.iter().map(|(&f, &v)| (f, v)).collect();
        keys.sort_unstable();
        for (f, v) in keys {
            match (self.store.node(f), v) {
                (Node::Box(r, g), false) => exists.push(((f, v), *r, (*g, false))),
                (Node::Dia(r, g), true) => exists.push(((f, v), *r, (*g, true))),
                (Node::Box(r, g), true) => forall.push(((f, v), *r, (*g, true))),
                (Node::Dia(r, g), false) => forall.push(((f, v), *r, (*g, false))),
                _ => {}
            }
        }
        for &(lit, r, body) in &exists {
            let same: Vec<_> = forall.iter().filter(|x| x.1 == r).collect();
            let mut succ = vec![body];
            succ.extend(same.iter().map(|x| x.2));
            if !self.state_sat(succ) {
                let mut nogood = vec![(lit.0, !lit.1)];
                nogood.extend(same.iter().map(|x| (x.0 .0, !x.0 .1)));
                self.nogoods.push(nogood);
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn verdict(text: &str) -> OracleVerdict {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, text).unwrap();
        brute_force_oracle(&s, f).unwrap()
    }

    #[test]
    fn worked_examples() {
        let nnf = "(& (| (dia 1 p1) (dia 1 (| p2 p3))) (box 1 (~ p1)) (box 1 (~ p2)) (box 1 (~ p3)))";
        assert_eq!(verdict(nnf), OracleVerdict::Unsat);
        let ex47 = "(& (| (~ p1) (~ (box 1 p2))) (| p1 (~ (box 1 false))) (| (~ p1) p3) \
                    (| (~ p1) (~ p3)) (| p1 (box 1 (~ p4))) (box 1 p4))";
        assert_eq!(verdict(ex47), OracleVerdict::Unsat);
        assert_eq!(verdict("(dia 1 true)"), OracleVerdict::Sat);
        assert_eq!(verdict("(& (dia 1 p1) (box 2 false))"), OracleVerdict::Sat);
        assert_eq!(verdict("(& (dia 1 p1) (box 1 (~ p1)))"), OracleVerdict::Unsat);
        assert_eq!(verdict("(box 1 (& p1 (~ p1)))"), OracleVerdict::Sat);
    }

    #[test]
    fn guard() {
        let mut s = FormulaStore::new();
        let f = parse(&mut s, "(box 1 (box 1 (box 1 (box 1 p1))))").unwrap();
        assert!(matches!(brute_force_oracle(&s, f), Err(SemanticsError::Guard { depth: 4, .. })));
    }
}
