//! K_m formulas as a hash-consed DAG.
//!
//! Every structurally distinct node is stored exactly once in a
//! [`FormulaStore`], so equal subformulas share one [`NodeId`]. The
//! constructors are "smart": double negations and the unit laws for
//! `true`/`false` are applied when a node is created, so shapes like
//! `Not(Not(x))` never exist in a store.

mod parse;
mod transform;

pub use parse::{parse, ParseError};
pub use transform::{Form, LiftMode, PreprocessOptions};

use std::collections::HashMap;
use std::fmt::Write as _;

/// Dense handle of a node inside a [`FormulaStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    False,
    /// Propositional atom `p<k>`, `k >= 1`.
    Atom(u32),
    Not(NodeId),
    /// n-ary conjunction, arity >= 2.
    And(Vec<NodeId>),
    /// n-ary disjunction, arity >= 2.
    Or(Vec<NodeId>),
    /// `box_r child`, `r >= 1`.
    Box(u32, NodeId),
    /// `dia_r child`, `r >= 1`.
    Dia(u32, NodeId),
}

/// Fitting's uniform classification of a (signed) formula.
///
/// Parts are node ids in the same store; negated parts are built with the
/// smart [`FormulaStore::not`] constructor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Category {
    Alpha(Vec<NodeId>),
    Beta(Vec<NodeId>),
    /// Existential formula of modality `r` with its body `pi_0`.
    Pi(u32, NodeId),
    /// Universal formula of modality `r` with its body `nu_0`.
    Nu(u32, NodeId),
    Literal,
    Constant(bool),
}

#[derive(Debug, Clone, Default)]
pub struct FormulaStore {
    nodes: Vec<Node>,
    index: HashMap<Node, NodeId>,
}

impl FormulaStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct nodes in the store.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = NodeId(u32::try_from(self.nodes.len()).expect("formula store overflow"));
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        id
    }

    pub fn top(&mut self) -> NodeId {
        self.intern(Node::True)
    }

    pub fn bottom(&mut self) -> NodeId {
        self.intern(Node::False)
    }

    pub fn constant(&mut self, value: bool) -> NodeId {
        if value {
            self.top()
        } else {
            self.bottom()
        }
    }

    pub fn atom(&mut self, index: u32) -> NodeId {
        assert!(index >= 1, "atom indices start at 1");
        self.intern(Node::Atom(index))
    }

    pub fn not(&mut self, f: NodeId) -> NodeId {
        match *self.node(f) {
            Node::Not(inner) => inner,
            Node::True => self.bottom(),
            Node::False => self.top(),
            _ => self.intern(Node::Not(f)),
        }
    }

    pub fn and(&mut self, children: impl IntoIterator<Item = NodeId>) -> NodeId {
        self.junction(children, true)
    }

    pub fn or(&mut self, children: impl IntoIterator<Item = NodeId>) -> NodeId {
        self.junction(children, false)
    }

    fn junction(&mut self, children: impl IntoIterator<Item = NodeId>, conj: bool) -> NodeId {
        // unit element for `and` is true, absorbing element is false; dually for `or`
        let mut kept = Vec::new();
        for c in children {
            match self.node(c) {
                Node::True if conj => {}
                Node::False if !conj => {}
                Node::False if conj => return self.bottom(),
                Node::True if !conj => return self.top(),
                _ => kept.push(c),
            }
        }
        match kept.len() {
            0 => self.constant(conj),
            1 => kept[0],
            _ if conj => self.intern(Node::And(kept)),
            _ => self.intern(Node::Or(kept)),
        }
    }

    pub fn boxed(&mut self, modality: u32, f: NodeId) -> NodeId {
        assert!(modality >= 1, "modalities start at 1");
        self.intern(Node::Box(modality, f))
    }

    pub fn dia(&mut self, modality: u32, f: NodeId) -> NodeId {
        assert!(modality >= 1, "modalities start at 1");
        self.intern(Node::Dia(modality, f))
    }

    /// `a -> b`, expanded to `~a | b`.
    pub fn implies(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let na = self.not(a);
        self.or([na, b])
    }

    /// `a <-> b`, expanded to `(~a | b) & (~b | a)`.
    pub fn iff(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let ab = self.implies(a, b);
        let ba = self.implies(b, a);
        self.and([ab, ba])
    }

    /// `box_r^n f`.
    pub fn box_power(&mut self, modality: u32, n: u32, f: NodeId) -> NodeId {
        (0..n).fold(f, |acc, _| self.boxed(modality, acc))
    }

    /// Classifies `f` into the alpha/beta/pi/nu table.
    ///
    /// Handles both normal forms (and mixed shapes): in BNF `~box_r psi` is
    /// a pi formula with body `~psi`, in NNF `dia_r psi` is one with body
    /// `psi`.
    pub fn classify(&mut self, f: NodeId) -> Category {
        match self.node(f).clone() {
            Node::True => Category::Constant(true),
            Node::False => Category::Constant(false),
            Node::Atom(_) => Category::Literal,
            Node::And(cs) => Category::Alpha(cs),
            Node::Or(cs) => Category::Beta(cs),
            Node::Box(r, g) => Category::Nu(r, g),
            Node::Dia(r, g) => Category::Pi(r, g),
            Node::Not(g) => match self.node(g).clone() {
                Node::Atom(_) => Category::Literal,
                Node::And(cs) => Category::Beta(cs.into_iter().map(|c| self.not(c)).collect()),
                Node::Or(cs) => Category::Alpha(cs.into_iter().map(|c| self.not(c)).collect()),
                Node::Box(r, h) => {
                    let body = self.not(h);
                    Category::Pi(r, body)
                }
                Node::Dia(r, h) => {
                    let body = self.not(h);
                    Category::Nu(r, body)
                }
                Node::True | Node::False | Node::Not(_) => {
                    unreachable!("smart constructors never build this negation")
                }
            },
        }
    }

    /// Modal nesting depth.
    pub fn depth(&self, f: NodeId) -> u32 {
        let mut memo = HashMap::new();
        self.depth_memo(f, &mut memo)
    }

    fn depth_memo(&self, f: NodeId, memo: &mut HashMap<NodeId, u32>) -> u32 {
        if let Some(&d) = memo.get(&f) {
            return d;
        }
        let d = match self.node(f) {
            Node::True | Node::False | Node::Atom(_) => 0,
            Node::Not(g) => self.depth_memo(*g, memo),
            Node::And(cs) | Node::Or(cs) => cs.iter().map(|&c| self.depth_memo(c, memo)).max().unwrap_or(0),
            Node::Box(_, g) | Node::Dia(_, g) => 1 + self.depth_memo(*g, memo),
        };
        memo.insert(f, d);
        d
    }

    pub fn children(&self, f: NodeId) -> &[NodeId] {
        match self.node(f) {
            Node::True | Node::False | Node::Atom(_) => &[],
            Node::Not(g) | Node::Box(_, g) | Node::Dia(_, g) => std::slice::from_ref(g),
            Node::And(cs) | Node::Or(cs) => cs,
        }
    }

    /// All nodes reachable from `root` (including it), children before parents.
    pub fn reachable(&self, root: NodeId) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![root];
        seen[root.index()] = true;
        let mut out = Vec::new();
        while let Some(f) = stack.pop() {
            out.push(f);
            for &c in self.children(f) {
                if !seen[c.index()] {
                    seen[c.index()] = true;
                    stack.push(c);
                }
            }
        }
        // ids are allocated after their children, so ascending id order is
        // a topological order
        out.sort_unstable();
        out
    }

    /// Number of distinct DAG nodes reachable from `root`.
    pub fn dag_size(&self, root: NodeId) -> usize {
        self.reachable(root).len()
    }

    /// Largest atom index occurring under `root` (0 if none).
    pub fn max_atom(&self, root: NodeId) -> u32 {
        self.reachable(root)
            .into_iter()
            .filter_map(|f| match self.node(f) {
                Node::Atom(k) => Some(*k),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Renders `f` in the s-expression grammar accepted by [`parse`].
    pub fn display(&self, f: NodeId) -> String {
        let mut out = String::new();
        self.write_sexpr(f, &mut out);
        out
    }

    fn write_sexpr(&self, f: NodeId, out: &mut String) {
        match self.node(f) {
            Node::True => out.push_str("true"),
            Node::False => out.push_str("false"),
            Node::Atom(k) => {
                let _ = write!(out, "p{k}");
            }
            Node::Not(g) => {
                out.push_str("(~ ");
                self.write_sexpr(*g, out);
                out.push(')');
            }
            Node::And(cs) | Node::Or(cs) => {
                out.push_str(if matches!(self.node(f), Node::And(_)) { "(&" } else { "(|" });
                for &c in cs {
                    out.push(' ');
                    self.write_sexpr(c, out);
                }
                out.push(')');
            }
            Node::Box(r, g) | Node::Dia(r, g) => {
                let op = if matches!(self.node(f), Node::Box(..)) { "box" } else { "dia" };
                let _ = write!(out, "({op} {r} ");
                self.write_sexpr(*g, out);
                out.push(')');
            }
        }
    }
}
