#![allow(dead_code)]

use kmsat::formula::{Form, FormulaStore, LiftMode, NodeId, PreprocessOptions};
use proptest::prelude::*;

#[derive(Debug, Clone)]
pub enum F {
    Top,
    Bot,
    Atom(u32),
    Not(Box<F>),
    And(Vec<F>),
    Or(Vec<F>),
    Box(u32, Box<F>),
    Dia(u32, Box<F>),
}

impl F {
    pub fn build(&self, s: &mut FormulaStore) -> NodeId {
        match self {
            F::Top => s.top(),
            F::Bot => s.bottom(),
            F::Atom(a) => s.atom(*a),
            F::Not(g) => {
                let g = g.build(s);
                s.not(g)
            }
            F::And(cs) => {
                let cs: Vec<_> = cs.iter().map(|c| c.build(s)).collect();
                s.and(cs)
            }
            F::Or(cs) => {
                let cs: Vec<_> = cs.iter().map(|c| c.build(s)).collect();
                s.or(cs)
            }
            F::Box(r, g) => {
                let g = g.build(s);
                s.boxed(*r, g)
            }
            F::Dia(r, g) => {
                let g = g.build(s);
                s.dia(*r, g)
            }
        }
    }
}

/// Random formula over `atoms` atoms and `modalities` modalities with
/// modal depth at most `md` and connective nesting at most `size`.
pub fn formula(atoms: u32, modalities: u32, md: u32, size: u32) -> BoxedStrategy<F> {
    let leaf = prop_oneof![
        8 => (1..=atoms).prop_map(F::Atom),
        1 => Just(F::Top),
        1 => Just(F::Bot),
    ]
    .boxed();
    if size == 0 {
        return leaf;
    }
    let sub = formula(atoms, modalities, md, size - 1);
    let mut options: Vec<(u32, BoxedStrategy<F>)> = vec![
        (2, leaf),
        (2, sub.clone().prop_map(|g| F::Not(Box::new(g))).boxed()),
        (3, prop::collection::vec(sub.clone(), 2..=3).prop_map(F::And).boxed()),
        (3, prop::collection::vec(sub, 2..=3).prop_map(F::Or).boxed()),
    ];
    if md > 0 {
        let inner = formula(atoms, modalities, md - 1, size - 1);
        options.push((3, (1..=modalities, inner.clone()).prop_map(|(r, g)| F::Box(r, Box::new(g))).boxed()));
        options.push((3, (1..=modalities, inner).prop_map(|(r, g)| F::Dia(r, Box::new(g))).boxed()));
    }
    prop::strategy::Union::new_weighted(options).boxed()
}

/// A conjunction of 2 to 6 random conjuncts, mixing sat and unsat cases.
pub fn small_formula() -> BoxedStrategy<F> {
    prop::collection::vec(formula(3, 2, 2, 3), 2..=6).prop_map(F::And).boxed()
}

pub fn preprocess_options() -> Vec<PreprocessOptions> {
    let mut out = Vec::new();
    for format in [Form::Bnf, Form::Nnf] {
        for lift in [LiftMode::NoLift, LiftMode::Lift, LiftMode::CtrlLift] {
            for simplify in [true, false] {
                out.push(PreprocessOptions { format, lift, simplify });
            }
        }
    }
    out
}

pub const PHI_NNF: &str = "(& (| (dia 1 p1) (dia 1 (| p2 p3))) (box 1 (~ p1)) (box 1 (~ p2)) (box 1 (~ p3)))";
pub const PHI_BNF: &str = "(& (| (~ (box 1 (~ p1))) (~ (box 1 (& (~ p2) (~ p3))))) \
                           (box 1 (~ p1)) (box 1 (~ p2)) (box 1 (~ p3)))";
pub const PHI_LIFT: &str = "(& (~ (box 1 (& (~ p1) (~ p2) (~ p3)))) (box 1 (& (~ p1) (~ p2) (~ p3))))";
pub const PHI_47: &str = "(& (| (~ p1) (~ (box 1 p2))) (| p1 (~ (box 1 false))) (| (~ p1) p3) \
                          (| (~ p1) (~ p3)) (| p1 (box 1 (~ p4))) (box 1 p4))";
