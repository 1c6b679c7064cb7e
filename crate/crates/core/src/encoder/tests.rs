use super::*;
use crate::formula::parse;
use crate::satsolver::{solve, SolveResult};

const PHI_BNF: &str = "(& (| (~ (box 1 (~ p1))) (~ (box 1 (& (~ p2) (~ p3))))) \
                       (box 1 (~ p1)) (box 1 (~ p2)) (box 1 (~ p3)))";
const PHI_47: &str = "(& (| (~ p1) (~ (box 1 p2))) (| p1 (~ (box 1 false))) (| (~ p1) p3) \
                      (| (~ p1) (~ p3)) (| p1 (box 1 (~ p4))) (box 1 p4))";

fn enc(text: &str, plr: bool, bcp: bool) -> (FormulaStore, EncodeResult) {
    let mut s = FormulaStore::new();
    let f = parse(&mut s, text).unwrap();
    let r = encode(&mut s, f, &EncodeOptions { plr, bcp, ..Default::default() }).unwrap();
    (s, r)
}

fn label_named(r: &EncodeResult, name: &str) -> Option<LabelId> {
    r.labels.ids().find(|&l| r.labels.display(l) == name)
}

#[test]
fn bnf_example_clause_set() {
    let (_, r) = enc(PHI_BNF, false, false);
    // 1 = phi, 2 = the disjunction, 3..5 = box ~p1..~p3, 6 = box (~p2 & ~p3),
    // 7 = p1@1.1, 8 = (~p2 & ~p3)@1.2, 9..11 = p1..p3@1.1, 12.. = p1..p3@1.2
    let expected = CnfFormula::new(
        16,
        vec![
            vec![1],
            vec![-1, 2],
            vec![-1, 3],
            vec![-1, 4],
            vec![-1, 5],
            vec![-2, -3, -6],
            vec![3, 7],
            vec![6, -8],
            vec![-4, 3, -9],
            vec![-5, 3, -10],
            vec![-3, 6, -11],
            vec![-4, 6, -12],
            vec![-5, 6, -13],
            vec![8, 12, 13],
        ],
    );
    assert_eq!(r.cnf.num_clauses(), 14);
    assert!(r.cnf.is_isomorphic(&expected), "{:?}", r.cnf.clauses);
    assert_eq!(r.stats.labels, 3);
    assert!(label_named(&r, "1.1").is_some() && label_named(&r, "1.2").is_some());
    assert_eq!(solve(&r.cnf), SolveResult::Unsat);
}

#[test]
fn bcp_finds_bnf_example_trivially_unsat() {
    let (_, r) = enc(PHI_BNF, false, true);
    assert_eq!(r.trivial, Some(Trivial::Unsat));
    assert!(r.cnf.is_contradiction_sentinel());
    assert_eq!(r.root_var, None);
    assert!(label_named(&r, "1.1").is_none());
    assert!(label_named(&r, "1.2").is_some());
}

#[test]
fn plr_drops_clauses_of_pure_atoms() {
    let (s, r) = enc(PHI_BNF, true, false);
    let l11 = label_named(&r, "1.1").unwrap();
    let l12 = label_named(&r, "1.2").unwrap();
    let mut s = s;
    let fixed_false = |l, a: u32, s: &mut FormulaStore| {
        let v = r.var_of(l, s.atom(a)).unwrap() as i32;
        r.fixed.contains(&-v)
    };
    assert!(fixed_false(l11, 2, &mut s));
    assert!(fixed_false(l11, 3, &mut s));
    assert!(fixed_false(l12, 1, &mut s));
    assert!(r.stats.dropped_by_plr >= 3);
    assert_eq!(solve(&r.cnf), SolveResult::Unsat);
}

#[test]
fn not_box_false_reuses_existing_successor() {
    let (_, r) = enc(PHI_47, false, false);
    assert_eq!(r.stats.labels, 2);
    // root, 6 alpha, 5 beta, one pi, nu for two boxes against two pis
    assert_eq!(r.cnf.num_clauses(), 17);
    assert_eq!(r.trace.iter().filter(|t| t.rule == Rule::Pi).count(), 1);
    assert_eq!(r.trace.iter().filter(|t| t.rule == Rule::Nu).count(), 4);
    assert_eq!(r.pi_edges.len(), 2);
    assert!(r.pi_edges.iter().all(|e| e.child == r.pi_edges[0].child));
    assert_eq!(solve(&r.cnf), SolveResult::Unsat);
}

#[test]
fn lone_not_box_false_gets_its_own_label() {
    let (_, r) = enc("(~ (box 1 false))", false, false);
    assert_eq!(r.stats.labels, 2);
    assert_eq!(r.cnf.clauses, vec![vec![-1]]);
    let (_, r) = enc("(& (~ (box 2 false)) (box 2 p1) (box 2 (~ p1)))", false, false);
    assert_eq!(r.labels.display(LabelId(1)), "1.1^2");
    assert_eq!(solve(&r.cnf), SolveResult::Unsat);
}

#[test]
fn constant_roots() {
    let (_, r) = enc("true", true, true);
    assert_eq!(r.cnf.num_clauses(), 0);
    assert_eq!(r.root_var, None);
    assert_eq!(r.trivial, None);
    let (_, r) = enc("false", false, false);
    assert!(r.cnf.is_contradiction_sentinel());
    assert_eq!(r.trivial, Some(Trivial::Unsat));
}

#[test]
fn propositional_contradiction() {
    let (_, r) = enc("(& p1 (~ p1))", false, true);
    assert_eq!(r.trivial, Some(Trivial::Unsat));
    let (_, r) = enc("(& p1 (~ p1))", false, false);
    assert_eq!(r.trivial, None);
    assert_eq!(solve(&r.cnf), SolveResult::Unsat);
}

#[test]
fn valid_clauses_are_not_emitted() {
    // box p1 against the pi ~box p1 gives (A & ~A) -> ..., which is valid
    let (_, r) = enc("(& (box 1 p1) (~ (box 1 p1)))", false, false);
    assert_eq!(r.trace.iter().filter(|t| t.rule == Rule::Nu).count(), 0);
    assert!(r.stats.valid_dropped >= 1);
}

#[test]
fn sidecar_lines() {
    let (mut s, r) = enc("(& p1 (~ (box 1 p2)))", false, false);
    let p2 = s.atom(2);
    let text = r.sidecar(&s);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), r.vars.len());
    assert!(lines[0].starts_with("1 1 (&"));
    assert!(lines.iter().any(|l| *l == format!("{} 1.1 p2", r.var_of(LabelId(1), p2).unwrap())));
}

#[test]
fn budget_is_reported() {
    let mut s = FormulaStore::new();
    let f = parse(&mut s, PHI_BNF).unwrap();
    let opts = EncodeOptions { max_labels: 2, ..Default::default() };
    assert_eq!(encode(&mut s, f, &opts).unwrap_err(), EncodeError::Budget { what: "labels", limit: 2 });
    let opts = EncodeOptions { max_clauses: 3, ..Default::default() };
    assert!(matches!(encode(&mut s, f, &opts), Err(EncodeError::Budget { what: "clauses", .. })));
}

#[test]
fn trace_describes_output_clauses() {
    for text in [PHI_BNF, PHI_47, "false", "(& p1 (~ p1))"] {
        for (plr, bcp) in [(false, false), (true, false), (false, true), (true, true)] {
            let (_, r) = enc(text, plr, bcp);
            assert_eq!(r.trace.len(), r.cnf.num_clauses(), "{text} plr={plr} bcp={bcp}");
        }
    }
    // twelve expansion steps, one of them a valid clause
    let (_, r) = enc(PHI_BNF, false, false);
    let groups: std::collections::HashSet<u32> = r.trace.iter().map(|t| t.group).collect();
    assert_eq!(groups.len(), 11);
    assert_eq!(r.trace.iter().filter(|t| t.rule == Rule::Alpha).count(), 4);
}
