//! Benchmark generators: the Halpern-Moses branching formulas and random
//! box-CNF instances.
//!
//! Randomness comes from `ChaCha8Rng` seeded with a 64-bit value; suites
//! derive per-instance seeds with [`derive_seed`].

use crate::formula::{FormulaStore, NodeId};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchParams {
    pub h: u32,
}

/// Atom index of `D_i`, `0 <= i <= h + 1`.
pub fn d_atom(h: u32, i: u32) -> u32 {
    debug_assert!(i <= h + 1);
    i + 1
}

/// Atom index of `P_i`, `1 <= i <= h`.
pub fn p_atom(h: u32, i: u32) -> u32 {
    debug_assert!(i >= 1 && i <= h);
    h + 2 + i
}

/// The satisfiable branching formula of depth parameter `h`.
pub fn gen_branch_n(store: &mut FormulaStore, params: BranchParams) -> Result<NodeId, GenError> {
    let h = params.h;
    if h == 0 {
        return Err(GenError::InvalidParams("h must be at least 1".into()));
    }
    let d: Vec<NodeId> = (0..=h + 1).map(|i| store.atom(d_atom(h, i))).collect();
    // p[i - 1] is P_i
    let p: Vec<NodeId> = (1..=h).map(|i| store.atom(p_atom(h, i))).collect();

    let mut parts = Vec::new();
    for i in 1..=h as usize + 1 {
        parts.push(store.implies(d[i], d[i - 1]));
    }
    for i in 1..=h as usize {
        let np = store.not(p[i - 1]);
        let keep_true = store.implies(d[i], p[i - 1]);
        let keep_true = store.boxed(1, keep_true);
        let keep_false = store.implies(d[i], np);
        let keep_false = store.boxed(1, keep_false);
        let a = store.implies(p[i - 1], keep_true);
        let b = store.implies(np, keep_false);
        let both = store.and([a, b]);
        parts.push(store.implies(d[i], both));
    }
    for i in 0..h as usize {
        let guard_n = store.not(d[i + 1]);
        let guard = store.and([d[i], guard_n]);
        let next_n = store.not(d[i + 2]);
        let np = store.not(p[i]);
        let yes = store.and([d[i + 1], next_n, p[i]]);
        let no = store.and([d[i + 1], next_n, np]);
        let yes = store.dia(1, yes);
        let no = store.dia(1, no);
        let both = store.and([yes, no]);
        parts.push(store.implies(guard, both));
    }
    let body = store.and(parts);
    let mut conj = vec![d[0], store.not(d[1])];
    for i in 0..=h {
        conj.push(store.box_power(1, i, body));
    }
    Ok(store.and(conj))
}

/// [`gen_branch_n`] conjoined with `box^h P_{floor(h/3)+1}`; unsatisfiable.
pub fn gen_branch_p(store: &mut FormulaStore, params: BranchParams) -> Result<NodeId, GenError> {
    let f = gen_branch_n(store, params)?;
    let h = params.h;
    let p = store.atom(p_atom(h, h / 3 + 1));
    let forced = store.box_power(1, h, p);
    Ok(store.and([f, forced]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomCnfParams {
    /// Maximum modal depth.
    pub d: u32,
    /// Number of top-level clauses.
    pub l: u32,
    /// Literals per clause.
    pub k: u32,
    /// Number of propositional atoms.
    pub n: u32,
    /// Number of modalities.
    pub m: u32,
    /// Fraction of propositional literals in clauses below depth `d`.
    pub p: f64,
    pub seed: u64,
}

impl RandomCnfParams {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidParams(m.into()));
        if self.l == 0 || self.k == 0 || self.n == 0 || self.m == 0 {
            return bad("L, k, N and m must be positive");
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad("p must lie in [0, 1]");
        }
        if self.k > self.n {
            return bad("k may not exceed N (literals of a clause use distinct atoms)");
        }
        Ok(())
    }

    /// One-line record of the parameters, usable as a comment header.
    pub fn manifest(&self) -> String {
        format!(
            "kmsat-gen random d={} L={} k={} N={} m={} p={} seed={}",
            self.d, self.l, self.k, self.n, self.m, self.p, self.seed
        )
    }
}

/// Number of propositional literals in a clause below the maximum depth:
/// `floor(p*k)` or `ceil(p*k)`, with the mean equal to `p*k`.
fn propositional_count(rng: &mut ChaCha8Rng, p: f64, k: u32) -> u32 {
    let pk = p * k as f64;
    let lo = pk.floor();
    let frac = pk - lo;
    let n = if frac > 0.0 && rng.gen_bool(frac) { lo + 1.0 } else { lo };
    (n as u32).min(k)
}

pub fn gen_random_boxcnf(store: &mut FormulaStore, params: &RandomCnfParams) -> Result<NodeId, GenError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let clauses: Vec<NodeId> = (0..params.l).map(|_| random_clause(store, &mut rng, params, 0)).collect();
    Ok(store.and(clauses))
}

fn random_clause(store: &mut FormulaStore, rng: &mut ChaCha8Rng, params: &RandomCnfParams, depth: u32) -> NodeId {
    let k = params.k;
    let props = if depth < params.d { propositional_count(rng, params.p, k) } else { k };
    let mut lits = Vec::with_capacity(k as usize);
    for a in sample(rng, params.n as usize, props as usize) {
        let atom = store.atom(a as u32 + 1);
        lits.push(if rng.gen_bool(0.5) { atom } else { store.not(atom) });
    }
    let mut attempts = 0;
    while lits.len() < k as usize {
        let r = rng.gen_range(1..=params.m);
        let body = random_clause(store, rng, params, depth + 1);
        let b = store.boxed(r, body);
        let lit = if rng.gen_bool(0.5) { b } else { store.not(b) };
        attempts += 1;
        // a repeated or complementary modal literal is redrawn; tiny
        // parameter spaces may not offer k distinct ones
        let neg = store.not(lit);
        if (!lits.contains(&lit) && !lits.contains(&neg)) || attempts > 64 {
            lits.push(lit);
        }
    }
    store.or(lits)
}

/// Per-instance seed of a suite: SplitMix64 applied to `base + index`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
