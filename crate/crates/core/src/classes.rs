//! Congruence classes of Seidel characteristic polynomials modulo `2^e`.
//!
//! A [`ClassSet`] is built by sampling Seidel matrices and is marked complete
//! once it reaches the theoretical cap [`upper_bound`], at which point
//! excluding a polynomial by [`membership_filter`] is a proof, not a guess.

use crate::poly::{mod_reduce, IntPoly, PolyError, ResiduePoly};
use crate::seidel::{Graph, SeidelError, SeidelMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Mutex;
use thiserror::Error;

pub const DEFAULT_BUDGET: u64 = 100_000;

#[derive(Debug, Error)]
pub enum ClassError {
    #[error("class set for order {n} mod 2^{e} is incomplete; exclusion would be unsound")]
    Incomplete { n: usize, e: u32 },
    #[error("polynomial has degree {got}, class set is for order {want}")]
    OrderMismatch { got: usize, want: usize },
    #[error("witness {index} does not reproduce its class")]
    BadWitness { index: usize },
    #[error("{0}")]
    Malformed(String),
    #[error(transparent)]
    Seidel(#[from] SeidelError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("cache {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Cap on `|P_{n,e}|`: `2^C(e-2,2)` for even `n`, twice that for odd `n`.
pub fn upper_bound(n: usize, e: u32) -> u64 {
    let k = e.saturating_sub(2) as u64;
    let c2 = if k < 2 { 0 } else { k * (k - 1) / 2 };
    let base = 1u64 << c2;
    if n % 2 == 1 && e >= 3 {
        base * 2
    } else {
        base
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSet {
    pub n: usize,
    pub e: u32,
    pub bound: u64,
    pub complete: bool,
    /// Ascending residue lists, sorted lexicographically.
    pub classes: Vec<Vec<u64>>,
    /// Edge list of one witness graph per class, aligned with `classes`.
    pub witnesses: Vec<String>,
    pub seed: u64,
    pub budget: u64,
    /// Matrices examined before stopping.
    pub budget_used: u64,
}

impl ClassSet {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn contains(&self, r: &ResiduePoly) -> bool {
        r.modulus_exponent == self.e && self.classes.binary_search(&r.residues).is_ok()
    }

    /// Recomputes every witness and checks it lands in its class.
    pub fn verify(&self) -> Result<(), ClassError> {
        if self.classes.len() != self.witnesses.len() || self.classes.len() as u64 > self.bound {
            return Err(ClassError::Malformed("class/witness count mismatch".into()));
        }
        if self.complete != (self.classes.len() as u64 == upper_bound(self.n, self.e)) {
            return Err(ClassError::Malformed("completeness flag disagrees with bound".into()));
        }
        if self.classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ClassError::Malformed("classes not canonically sorted".into()));
        }
        for (i, (class, w)) in self.classes.iter().zip(&self.witnesses).enumerate() {
            let g = Graph::from_edge_list(w)?;
            if g.order() != self.n {
                return Err(ClassError::BadWitness { index: i });
            }
            let r = SeidelMatrix::from_graph(&g).char_poly_mod(self.e)?;
            if &r.residues != class {
                return Err(ClassError::BadWitness { index: i });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("class sets serialize")
    }

    /// Parses and re-verifies a cached class set.
    pub fn from_json(text: &str) -> Result<Self, ClassError> {
        let cs: ClassSet = serde_json::from_str(text)?;
        cs.verify()?;
        Ok(cs)
    }
}

/// The deterministic part of the search: `J - I`, one edge, a triangle,
/// nested cliques and the running toggles of edges in lexicographic order.
fn seed_family(n: usize) -> Vec<Graph> {
    let mut out = vec![Graph::empty(n)];
    if n >= 2 {
        out.push(Graph::from_edges(n, &[(0, 1)]).expect("valid edge"));
    }
    if n >= 3 {
        out.push(Graph::from_edges(n, &[(0, 1), (0, 2), (1, 2)]).expect("valid edges"));
    }
    for k in 4..=n {
        let mut g = Graph::empty(n);
        for u in 0..k {
            for v in u + 1..k {
                g.set_edge(u, v, true);
            }
        }
        out.push(g);
    }
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            g.toggle_edge(u, v);
            out.push(g.clone());
        }
    }
    out
}

/// Random graph number `i` of the seeded stream. Each index has its own
/// generator so results do not depend on scheduling. Edge densities cycle
/// through a few values to reach sparse and dense switching classes.
fn random_graph(n: usize, seed: u64, i: u64) -> Graph {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let density = [0.5, 0.25, 0.75, 0.1, 0.9][(i % 5) as usize];
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                g.set_edge(u, v, true);
            }
        }
    }
    g
}

/// Samples Seidel matrices of order `n` until `upper_bound(n, e)` classes
/// are seen or `budget` matrices have been examined.
pub fn discover_classes(n: usize, e: u32, seed: u64, budget: u64) -> Result<ClassSet, ClassError> {
    if n == 0 || budget == 0 {
        return Err(ClassError::Malformed("order and budget must be positive".into()));
    }
    if !(1..=63).contains(&e) {
        return Err(ClassError::Malformed(format!("exponent {e} outside 1..=63")));
    }
    let bound = upper_bound(n, e);
    let family = seed_family(n);
    let mut found: BTreeMap<Vec<u64>, String> = BTreeMap::new();
    let mut used = 0u64;
    const BATCH: u64 = 64;
    'outer: while used < budget && (found.len() as u64) < bound {
        let end = (used + BATCH).min(budget);
        let batch: Vec<(Vec<u64>, Graph)> = (used..end)
            .into_par_iter()
            .map(|i| {
                let g = match family.get(i as usize) {
                    Some(g) => g.clone(),
                    None => random_graph(n, seed, i),
                };
                let r = SeidelMatrix::from_graph(&g).char_poly_mod(e).expect("exponent checked");
                (r.residues, g)
            })
            .collect();
        // Sequential merge in index order keeps the result independent of thread count.
        for (r, g) in batch {
            used += 1;
            found.entry(r).or_insert_with(|| g.to_edge_list());
            if found.len() as u64 == bound {
                break 'outer;
            }
        }
    }
    let (classes, witnesses) = found.into_iter().unzip::<_, _, Vec<_>, Vec<_>>();
    Ok(ClassSet {
        n,
        e,
        bound,
        complete: classes.len() as u64 == bound,
        classes,
        witnesses,
        seed,
        budget,
        budget_used: used,
    })
}

/// True iff `p mod 2^e` is one of the classes. Only defined for complete sets.
pub fn membership_filter(p: &IntPoly, cs: &ClassSet) -> Result<bool, ClassError> {
    if !cs.complete {
        return Err(ClassError::Incomplete { n: cs.n, e: cs.e });
    }
    if p.degree() != cs.n {
        return Err(ClassError::OrderMismatch { got: p.degree(), want: cs.n });
    }
    Ok(cs.contains(&mod_reduce(p, cs.e)?))
}

/// Lazily discovered class sets mod `2^e`, keyed by order, optionally
/// persisted as `classes-n{n}-e{e}.json` under a cache directory. Cached
/// files are re-verified on load.
#[derive(Debug)]
pub struct ClassStore {
    dir: Option<PathBuf>,
    e: u32,
    seed: u64,
    budget: u64,
    sets: Mutex<BTreeMap<usize, ClassSet>>,
}

impl ClassStore {
    pub fn new(dir: Option<PathBuf>, e: u32, seed: u64, budget: u64) -> Self {
        ClassStore { dir, e, seed, budget, sets: Mutex::new(BTreeMap::new()) }
    }

    pub fn exponent(&self) -> u32 {
        self.e
    }

    pub fn path_for(&self, n: usize) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("classes-n{n}-e{}.json", self.e)))
    }

    /// Seeds the store with an already verified set.
    pub fn insert(&self, cs: ClassSet) {
        self.sets.lock().expect("store lock").insert(cs.n, cs);
    }

    pub fn get(&self, n: usize) -> Result<ClassSet, ClassError> {
        if let Some(cs) = self.sets.lock().expect("store lock").get(&n) {
            return Ok(cs.clone());
        }
        let path = self.path_for(n);
        fn io(p: &std::path::Path) -> impl FnOnce(std::io::Error) -> ClassError + '_ {
            move |source| ClassError::Io { path: p.display().to_string(), source }
        }
        let cs = match &path {
            Some(p) if p.exists() => ClassSet::from_json(&std::fs::read_to_string(p).map_err(io(p))?)?,
            _ => {
                let cs = discover_classes(n, self.e, self.seed, self.budget)?;
                if let Some(p) = &path {
                    if let Some(parent) = p.parent() {
                        std::fs::create_dir_all(parent).map_err(io(p))?;
                    }
                    std::fs::write(p, cs.to_json()).map_err(io(p))?;
                }
                cs
            }
        };
        self.sets.lock().expect("store lock").insert(n, cs.clone());
        Ok(cs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parity_profile_check, ParityPattern};

    #[test]
    fn bounds() {
        assert_eq!(upper_bound(8, 5), 8);
        assert_eq!(upper_bound(49, 5), 16);
        for n in [2, 3, 10, 11] {
            assert_eq!(upper_bound(n, 1), 1);
            assert_eq!(upper_bound(n, 2), 1);
        }
        assert_eq!(upper_bound(4, 3), 1);
        assert_eq!(upper_bound(5, 3), 2);
    }

    #[test]
    fn order_two() {
        let cs = discover_classes(2, 4, 1, 100).unwrap();
        assert_eq!(cs.classes, vec![vec![15, 0, 1]]);
        // Only one class exists, below the cap of 2, so the search cannot certify completeness.
        assert!(!cs.complete);
        assert_eq!(cs.budget_used, 100);
        cs.verify().unwrap();
    }

    #[test]
    fn order_seven_mod_eight() {
        let cs = discover_classes(7, 3, 7, 2000).unwrap();
        assert!(cs.len() <= 2 && !cs.is_empty());
        cs.verify().unwrap();
        for w in &cs.witnesses {
            let g = Graph::from_edge_list(w).unwrap();
            assert!(membership_filter(&SeidelMatrix::from_graph(&g).char_poly(), &cs).unwrap_or(true));
        }
    }

    #[test]
    fn incomplete_sets_refuse_to_filter() {
        let cs = discover_classes(10, 5, 3, 1).unwrap();
        assert!(!cs.complete);
        let p = SeidelMatrix::from_graph(&Graph::empty(10)).char_poly();
        assert!(matches!(membership_filter(&p, &cs), Err(ClassError::Incomplete { .. })));
    }

    #[test]
    fn deterministic_and_round_trips() {
        let a = discover_classes(9, 4, 11, 500).unwrap();
        let b = discover_classes(9, 4, 11, 500).unwrap();
        assert_eq!(a, b);
        let back = ClassSet::from_json(&a.to_json()).unwrap();
        assert_eq!(a, back);
        let mut bad = a.clone();
        bad.classes[0][0] ^= 1;
        bad.classes.sort();
        assert!(ClassSet::from_json(&bad.to_json()).is_err());
    }

    #[test]
    fn classes_respect_parity_patterns() {
        for n in 4..=9 {
            let cs = discover_classes(n, 5, 5, 300).unwrap();
            assert!(cs.len() as u64 <= cs.bound);
            let pattern = if n % 2 == 0 { ParityPattern::EvenOrder } else { ParityPattern::OddOrder };
            for w in &cs.witnesses {
                let g = Graph::from_edge_list(w).unwrap();
                assert!(parity_profile_check(&SeidelMatrix::from_graph(&g).char_poly(), pattern));
            }
        }
    }
}
