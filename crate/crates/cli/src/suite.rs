//! Randomized and exhaustive invariant checks behind `verify-congruences`.

use std::collections::BTreeSet;

use eqlines_core::classes::{discover_classes, upper_bound};
use eqlines_core::nonexist::{
    angle_row, enumerate_submatrix_candidates, feasibility, reconstruct_submatrix_poly, submatrix_constraints,
    AngleRow, Feasibility, FeasibilityProblem, SpectrumCandidate,
};
use eqlines_core::poly::{IntPoly, SurdInterval};
use eqlines_core::seidel::{
    char_poly, coefficient_map, dihedral_fix_formula, dihedral_fix_oracle, euler_representative, odd_index_congruence,
    shifted_divisibility, verify_parity_theorems, verify_trace_congruences, walk_stats, DihedralElement, Graph,
    SeidelMatrix,
};
use eqlines_core::tpenum::{brute_force, enumerate, EnumSpec};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: u64,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    fn new(name: &str) -> Self {
        CheckOutcome { name: name.to_string(), cases: 0, failures: Vec::new() }
    }

    fn record(&mut self, ok: Result<(), String>) {
        self.cases += 1;
        if let Err(e) = ok {
            if self.failures.len() < 20 {
                self.failures.push(e);
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.cases > 0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { samples: 500, seed: 1 }
    }
}

fn rng(cfg: &SuiteConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// One graph per isomorphism class on `n` vertices.
pub fn graphs_up_to_iso(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let index = |i: usize, j: usize| pairs.iter().position(|&p| p == (i.min(j), i.max(j))).expect("pair");
    let mut perms: Vec<Vec<usize>> = vec![(0..n).collect()];
    for k in 1..n {
        let mut next = Vec::new();
        for p in &perms {
            for pos in 0..=k {
                let mut q = p[..k].to_vec();
                q.insert(pos, k);
                next.push(q);
            }
        }
        perms = next;
    }
    let maps: Vec<Vec<usize>> = perms.iter().map(|p| pairs.iter().map(|&(i, j)| index(p[i], p[j])).collect()).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let canon = maps
            .iter()
            .map(|m| m.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).fold(0u64, |acc, (_, &t)| acc | 1 << t))
            .min()
            .expect("identity permutation");
        if seen.insert(canon) {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(b, _)| canon >> b & 1 == 1).map(|(_, &e)| e).collect();
            out.push(Graph::from_edges(n, &edges).expect("valid edges"));
        }
    }
    out
}

/// (a) closed-form dihedral fixed-walk counts against the brute-force oracle.
pub fn check_dihedral(max_n: usize, big_ns: std::ops::RangeInclusive<usize>) -> CheckOutcome {
    let mut out = CheckOutcome::new("dihedral fixed-walk counts");
    for n in 1..=max_n {
        for g in graphs_up_to_iso(n) {
            for big_n in big_ns.clone() {
                let stats = walk_stats(&g, big_n);
                for k in 0..big_n as i64 {
                    for elem in [DihedralElement::Rotation(k), DihedralElement::Reflection(k)] {
                        out.record(match dihedral_fix_oracle(&g, big_n, elem) {
                            Ok(c) if BigInt::from(c) == dihedral_fix_formula(&stats, big_n, elem) => Ok(()),
                            Ok(c) => Err(format!("{} N={big_n} {elem:?}: oracle {c}", g.to_edge_list())),
                            Err(e) => Err(e.to_string()),
                        });
                    }
                }
            }
        }
    }
    out
}

fn random_graph(r: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut g = Graph::empty(n);
    let p: f64 = r.gen_range(0.1..0.9);
    for i in 0..n {
        for j in i + 1..n {
            if r.gen_bool(p) {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

/// (b) Burnside and Euler-graph walk congruences.
pub fn check_walk_congruences(cfg: &SuiteConfig) -> CheckOutcome {
    let mut out = CheckOutcome::new("walk-count congruences");
    let mut r = rng(cfg, 2);
    for i in 0..cfg.samples {
        let n = r.gen_range(1..=10);
        let mut g = random_graph(&mut r, n);
        // every other odd-order sample is replaced by its Euler representative
        if n % 2 == 1 && i % 2 == 0 {
            g = euler_representative(&SeidelMatrix::from_graph(&g)).expect("odd order");
        }
        let big_n = r.gen_range(3..=12);
        out.record(verify_trace_congruences(&g, big_n).map(|_| ()).map_err(|e| format!("{}: {e}", g.to_edge_list())));
    }
    out
}

/// (c) coefficients of `χ_{J-2A}` from `χ_A` and walk counts.
pub fn check_coefficient_map(cfg: &SuiteConfig) -> CheckOutcome {
    let mut out = CheckOutcome::new("coefficient map");
    let mut r = rng(cfg, 3);
    for _ in 0..cfg.samples {
        let n = r.gen_range(1..=10);
        let g = random_graph(&mut r, n);
        let b_poly = char_poly(&g.adjacency());
        let b: Vec<BigInt> = (0..=n).map(|i| b_poly.desc(i)).collect();
        let walks = walk_stats(&g, n).bilinear;
        let direct = SeidelMatrix::from_graph(&g).shifted_char_poly();
        out.record(match coefficient_map(&b, &walks) {
            Ok(a) if (0..=n).all(|i| a[i] == direct.desc(i)) => Ok(()),
            Ok(a) => Err(format!("{}: mapped {a:?}, direct {direct}", g.to_edge_list())),
            Err(e) => Err(e.to_string()),
        });
    }
    out
}

/// (d) parity and valuation theorems on random Seidel matrices.
pub fn check_parity_theorems(cfg: &SuiteConfig) -> CheckOutcome {
    let mut out = CheckOutcome::new("parity theorems");
    let mut r = rng(cfg, 4);
    for _ in 0..cfg.samples {
        let n = r.gen_range(1..=13);
        let s = SeidelMatrix::from_graph(&random_graph(&mut r, n));
        let mut res = verify_parity_theorems(&s).map(|_| ()).map_err(|e| e.to_string());
        if res.is_ok() && n % 2 == 0 && !shifted_divisibility(&s.char_poly()) {
            res = Err("shift divisibility fails at even order".into());
        }
        out.record(res.map_err(|e| format!("{}: {e}", s.underlying_graph().to_edge_list())));
    }
    out
}

/// (e) odd-index congruence on Euler graphs of odd order.
pub fn check_odd_index(cfg: &SuiteConfig) -> CheckOutcome {
    let mut out = CheckOutcome::new("odd-index congruence");
    let mut r = rng(cfg, 5);
    for n in [5usize, 7, 9] {
        for _ in 0..cfg.samples.div_ceil(3) {
            let g = euler_representative(&SeidelMatrix::from_graph(&random_graph(&mut r, n))).expect("odd order");
            let p = SeidelMatrix::from_graph(&g).shifted_char_poly();
            let a: Vec<BigInt> = (0..=n).map(|i| p.desc(i)).collect();
            for k in [2usize, 3].into_iter().filter(|&k| 2 * k < n) {
                out.record(odd_index_congruence(&a, n, k).map(|_| ()).map_err(|e| format!("n={n} k={k}: {e}")));
            }
        }
    }
    out
}

/// (f) the number of residue classes never exceeds the bound.
pub fn check_class_bounds(cfg: &SuiteConfig, budget: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new("class-count bound");
    for n in 2..=10 {
        for e in 1..=5 {
            out.record(match discover_classes(n, e, cfg.seed, budget) {
                Ok(cs) if cs.len() as u64 <= upper_bound(n, e) => Ok(()),
                Ok(cs) => Err(format!("n={n} e={e}: {} classes > {}", cs.len(), upper_bound(n, e))),
                Err(err) => Err(err.to_string()),
            });
        }
    }
    out
}

/// (g) tree search against exhaustive coefficient scans.
pub fn check_tpenum_completeness(max_trace: i64) -> CheckOutcome {
    let mut out = CheckOutcome::new("tree search completeness");
    for d in 1..=3usize {
        for t in d as i64..=max_trace {
            let fast = enumerate(&EnumSpec::new(d, t, SurdInterval::ints(0, max_trace))).map(|r| r.polynomials);
            out.record(match fast {
                Ok(f) if f == brute_force(d, t) => Ok(()),
                Ok(_) => Err(format!("d={d} t={t}: tree search and scan disagree")),
                Err(e) => Err(e.to_string()),
            });
        }
    }
    out
}

fn delete_vertex(s: &SeidelMatrix, j: usize) -> SeidelMatrix {
    let entries = s
        .entries()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, row)| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, &x)| x).collect())
        .collect();
    SeidelMatrix::new(entries).expect("principal submatrix")
}

/// Named Seidel matrices with spectra of degree at most two.
pub fn explicit_seidel_matrices() -> Vec<(String, SeidelMatrix)> {
    let petersen = {
        let mut e: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        e.extend((0..5).map(|i| (i, i + 5)));
        e.extend((0..5).map(|i| (5 + i, 5 + (i + 2) % 5)));
        Graph::from_edges(10, &e).expect("valid edges")
    };
    let rook = {
        let e: Vec<(usize, usize)> = (0..9)
            .flat_map(|a| (a + 1..9).map(move |b| (a, b)))
            .filter(|&(a, b)| a / 3 == b / 3 || a % 3 == b % 3)
            .collect();
        Graph::from_edges(9, &e).expect("valid edges")
    };
    let mut out = vec![
        ("pentagon".to_string(), Graph::cycle(5)),
        ("petersen".to_string(), petersen),
        ("3x3 rook".to_string(), rook),
    ];
    for n in 2..=8 {
        out.push((format!("empty({n})"), Graph::empty(n)));
        out.push((format!("complete({n})"), Graph::complete(n)));
    }
    out.into_iter().map(|(name, g)| (name, SeidelMatrix::from_graph(&g))).collect()
}

fn angle_checks(name: &str, s: &SeidelMatrix) -> Result<bool, String> {
    let chi = s.char_poly();
    let Some(spec) = SpectrumCandidate::from_char_poly(&chi) else { return Ok(false) };
    if spec.char_poly() != chi {
        return Err(format!("{name}: factorization does not multiply back"));
    }
    let cons = submatrix_constraints(&spec).map_err(|e| e.to_string())?;
    let candidates: Option<BTreeSet<IntPoly>> = (spec.eigenvalues.len() > 1)
        .then(|| enumerate_submatrix_candidates(&spec).ok())
        .flatten()
        .map(|v| v.into_iter().collect());
    let mut rows: Vec<AngleRow> = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for j in 0..s.order() {
        let sub = delete_vertex(s, j);
        let chi_p = sub.char_poly();
        let row = angle_row(&spec, &chi_p)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("{name}: vertex {j} gives no angle row"))?;
        if reconstruct_submatrix_poly(&spec, &row).map_err(|e| e.to_string())? != chi_p {
            return Err(format!("{name}: partial fractions do not rebuild vertex {j}"));
        }
        let f = chi_p.exact_div(&cons.quotient).map_err(|e| format!("{name}: {e}"))?;
        if let Some(c) = &candidates {
            if !c.contains(&f) {
                return Err(format!("{name}: {f} missing from the interlacing candidates"));
            }
        }
        if sub.order().is_multiple_of(2) && !shifted_divisibility(&chi_p) {
            return Err(format!("{name}: vertex {j} fails the shift sieve"));
        }
        match rows.iter().position(|r| *r == row) {
            Some(i) => counts[i] += 1,
            None => {
                rows.push(row);
                counts.push(1);
            }
        }
    }
    let problem = FeasibilityProblem { rows, total: s.order() as u64, target: spec.multiplicities() };
    match feasibility(&problem, 5_000_000).result {
        Feasibility::Feasible { solutions, truncated } => {
            if !truncated && !solutions.contains(&counts) {
                return Err(format!("{name}: actual row counts {counts:?} not found"));
            }
        }
        Feasibility::Infeasible { .. } => return Err(format!("{name}: realized spectrum declared infeasible")),
    }
    Ok(true)
}

/// (h) angle rows of real matrices: partial fractions, interlacing, sieve
/// and feasibility of the realized row counts.
pub fn check_angle_rows(cfg: &SuiteConfig) -> CheckOutcome {
    let mut out = CheckOutcome::new("angle rows on explicit matrices");
    for (name, s) in explicit_seidel_matrices() {
        out.record(angle_checks(&name, &s).and_then(|ok| {
            if ok {
                Ok(())
            } else {
                Err(format!("{name}: spectrum not of degree <= 2"))
            }
        }));
    }
    let mut r = rng(cfg, 8);
    let mut found = 0;
    for i in 0..cfg.samples * 4 {
        if found >= cfg.samples / 5 {
            break;
        }
        let n = 3 + i % 6;
        let s = SeidelMatrix::from_graph(&random_graph(&mut r, n));
        match angle_checks(&format!("random order {n}"), &s) {
            Ok(true) => {
                found += 1;
                out.record(Ok(()));
            }
            Ok(false) => {}
            Err(e) => out.record(Err(e)),
        }
    }
    out
}

pub fn run_suite(cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    vec![
        check_dihedral(6, 3..=8),
        check_walk_congruences(cfg),
        check_coefficient_map(cfg),
        check_parity_theorems(cfg),
        check_odd_index(cfg),
        check_class_bounds(cfg, 4000),
        check_tpenum_completeness(12),
        check_angle_rows(cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isomorphism_class_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| graphs_up_to_iso(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34]);
    }

    #[test]
    fn explicit_matrices_have_small_spectra() {
        for (name, s) in explicit_seidel_matrices() {
            assert!(angle_checks(&name, &s).unwrap(), "{name}");
        }
    }
}
