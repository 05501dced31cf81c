use eqlines_core::classes::{discover_classes, membership_filter};
use eqlines_core::exact::{rat, QuadNum};
use eqlines_core::nonexist::{feasibility, AngleRow, Feasibility, FeasibilityProblem};
use eqlines_core::poly::{mod_reduce, IntPoly, SurdInterval};
use eqlines_core::seidel::{shifted_divisibility, Graph, SeidelMatrix};
use eqlines_core::tpenum::{brute_force, enumerate, EnumSpec};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quad() -> impl Strategy<Value = QuadNum> {
    (-20i64..20, 1i64..6, -20i64..20, 1i64..6).prop_map(|(a, b, c, d)| QuadNum::new(rat(a, b), rat(c, d), 5).unwrap())
}

fn poly(max_deg: usize) -> impl Strategy<Value = IntPoly> {
    prop::collection::vec(-9i64..10, 1..=max_deg + 1).prop_map(|c| IntPoly::from_i64(&c))
}

fn graph(n: usize) -> impl Strategy<Value = Graph> {
    any::<u64>().prop_map(move |seed| Graph::random(n, &mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quad_field_laws(a in quad(), b in quad(), c in quad()) {
        let ab = a.checked_mul(&b).unwrap();
        prop_assert_eq!(ab.checked_mul(&c).unwrap(), a.checked_mul(&b.checked_mul(&c).unwrap()).unwrap());
        let lhs = a.checked_mul(&b.checked_add(&c).unwrap()).unwrap();
        let rhs = ab.checked_add(&a.checked_mul(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        if !b.is_zero() {
            prop_assert_eq!(ab.checked_div(&b).unwrap(), a.clone());
        }
        prop_assert_eq!(a.checked_sub(&a).unwrap().sign(), 0);
        prop_assert_eq!(a.to_string().parse::<QuadNum>().unwrap(), a);
    }

    #[test]
    fn quad_order_agrees_with_floats(a in quad(), b in quad()) {
        let (x, y) = (a.to_f64(), b.to_f64());
        if (x - y).abs() > 1e-9 {
            prop_assert_eq!(a < b, x < y);
        }
        prop_assert!(a.floor() <= a.ceil());
        prop_assert!(QuadNum::from(rat_of(&a.floor())) <= a);
    }

    #[test]
    fn poly_division_round_trip(p in poly(6), q in poly(3)) {
        prop_assume!(!q.is_zero() && (q.leading() == BigInt::from(1) || q.leading() == BigInt::from(-1)));
        let (quo, rem) = p.div_rem(&q).unwrap();
        prop_assert!(rem.is_zero() || rem.degree() < q.degree());
        prop_assert_eq!(quo.mul(&q).add(&rem), p.clone());
        prop_assert_eq!(p.mul(&q).exact_div(&q).unwrap(), p);
    }

    #[test]
    fn poly_shift_and_parse(p in poly(6), a in -5i64..6, b in -5i64..6) {
        let (a, b) = (BigInt::from(a), BigInt::from(b));
        prop_assert_eq!(p.shift(&a).shift(&b), p.shift(&(&a + &b)));
        prop_assert_eq!(p.to_string().parse::<IntPoly>().unwrap(), p.clone());
        prop_assert_eq!(IntPoly::from_strings(&p.to_strings()).unwrap(), p);
    }

    #[test]
    fn switching_preserves_char_poly(g in graph(7), mask in 0u8..128) {
        let s = SeidelMatrix::from_graph(&g);
        let subset: Vec<usize> = (0..7).filter(|i| mask >> i & 1 == 1).collect();
        let t = s.switch(&subset).unwrap();
        prop_assert_eq!(t.char_poly(), s.char_poly());
        prop_assert_eq!(t.char_poly_mod(5).unwrap(), mod_reduce(&s.char_poly(), 5).unwrap());
    }

    #[test]
    fn even_order_shift_divisibility(g in graph(8)) {
        prop_assert!(shifted_divisibility(&SeidelMatrix::from_graph(&g).char_poly()));
    }

    #[test]
    fn feasibility_matches_brute_force(
        rows in prop::collection::vec(prop::collection::vec(0i64..5, 3), 1..4),
        total in 0u64..7,
        t0 in 0u64..10,
    ) {
        // Each row is normalized to sum 1 over three columns.
        let rows: Vec<AngleRow> = rows
            .into_iter()
            .filter(|r| r.iter().sum::<i64>() > 0)
            .map(|r| {
                let s: i64 = r.iter().sum();
                AngleRow { entries: r.iter().map(|&x| QuadNum::from(rat(x, s))).collect() }
            })
            .collect();
        prop_assume!(!rows.is_empty());
        let t0 = t0.min(total);
        let target = vec![t0, (total - t0) / 2, total - t0 - (total - t0) / 2];
        let problem = FeasibilityProblem { rows: rows.clone(), total, target: target.clone() };
        let mut brute = Vec::new();
        let k = rows.len();
        let mut n = vec![0u64; k];
        loop {
            if n.iter().sum::<u64>() == total {
                let ok = (0..3).all(|c| {
                    let s = rows.iter().zip(&n).fold(QuadNum::from_int(0), |acc, (r, &m)| {
                        acc.checked_add(&r.entries[c].scale(&rat(m as i64, 1))).unwrap()
                    });
                    s == QuadNum::from_int(target[c] as i64)
                });
                if ok {
                    brute.push(n.clone());
                }
            }
            let mut i = 0;
            while i < k && n[i] == total {
                n[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
            n[i] += 1;
        }
        match feasibility(&problem, 1_000_000).result {
            Feasibility::Feasible { mut solutions, truncated } => {
                prop_assert!(!truncated);
                solutions.sort();
                brute.sort();
                prop_assert_eq!(solutions, brute);
            }
            Feasibility::Infeasible { .. } => prop_assert!(brute.is_empty()),
        }
    }
}

fn rat_of(n: &BigInt) -> eqlines_core::exact::Rat {
    eqlines_core::exact::rat_int(n.clone())
}

#[test]
fn class_discovery_is_deterministic_and_covers_samples() {
    let a = discover_classes(7, 3, 11, 3000).unwrap();
    let b = discover_classes(7, 3, 11, 3000).unwrap();
    assert_eq!(a, b);
    assert!(a.complete);
    a.verify().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let p = SeidelMatrix::from_graph(&Graph::random(7, &mut rng)).char_poly();
        assert!(membership_filter(&p, &a).unwrap());
    }
}

#[test]
fn tree_search_matches_brute_force() {
    for (d, max_t) in [(2, 10), (3, 8), (4, 3)] {
        for t in 1..=max_t {
            let fast = enumerate(&EnumSpec::new(d, t, SurdInterval::ints(0, t))).unwrap();
            assert!(fast.validated);
            assert_eq!(fast.polynomials, brute_force(d, t), "d={d} t={t}");
        }
    }
}
