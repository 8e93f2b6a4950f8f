use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use exotic_bv::arnold::{dihedral_action, reduce_to_gravity, relation_space, Dihedral, FormExpr};
use exotic_bv::darboux::bv_axioms;
use exotic_bv::diagrams::{bracketings, canonicalize, chords, Bracketing};
use exotic_bv::graphs::{cyclic_tau, generators, GraphChain, GraphMonomial};
use exotic_bv::mzv::{MZVExpr, MZVWord};
use exotic_bv::Q;

fn inversion_parity<T: Ord>(v: &[T]) -> i8 {
    let mut inv = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Distinct elements of `pool`, in the order chosen by `picks`.
fn pick<T: Clone>(pool: &[T], picks: &[usize]) -> Vec<T> {
    let mut rest = pool.to_vec();
    picks.iter().filter_map(|&p| if rest.is_empty() { None } else { Some(rest.remove(p % rest.len())) }).collect()
}

fn q(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

fn random_form(n: usize, k: usize, coeffs: &[(Vec<usize>, i64)]) -> FormExpr {
    let pool = chords(n).unwrap();
    let mut f = FormExpr::zero(n);
    for (picks, c) in coeffs {
        let word = pick(&pool, &picks[..k]);
        if let Some(m) = canonicalize(n, &word) {
            f = f.add(&FormExpr::monomial(&m, q(*c)));
        }
    }
    f
}

fn form_strategy() -> impl Strategy<Value = (usize, usize, Vec<(Vec<usize>, i64)>)> {
    (5usize..=7, 1usize..=2).prop_flat_map(|(n, k)| {
        let term = (prop::collection::vec(0usize..64, 2), -3i64..=3);
        (Just(n), Just(k), prop::collection::vec(term, 1..5))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_sign_is_inversion_parity(n in 5usize..=9, picks in prop::collection::vec(0usize..64, 1..5)) {
        let word = pick(&chords(n).unwrap(), &picks);
        let m = canonicalize(n, &word).unwrap();
        prop_assert_eq!(m.sign, inversion_parity(&word));
        let mut sorted = word.clone();
        sorted.sort();
        prop_assert_eq!(m.chords, sorted);
    }

    #[test]
    fn repeated_chord_vanishes(n in 5usize..=9, a in 0usize..64, b in 0usize..64) {
        let pool = chords(n).unwrap();
        let c = pool[a % pool.len()];
        let d = pool[b % pool.len()];
        prop_assert!(canonicalize(n, &[c, d, c]).is_none());
    }

    #[test]
    fn gravity_reduction_is_linear((n, k, terms) in form_strategy(), s in -3i64..=3) {
        let f = random_form(n, k, &terms[..terms.len() / 2 + 1]);
        let g = random_form(n, k, &terms[terms.len() / 2..]);
        prop_assume!(!f.is_zero() && !g.is_zero());
        let lhs = reduce_to_gravity(&f.scale(&q(s)).add(&g)).unwrap();
        let rf = reduce_to_gravity(&f).unwrap();
        let rg = reduce_to_gravity(&g).unwrap();
        let mut expected = rg.coeffs.clone();
        for (key, c) in rf.coeffs {
            *expected.entry(key).or_insert_with(Q::zero) += c * q(s);
        }
        expected.retain(|_, c| !c.is_zero());
        prop_assert_eq!(lhs.coeffs, expected);
    }

    #[test]
    fn gravity_reduction_is_idempotent((n, k, terms) in form_strategy()) {
        let f = random_form(n, k, &terms);
        prop_assume!(!f.is_zero());
        let r = reduce_to_gravity(&f).unwrap();
        let mut back = FormExpr::zero(n);
        for (key, c) in &r.coeffs {
            back.add_term(key.clone(), c.clone());
        }
        prop_assert_eq!(reduce_to_gravity(&back).unwrap().coeffs, r.coeffs);
    }

    #[test]
    fn relations_stay_relations_under_dihedral_symmetry(n in 5usize..=7, idx in 0usize..1000, rot in 0usize..7, reflect: bool) {
        let rels = relation_space(n, 2).unwrap();
        prop_assume!(!rels.is_empty());
        let r = &rels[idx % rels.len()];
        let moved = dihedral_action(r, Dihedral { rotation: rot % n, reflect });
        prop_assert!(reduce_to_gravity(&moved).unwrap().coeffs.is_empty());
    }

    #[test]
    fn dihedral_group_orders(n in 4usize..=11, v in 1usize..=11) {
        let v = (v - 1) % n + 1;
        let mut x = v;
        for _ in 0..n {
            x = Dihedral::tau(1).apply_vertex(n, x);
        }
        prop_assert_eq!(x, v);
        let s = Dihedral::sigma();
        prop_assert_eq!(s.apply_vertex(n, s.apply_vertex(n, v)), v);
    }

    #[test]
    fn graph_word_sign_is_inversion_parity(n in 4usize..=8, picks in prop::collection::vec(0usize..64, 1..6)) {
        let word = pick(&generators(n), &picks);
        let m = GraphMonomial::new(n, &word).unwrap().unwrap();
        prop_assert_eq!(m.sign, inversion_parity(&word));
    }

    #[test]
    fn cyclic_action_has_order_n(n in 4usize..=7, picks in prop::collection::vec(0usize..64, 1..4)) {
        let word = pick(&generators(n), &picks);
        let m = GraphMonomial::new(n, &word).unwrap().unwrap();
        let x = GraphChain::from_monomial(&m, Q::from_integer(1.into()));
        let mut y = x.clone();
        for _ in 0..n {
            y = cyclic_tau(&y);
        }
        prop_assert_eq!(y, x);
    }

    #[test]
    fn bracketing_round_trip(n in 2usize..=7, idx in 0usize..1000) {
        let all = bracketings(n);
        let b = &all[idx % all.len()];
        let parsed: Bracketing = b.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, b);
    }

    #[test]
    fn mzv_round_trip(terms in prop::collection::vec((prop::collection::vec(1u32..=4, 1..3), prop::collection::vec(2u32..=5, 0..2), -5i64..=5, 1i64..=4), 1..4)) {
        let mut e = MZVExpr::zero();
        for (tail, extra, num, den) in terms {
            let mut exps = tail[1..].to_vec();
            exps.push(1 + tail[0]);
            let mut m = vec![MZVWord::new(exps).unwrap()];
            m.extend(extra.into_iter().map(|k| MZVWord::zeta(k).unwrap()));
            e.add_term(m, Q::new(num.into(), den.into()));
        }
        let parsed: MZVExpr = e.to_string().parse().unwrap();
        prop_assert_eq!(parsed, e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bv_axioms_hold_for_any_seed(d in 1usize..=3, seed: u64) {
        let r = bv_axioms(d, 5, seed).unwrap();
        prop_assert!(r.passed(), "{:?}", r.failures);
    }
}
