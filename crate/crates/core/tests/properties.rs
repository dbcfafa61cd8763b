use num_traits::{One, Zero};
use proptest::prelude::*;

use arrzeta::archzeta2::SignVerdict;
use arrzeta::arrangement::{decomposable_by_bipartition, Arrangement, EdgePoset};
use arrzeta::bfunction::{bfun_generic_reduced, roots_are_well_formed};
use arrzeta::exact::{int, rat, Poly, Rational, RationalMatrix};
use arrzeta::io::{emit_arrangement, parse_arrangement};
use arrzeta::resolution::{
    candidate_poles_archimedean, find_good_tuple, is_good_tuple, lct, GoodTupleVerdict, ResolutionChoice,
};
use arrzeta::topzeta::{scaling_pole_check, strata_sum, topzeta_local_dim2, value_at_zero};

fn rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(p, q)| rat(p, q))
}

fn matrix() -> impl Strategy<Value = Vec<Vec<Rational>>> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(rational(), c), r))
}

fn arrangement() -> impl Strategy<Value = Arrangement> {
    (2usize..=3)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(prop::collection::vec(-2i64..=2, n), n + 1..=6),
                prop::collection::vec(1u32..=3, 6),
            )
        })
        .prop_filter_map("degenerate forms", |(n, rows, mults)| {
            let forms: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
            let k = forms.len();
            let (a, _) = Arrangement::merging(n, forms, mults[..k].to_vec()).ok()?;
            Some(a)
        })
}

fn hypotheses_hold(a: &Arrangement) -> bool {
    let c = a.classify();
    c.central && c.essential && !c.decomposable
}

fn lines() -> impl Strategy<Value = (Arrangement, Vec<u64>)> {
    (3usize..=5)
        .prop_flat_map(|r| (prop::collection::btree_set(-6i64..=6, r), prop::collection::vec(1u64..=4, r)))
        .prop_map(|(slopes, b)| {
            let forms: Vec<Vec<i64>> = slopes.iter().map(|&k| vec![1, k]).collect();
            let refs: Vec<&[i64]> = forms.iter().map(|f| f.as_slice()).collect();
            let mult: Vec<u32> = b.iter().map(|&x| x as u32).collect();
            (Arrangement::from_i64(2, &refs, &mult).unwrap(), b)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rref_is_idempotent_and_rank_is_transpose_invariant(rows in matrix()) {
        let m = RationalMatrix::from_rows(&rows).unwrap();
        let r = m.rref();
        let again = r.reduced.rref();
        prop_assert_eq!(again.reduced.to_rows(), r.reduced.to_rows());
        let t: Vec<Vec<Rational>> = (0..m.cols()).map(|c| (0..m.rows()).map(|i| m.get(i, c).clone()).collect()).collect();
        prop_assert_eq!(RationalMatrix::from_rows(&t).unwrap().rank(), r.rank);
        prop_assert_eq!(r.rank + r.nullspace.len(), m.cols());
        for v in &r.nullspace {
            prop_assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn poly_division_identity(a in prop::collection::vec(-5i64..=5, 0..6), b in prop::collection::vec(-5i64..=5, 1..4)) {
        let (a, b) = (Poly::from_i64(&a), Poly::from_i64(&b));
        prop_assume!(!b.is_zero());
        let (q, r) = a.div_rem(&b);
        prop_assert_eq!(&(&q * &b) + &r, a);
        prop_assert!(r.is_zero() || r.degree() < b.degree());
    }

    #[test]
    fn mobius_sums_and_signs(a in arrangement()) {
        let poset = EdgePoset::build(&a);
        let mu = poset.mobius();
        // the bottom element contributes 1
        prop_assert_eq!(1 + mu.iter().sum::<i64>(), 0);
        for (e, m) in poset.edges().iter().zip(&mu) {
            let sign = if e.codim % 2 == 0 { 1 } else { -1 };
            prop_assert!(sign * m > 0);
        }
    }

    #[test]
    fn decomposability_matches_bipartition(a in arrangement()) {
        prop_assert_eq!(a.classify().decomposable, decomposable_by_bipartition(&a));
    }

    #[test]
    fn unimodular_change_preserves_combinatorics(a in arrangement(), k in -3i64..=3, swap in any::<bool>()) {
        let n = a.dim();
        // forms transform by g = elementary shear composed with an optional swap
        let g = |f: &Vec<Rational>| {
            let mut h = f.clone();
            h[0] = &f[0] + &f[1] * int(k);
            if swap {
                h.swap(0, n - 1);
            }
            h
        };
        let moved = Arrangement::new(n, a.forms().iter().map(g).collect(), a.multiplicities().to_vec()).unwrap();
        let sets = |x: &Arrangement| EdgePoset::build(x).edges().iter().map(|e| (e.hyperplanes.clone(), e.codim)).collect::<Vec<_>>();
        prop_assert_eq!(sets(&a), sets(&moved));
        prop_assert_eq!(a.classify(), moved.classify());
        let m: Vec<u64> = a.multiplicities().iter().map(|&x| x as u64).collect();
        prop_assert_eq!(lct(&a, &m).unwrap(), lct(&moved, &m).unwrap());
    }

    #[test]
    fn lct_bounds_and_leading_candidate(a in arrangement()) {
        let b: Vec<u64> = a.multiplicities().iter().map(|&x| x as u64).collect();
        let l = lct(&a, &b).unwrap();
        let d: u64 = b.iter().sum();
        let bmax = *b.iter().max().unwrap();
        prop_assert!(l <= int(a.rank() as i64) / int(d as i64) || a.rank() < a.dim());
        prop_assert!(l <= rat(1, bmax as i64));
        let cands = candidate_poles_archimedean(&a, &b, 0, &int(-10), ResolutionChoice::Edges).unwrap();
        prop_assert_eq!(&cands[0].value, &-l);
    }

    #[test]
    fn good_tuples_certify_themselves(a in arrangement()) {
        prop_assume!(hypotheses_hold(&a));
        let cert = find_good_tuple(&a, None, ResolutionChoice::Edges).unwrap();
        let origin = EdgePoset::build(&a).origin().unwrap().clone();
        let verdict = is_good_tuple(&a, &cert.tuple, &origin, ResolutionChoice::Edges).unwrap();
        prop_assert!(matches!(verdict, GoodTupleVerdict::Good(_)));
        let d: u64 = cert.tuple.iter().sum();
        prop_assert_eq!(lct(&a, &cert.tuple).unwrap(), int(a.dim() as i64) / int(d as i64));
    }

    #[test]
    fn topzeta_is_consistent_and_scales((a, b) in lines(), m in 2u64..=3) {
        let z = topzeta_local_dim2(&a, &b).unwrap();
        prop_assert!(value_at_zero(&z).is_one());
        prop_assert_eq!(strata_sum(&z), z.value.clone());
        prop_assert!(scaling_pole_check(&a, &b, m).unwrap());
    }

    #[test]
    fn file_round_trip(a in arrangement()) {
        let labels = vec![None; a.len()];
        let back = parse_arrangement(&emit_arrangement(&a, &labels)).unwrap();
        prop_assert_eq!(back.arrangement.forms(), a.forms());
        prop_assert_eq!(back.arrangement.multiplicities(), a.multiplicities());
    }

    #[test]
    fn generic_bfunction_roots(n in 2u32..=4, extra in 0u32..=4) {
        let bf = bfun_generic_reduced(n, n + extra).unwrap();
        prop_assert!(roots_are_well_formed(&bf));
        prop_assert_eq!(bf.degree(), if extra == 0 { n as usize } else { (n + 2 * extra - 1) as usize + (n - 1) as usize });
        prop_assert!(bf.has_root(&rat(-(n as i64), (n + extra) as i64)));
    }

    #[test]
    fn sign_verdict_respects_interval(v in -10.0f64..10.0, e in 0.0f64..5.0) {
        let s = SignVerdict::from_interval(v, e);
        match s {
            SignVerdict::Positive => prop_assert!(v - e > 0.0),
            SignVerdict::Negative => prop_assert!(v + e < 0.0),
            _ => prop_assert!(v.abs() <= e),
        }
    }
}
