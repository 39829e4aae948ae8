use std::collections::BTreeSet;

use proptest::prelude::*;

use selectis::selectivity::{FieldData, Frobenius, RamifiedPrime};
use selectis::{
    decide_selectivity, type_group, FiniteAbelianGroup, GlobalInstance, LocalEmbedding, LocalMatrix, LocalRing,
    LocalScalar, Subgroup,
};

fn ring_strategy() -> impl Strategy<Value = LocalRing> {
    (prop::sample::select(vec![2u64, 3, 5, 7]), 1u32..=3).prop_map(|(q, k)| LocalRing::new(q, k).unwrap())
}

fn matrix_in(r: LocalRing, n: usize) -> impl Strategy<Value = LocalMatrix> {
    prop::collection::vec(0..r.modulus(), n * n).prop_map(move |e| LocalMatrix::new(r, n, e).unwrap())
}

/// A group with up to three factors and `count` elements of it.
fn group_with_elements(count: usize) -> impl Strategy<Value = (FiniteAbelianGroup, Vec<Vec<u64>>)> {
    prop::collection::vec(2u64..=12, 1..=3).prop_flat_map(move |orders| {
        let element = orders.iter().map(|&d| 0..d).collect::<Vec<_>>();
        let group = FiniteAbelianGroup::new(orders).unwrap();
        (Just(group), prop::collection::vec(element, 0..=count))
    })
}

/// Closure of the generators under addition, independent of the normal form.
fn closure(group: &FiniteAbelianGroup, gens: &[Vec<u64>]) -> BTreeSet<Vec<u64>> {
    let mut seen = BTreeSet::from([group.zero()]);
    let mut stack = vec![group.zero()];
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = group.add(&x, g);
            if seen.insert(y.clone()) {
                stack.push(y);
            }
        }
    }
    seen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn valuation_is_additive_up_to_the_cap(r in ring_strategy(), a in 0u64..1_000_000, b in 0u64..1_000_000) {
        let (x, y) = (LocalScalar::new(r, a % r.modulus()), LocalScalar::new(r, b % r.modulus()));
        let product = x.mul(&y).unwrap();
        prop_assert_eq!(product.valuation(), (x.valuation() + y.valuation()).min(r.k()));
    }

    #[test]
    fn units_invert(r in ring_strategy(), a in 0u64..1_000_000) {
        let x = LocalScalar::new(r, a % r.modulus());
        match x.inv() {
            Ok(inv) => prop_assert!(x.mul(&inv).unwrap() == r.one()),
            Err(_) => prop_assert!(!x.is_unit()),
        }
    }

    #[test]
    fn determinant_is_multiplicative(
        (a, b) in (ring_strategy(), 2usize..=5).prop_flat_map(|(r, n)| (matrix_in(r, n), matrix_in(r, n)))
    ) {
        prop_assert_eq!(a.mul(&b).unwrap().det(), a.det().mul(&b.det()).unwrap());
    }

    #[test]
    fn optimality_is_conjugation_invariant(
        (a, u) in (ring_strategy(), 2usize..=3).prop_flat_map(|(r, n)| (matrix_in(r, n), matrix_in(r, n)))
    ) {
        prop_assume!(u.is_invertible());
        let emb = LocalEmbedding::from_generator(&a).unwrap();
        let conj = emb.conjugated_by(&u).unwrap();
        conj.verify_homomorphism().unwrap();
        prop_assert_eq!(emb.is_optimal_independence().unwrap(), conj.is_optimal_independence().unwrap());
    }

    #[test]
    fn membership_matches_closure((group, gens) in group_with_elements(3)) {
        let s = Subgroup::new(&group, gens.clone()).unwrap();
        let members = closure(&group, &gens);
        prop_assert_eq!(s.order(), members.len() as u64);
        prop_assert_eq!(s.index() * s.order(), group.order());
        for x in group.elements() {
            prop_assert_eq!(s.contains(&x).unwrap(), members.contains(&x));
        }
    }

    #[test]
    fn quotient_by_power_subgroup_has_exponent_p(
        (group, ramified) in group_with_elements(2),
        p in prop::sample::select(vec![2u64, 3, 5]),
    ) {
        let inst = GlobalInstance {
            degree_p: p,
            class_group: group,
            ramified_primes: ramified
                .into_iter()
                .map(|class| RamifiedPrime { class, frobenius: Some(Frobenius::Inert) })
                .collect(),
            k: FieldData { galois: false, abelian: false, unramified_finite: true, unramified_real: true, norm_subgroup: None },
            local_embedding_numbers: None,
        };
        let t = type_group(&inst).unwrap();
        prop_assert_eq!(p % t.group().exponent(), 0);
        let report = decide_selectivity(&inst).unwrap();
        prop_assert!(!report.selective);
        prop_assert_eq!(report.admitting_count(), report.type_number);
    }
}
