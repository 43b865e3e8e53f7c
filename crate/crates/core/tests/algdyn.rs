use etale_entropy::algdyn::{
    gamma_infinity_entropy, h_et, monomial_dynamical_degrees, pullback_correspondence, trim_correspondence,
    FiniteCorrespondence, MonomialMap, WeightedFamilyEntry,
};
use etale_entropy::spectral::{NonNegIntMatrix, SignedIntMatrix};
use proptest::prelude::*;

fn correspondence(max_dim: usize) -> impl Strategy<Value = FiniteCorrespondence> {
    (1..=max_dim)
        .prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u64..=2, n), n))
        .prop_map(|rows| FiniteCorrespondence::new(NonNegIntMatrix::from_rows(&rows).unwrap()))
}

fn invertible(max_dim: usize) -> impl Strategy<Value = SignedIntMatrix> {
    (1..=max_dim)
        .prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-3i64..=3, n), n))
        .prop_map(|rows| SignedIntMatrix::from_rows(&rows).unwrap())
        .prop_filter("nonzero determinant", |m| m.determinant() != 0.into())
}

#[test]
fn full_correspondence_has_log_n() {
    let h = gamma_infinity_entropy(&FiniteCorrespondence::full(3), 1e-9).unwrap().bracket;
    assert!(h.contains(3f64.ln()));
}

#[test]
fn h_et_needs_the_identity() {
    let c = FiniteCorrespondence::full(2);
    let d = WeightedFamilyEntry::declared("d", c, 2, 1e-9).unwrap();
    assert!(h_et(&[d]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn maps_have_zero_entropy(map in (1usize..6).prop_flat_map(|n| prop::collection::vec(0..n, n))) {
        let c = FiniteCorrespondence::from_map(&map).unwrap();
        prop_assert_eq!(gamma_infinity_entropy(&c, 1e-9).unwrap().bracket.upper, 0.0);
    }

    #[test]
    fn trimming_keeps_gamma_entropy(c in correspondence(5)) {
        let h = gamma_infinity_entropy(&c, 1e-9).unwrap().bracket;
        let t = trim_correspondence(&c);
        match t.correspondence {
            Some(k) => prop_assert!(gamma_infinity_entropy(&k, 1e-9).unwrap().bracket.overlaps(&h, 1e-9)),
            None => prop_assert_eq!(h.upper, 0.0),
        }
        prop_assert_eq!(t.kept.len() + t.removed.len(), c.points());
    }

    #[test]
    fn h_et_dominates_identity(c in correspondence(4), extra in prop::collection::vec((correspondence(3), 1u64..10), 0..4)) {
        let id = WeightedFamilyEntry::identity(&c, 1e-9).unwrap();
        let mut family = vec![id.clone()];
        for (i, (f, d)) in extra.into_iter().enumerate() {
            family.push(WeightedFamilyEntry::declared(format!("d{i}"), f, d, 1e-9).unwrap());
        }
        let v = h_et(&family).unwrap();
        prop_assert!(v.value.lower >= id.weighted.lower && v.value.lower >= -1e-12);
        prop_assert!(family.iter().all(|e| e.weighted.upper <= v.value.upper));
    }

    #[test]
    fn pullback_does_not_exceed_base(c in correspondence(4), g in 1usize..=3) {
        let n = c.points();
        let p: Vec<usize> = (0..n * g).map(|z| z % n).collect();
        let e = pullback_correspondence(&c, &p, 1e-9).unwrap();
        let h = gamma_infinity_entropy(&c, 1e-9).unwrap().bracket;
        prop_assert_eq!(e.degree, g as u64);
        prop_assert!(e.weighted.possibly_le(&h, 1e-9), "{:?} vs {:?}", e.weighted, h);
    }

    #[test]
    fn degree_profiles_are_log_concave(m in invertible(4)) {
        let k = m.dim();
        let det = m.determinant();
        let map = MonomialMap::new(m).unwrap();
        let prof = monomial_dynamical_degrees(&map, 1e-9).unwrap();
        prop_assert_eq!(prof.lambdas.len(), k + 1);
        prop_assert!(prof.lambdas[0].contains(1.0));
        prop_assert!(prof.is_log_concave(1e-6));
        let det: f64 = det.to_string().parse::<f64>().unwrap().abs();
        prop_assert!(prof.lambdas[k].overlaps(&etale_entropy::Bracket::exact(det), 1e-6));
        prop_assert!(prof.lambdas.iter().all(|l| l.lower >= 1.0 - 1e-9));
    }
}
