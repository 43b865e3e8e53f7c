use etale_entropy::etale::trial_rng;
use etale_entropy::spectral::NonNegIntMatrix;
use etale_entropy::symbolic::{
    group_extension, higher_block, is_finite_to_one, random_cocycle, random_irreducible_sft, sft_entropy, sub_sft, word_count,
    Sft, SymbolicCaps,
};
use num_bigint::BigUint;
use proptest::prelude::*;

fn ln_big(x: &BigUint) -> f64 {
    let shift = x.bits().saturating_sub(64);
    let top: u64 = (x >> shift).try_into().unwrap();
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

fn zero_one(max_dim: usize) -> impl Strategy<Value = Vec<Vec<u64>>> {
    (1..=max_dim).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u64..=1, n), n))
}

#[test]
fn full_shift_word_counts() {
    let s = Sft::full_shift(3);
    assert_eq!(word_count(&s, 5), BigUint::from(243u32));
}

#[test]
fn empty_shift_has_zero_entropy() {
    let s = Sft::two_sided(NonNegIntMatrix::from_rows(&[[0u64, 1], [0, 0]]).unwrap()).unwrap();
    let h = sft_entropy(&s, 1e-9).unwrap();
    assert!(h.empty);
    assert_eq!(h.bracket.upper, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn entropy_bounds_word_growth(rows in zero_one(5)) {
        let s = Sft::two_sided(NonNegIntMatrix::from_rows(&rows).unwrap()).unwrap();
        let h = sft_entropy(&s, 1e-9).unwrap().bracket;
        prop_assert!(h.width() <= 1e-9 && h.lower >= 0.0);
        // N(n) ≤ C·n^k·e^{nh}, so the long-run rate cannot exceed h
        let (n1, n2) = (200u32, 400u32);
        let (a, b) = (word_count(&s, n1), word_count(&s, n2));
        if a.bits() > 0 {
            let rate = (ln_big(&b) - ln_big(&a)) / f64::from(n2 - n1);
            prop_assert!(rate <= h.upper + 0.02, "rate {} vs {:?}", rate, h);
        }
    }

    #[test]
    fn trimming_keeps_entropy(rows in zero_one(5)) {
        let s = Sft::two_sided(NonNegIntMatrix::from_rows(&rows).unwrap()).unwrap();
        let h = sft_entropy(&s, 1e-9).unwrap().bracket;
        match s.trim() {
            Some(t) => {
                prop_assert!(t.is_essential());
                prop_assert!(sft_entropy(&t, 1e-9).unwrap().bracket.overlaps(&h, 1e-9));
            }
            None => prop_assert_eq!(h.upper, 0.0),
        }
    }

    #[test]
    fn subshift_entropy_is_smaller(rows in zero_one(5), mask in 1u32..32) {
        let s = Sft::two_sided(NonNegIntMatrix::from_rows(&rows).unwrap()).unwrap();
        let symbols: Vec<usize> = (0..s.alphabet_size()).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!symbols.is_empty());
        let sub = sub_sft(&s, &symbols).unwrap();
        let h = sft_entropy(&s, 1e-9).unwrap().bracket;
        let hs = sub.sft.map(|t| sft_entropy(&t, 1e-9).unwrap().bracket.lower).unwrap_or(0.0);
        prop_assert!(hs <= h.upper + 1e-9);
    }

    #[test]
    fn higher_block_and_extension_are_finite_to_one(seed in 0u64..1000, k in 2usize..=3, order in 1u64..=3) {
        let mut rng = trial_rng(seed, 0);
        let s = random_irreducible_sft(4, 0.4, &mut rng);
        prop_assert!(s.is_irreducible());
        let caps = SymbolicCaps::default();
        let h = sft_entropy(&s, 1e-9).unwrap().bracket;
        let hb = higher_block(&s, k, &caps).unwrap();
        prop_assert!(sft_entropy(&hb.sft, 1e-9).unwrap().bracket.overlaps(&h, 1e-9));
        prop_assert!(is_finite_to_one(&hb.code, &caps).unwrap().is_finite_to_one());
        let ext = group_extension(&s, order, &random_cocycle(&s, order, &mut rng), &caps).unwrap();
        prop_assert_eq!(ext.sft.alphabet_size(), s.alphabet_size() * order as usize);
        prop_assert!(sft_entropy(&ext.sft, 1e-9).unwrap().bracket.overlaps(&h, 1e-9));
        prop_assert!(is_finite_to_one(&ext.projection, &caps).unwrap().is_finite_to_one());
    }
}
