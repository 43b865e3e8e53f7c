use etale_entropy::etale::{
    conjecture1_search, h_omega, replay_trial, EvalConfig, FiniteSystem, FiniteTopSpace, GeneratorParams, Registry,
    SystemDescriptor, SystemVariant,
};
use etale_entropy::spectral::NonNegIntMatrix;
use etale_entropy::symbolic::{sft_entropy, Sft};
use proptest::prelude::*;

fn registry(sys: SystemDescriptor) -> Registry {
    let mut reg = Registry::default();
    reg.add_system(sys).unwrap();
    reg
}

#[test]
fn search_records_match_replays() {
    let (params, cfg) = (GeneratorParams::default(), EvalConfig::default());
    let report = conjecture1_search(&params, 11, 40, &cfg).unwrap();
    assert!(report.violations.is_empty());
    for r in &report.records {
        assert_eq!(&replay_trial(&params, 11, r.trial, &cfg).unwrap(), r);
    }
}

#[test]
fn zero_trials_is_an_error() {
    assert!(conjecture1_search(&GeneratorParams::default(), 0, 0, &EvalConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn compact_shift_value_is_its_entropy(rows in (1usize..=4).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u64..=1, n), n))) {
        let s = Sft::two_sided(NonNegIntMatrix::from_rows(&rows).unwrap()).unwrap();
        let h = sft_entropy(&s, 1e-9).unwrap().bracket;
        let reg = registry(SystemDescriptor::new("s", SystemVariant::Sft(s)));
        let cfg = EvalConfig::default();
        let r = h_omega(&reg, "s", &[], true, &[], false, &cfg).unwrap();
        prop_assert!(r.h_cr.value.bracket.overlaps(&h, 1e-9), "{:?} vs {:?}", r.h_cr.value, h);
        prop_assert!(r.value.bracket.lower <= h.upper && h.lower <= r.value.bracket.upper);
    }

    #[test]
    fn finite_systems_have_zero_entropy(map in (1usize..6).prop_flat_map(|n| prop::collection::vec(0..n, n))) {
        let n = map.len();
        let sys = FiniteSystem::new(FiniteTopSpace::discrete(n).unwrap(), map).unwrap();
        let reg = registry(SystemDescriptor::new("f", SystemVariant::FiniteTop(sys)));
        let r = h_omega(&reg, "f", &[], true, &[], false, &EvalConfig::default()).unwrap();
        prop_assert_eq!(r.h_cr.value.bracket.upper, 0.0);
        prop_assert!(r.value.bracket.contains(0.0));
    }

    #[test]
    fn descriptors_survive_serde(rows in (1usize..=3).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u64..=1, n), n))) {
        let s = Sft::two_sided(NonNegIntMatrix::from_rows(&rows).unwrap()).unwrap();
        let d = SystemDescriptor::new("s", SystemVariant::Sft(s));
        let back: SystemDescriptor = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }
}
