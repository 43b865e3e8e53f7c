use etale_entropy::spectral::{
    exterior_power, matrix_power, path_count, perron_root, scc_decompose, tensor_product, NonNegIntMatrix,
    SignedIntMatrix, SpectralCaps,
};
use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

fn small_matrix(max_dim: usize, max_entry: u64) -> impl Strategy<Value = Vec<Vec<u64>>> {
    (1..=max_dim).prop_flat_map(move |n| prop::collection::vec(prop::collection::vec(0..=max_entry, n), n))
}

fn signed_matrix(max_dim: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max_dim).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-3i64..=3, n), n))
}

fn ln_big(x: &BigUint) -> f64 {
    let shift = x.bits().saturating_sub(64);
    let top: u64 = (x >> shift).try_into().unwrap();
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Spectral radius from closed walks: `max_i ((A^2m)_ii / (A^m)_ii)^(1/m)` with
/// `m` a multiple of every period up to 4.
fn closed_walk_radius(a: &NonNegIntMatrix) -> f64 {
    let caps = SpectralCaps { max_dim: 16, max_entry_bits: 1 << 20 };
    let m = 120;
    let p = matrix_power(a, m, &caps).unwrap();
    let q = matrix_power(a, 2 * m, &caps).unwrap();
    (0..a.dim())
        .filter(|&i| p.get(i, i).bits() > 0)
        .map(|i| ((ln_big(q.get(i, i)) - ln_big(p.get(i, i))) / m as f64).exp())
        .fold(0.0, f64::max)
}

#[test]
fn golden_mean_root() {
    let a = NonNegIntMatrix::from_rows(&[[1u64, 1], [1, 0]]).unwrap();
    let r = perron_root(&a, 1e-12).unwrap();
    assert!(r.bracket().contains((1.0 + 5f64.sqrt()) / 2.0));
}

#[test]
fn nilpotent_root_is_exact_zero() {
    let a = NonNegIntMatrix::from_rows(&[[0u64, 1, 1], [0, 0, 1], [0, 0, 0]]).unwrap();
    let r = perron_root(&a, 1e-9).unwrap();
    assert!(r.exact_zero);
    assert_eq!((r.lower, r.upper), (0.0, 0.0));
}

#[test]
fn path_count_matches_power_sum() {
    let a = NonNegIntMatrix::from_rows(&[[1u64, 2], [1, 0]]).unwrap();
    let p = matrix_power(&a, 7, &SpectralCaps::default()).unwrap();
    assert_eq!(path_count(&a, 7), p.entry_sum());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn perron_bracket_contains_closed_walk_radius(rows in small_matrix(4, 2)) {
        let a = NonNegIntMatrix::from_rows(&rows).unwrap();
        let r = perron_root(&a, 1e-9).unwrap();
        prop_assert!(r.width() <= 1e-9);
        let o = closed_walk_radius(&a);
        prop_assert!(r.lower - 1e-3 <= o && o <= r.upper + 1e-3, "{:?} vs {}", r, o);
    }

    #[test]
    fn tensor_product_multiplies_radii(a in small_matrix(3, 2), b in small_matrix(3, 2)) {
        let a = NonNegIntMatrix::from_rows(&a).unwrap();
        let b = NonNegIntMatrix::from_rows(&b).unwrap();
        let t = tensor_product(&a, &b, &SpectralCaps::default()).unwrap();
        let (ra, rb, rt) = (perron_root(&a, 1e-10).unwrap(), perron_root(&b, 1e-10).unwrap(), perron_root(&t, 1e-10).unwrap());
        let prod = ra.bracket().mul_nonneg(&rb.bracket());
        prop_assert!(prod.overlaps(&rt.bracket(), 1e-8), "{:?} vs {:?}", prod, rt);
    }

    #[test]
    fn power_is_repeated_product(rows in small_matrix(4, 3), n in 1u32..8) {
        let a = NonNegIntMatrix::from_rows(&rows).unwrap();
        let mut direct = a.clone();
        for _ in 1..n {
            direct = direct.mul(&a);
        }
        prop_assert_eq!(matrix_power(&a, n, &SpectralCaps::default()).unwrap(), direct);
    }

    #[test]
    fn condensation_is_a_topological_partition(rows in small_matrix(6, 1)) {
        let a = NonNegIntMatrix::from_rows(&rows).unwrap();
        let c = scc_decompose(&a);
        let mut seen: Vec<usize> = c.components.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..a.dim()).collect::<Vec<_>>());
        for i in 0..a.dim() {
            for j in a.successors(i) {
                prop_assert!(c.component_of[i] <= c.component_of[j]);
            }
        }
        prop_assert!(c.edges.iter().all(|&(x, y)| x < y));
    }

    #[test]
    fn determinant_is_multiplicative(a in signed_matrix(4).prop_flat_map(|a| {
        let n = a.len();
        (Just(a), prop::collection::vec(prop::collection::vec(-3i64..=3, n), n))
    })) {
        let (a, b) = a;
        let (a, b) = (SignedIntMatrix::from_rows(&a).unwrap(), SignedIntMatrix::from_rows(&b).unwrap());
        prop_assert_eq!(a.mul(&b).determinant(), a.determinant() * b.determinant());
    }

    #[test]
    fn exterior_power_is_functorial(pair in signed_matrix(4).prop_flat_map(|a| {
        let n = a.len();
        (Just(a), prop::collection::vec(prop::collection::vec(-3i64..=3, n), n), 0..=n)
    })) {
        let (a, b, p) = pair;
        let (a, b) = (SignedIntMatrix::from_rows(&a).unwrap(), SignedIntMatrix::from_rows(&b).unwrap());
        let lhs = exterior_power(&a.mul(&b), p).unwrap();
        let rhs = exterior_power(&a, p).unwrap().mul(&exterior_power(&b, p).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn top_exterior_power_is_determinant(rows in signed_matrix(4)) {
        let a = SignedIntMatrix::from_rows(&rows).unwrap();
        let top = exterior_power(&a, a.dim()).unwrap();
        prop_assert_eq!(top.dim(), 1);
        prop_assert_eq!(top.get(0, 0), &a.determinant());
        let empty = exterior_power(&a, 0).unwrap();
        prop_assert_eq!(empty.get(0, 0), &BigInt::from(1));
    }
}
