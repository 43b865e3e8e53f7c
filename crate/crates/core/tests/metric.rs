use etale_entropy::metric::{
    bowen_entropy_estimate, builtin, lap_entropy, rotation_number, span_count, BowenParams, MetricError,
    PiecewiseLinearMap,
};

const LN2: f64 = std::f64::consts::LN_2;

fn params(horizon: u32, eps_bits: i32, grid_bits: u32) -> BowenParams {
    BowenParams { horizon, eps: (-(eps_bits as f64)).exp2(), grid_bits }
}

#[test]
fn doubling_near_ln2() {
    let est = bowen_entropy_estimate(&builtin("circle_doubling").unwrap(), &params(14, 10, 14)).unwrap();
    assert!((est.estimate - LN2).abs() <= 0.05, "{est:?}");
    assert!(est.diagnostic <= 0.05);
}

#[test]
fn identity_is_flat() {
    let sys = builtin("circle_identity").unwrap();
    for n in [2, 5, 14] {
        let est = bowen_entropy_estimate(&sys, &params(n, 10, 14)).unwrap();
        assert!(est.estimate <= 0.01, "n={n}: {est:?}");
    }
}

#[test]
fn projective_extensions_of_affine_maps_are_flat() {
    for name in ["real_affine(2,0)", "real_affine(1,1)", "real_affine(0.5,3)", "real_affine(-2,1)"] {
        let sys = builtin(name).unwrap();
        let est = bowen_entropy_estimate(&sys, &params(14, 10, 16)).unwrap();
        assert!(est.estimate <= 0.02, "{name}: {est:?}");
    }
}

#[test]
fn rotation_number_oracle_agrees_with_zero_entropy() {
    // x+1 and 2x both fix infinity: rotation number 0, a circle homeomorphism.
    for name in ["real_affine(1,1)", "real_affine(2,0)"] {
        let rho = rotation_number(&builtin(name).unwrap(), 12, 4000).unwrap();
        assert!(rho.abs() < 0.01, "{name}: {rho}");
    }
}

#[test]
fn span_counts_monotone() {
    for (name, grid_bits) in [("circle_doubling", 14), ("circle_identity", 14), ("real_affine(1,1)", 15), ("interval_tent(2)", 14)] {
        let sys = builtin(name).unwrap();
        let grid = sys.space.grid(grid_bits);
        let eps = [1.0 / 64.0, 1.0 / 256.0];
        for &e in &eps {
            let counts: Vec<u64> = (1..=6).map(|j| span_count(&sys, &grid, j, e)).collect();
            assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{name} eps {e}: {counts:?}");
        }
        for j in [1, 4] {
            let coarse = span_count(&sys, &grid, j, eps[0]);
            let fine = span_count(&sys, &grid, j, eps[1]);
            assert!(coarse <= fine, "{name} horizon {j}");
        }
    }
}

#[test]
fn iterate_scaling_on_doubling() {
    let sys = builtin("circle_doubling").unwrap();
    for k in 1..=3u32 {
        let base = bowen_entropy_estimate(&sys, &params(3 * k, 6, 16)).unwrap().estimate;
        let it = bowen_entropy_estimate(&sys.iterate(k), &params(3, 6, 16)).unwrap().estimate;
        assert!((it - f64::from(k) * base).abs() <= 0.1, "k={k}: {it} vs {base}");
    }
}

#[test]
fn bowen_agrees_with_laps_on_tents() {
    for s in [2u32, 3] {
        let sys = builtin(&format!("interval_tent({s})")).unwrap();
        let bowen = bowen_entropy_estimate(&sys, &params(14, 6, 18)).unwrap().estimate;
        let laps = lap_entropy(sys.piecewise_linear().unwrap(), 12).unwrap().estimate;
        assert!((bowen - laps).abs() <= 0.05, "tent {s}: {bowen} vs {laps}");
    }
}

#[test]
fn lap_entropy_examples() {
    let t2 = lap_entropy(&PiecewiseLinearMap::tent(2).unwrap(), 16).unwrap();
    assert!((t2.estimate - LN2).abs() <= 0.02);
    assert_eq!(t2.laps[15], 1 << 16);
    let t3 = lap_entropy(&PiecewiseLinearMap::tent(3).unwrap(), 10).unwrap();
    assert!((t3.estimate - 3f64.ln()).abs() <= 0.03);
    assert_eq!(lap_entropy(&PiecewiseLinearMap::tent(1).unwrap(), 8).unwrap().estimate, 0.0);
}

#[test]
fn explicit_failures() {
    let sys = builtin("circle_doubling").unwrap();
    let err = bowen_entropy_estimate(&sys, &params(14, 10, 11)).unwrap_err();
    assert_eq!(err, MetricError::GridTooCoarse { eps: 1.0 / 1024.0, bits: 11, required: 13 });
    assert!(err.to_string().contains("2^-13"));
    assert!(matches!(bowen_entropy_estimate(&sys, &params(1, 10, 14)), Err(MetricError::Horizon(1))));
    assert!(matches!(
        bowen_entropy_estimate(&sys, &BowenParams { eps: 0.0, ..params(4, 10, 14) }),
        Err(MetricError::Epsilon(_))
    ));
    assert!(matches!(
        bowen_entropy_estimate(&sys, &params(14, 12, 14)),
        Err(MetricError::GridTooCoarse { required: 15, .. })
    ));
    // sixteen laps outgrow a coarse grid after one step
    let tent = builtin("interval_tent(16)").unwrap();
    assert!(matches!(bowen_entropy_estimate(&tent, &params(14, 6, 10)), Err(MetricError::Saturated { .. })));
}
