//! Certified Perron roots of nonnegative integer matrices.
//!
//! Each strongly connected component is handled separately. For an irreducible
//! block `B` and any positive vector `x`, the Collatz–Wielandt quotients satisfy
//! `min_i (Bx)_i/x_i ≤ ρ(B) ≤ max_i (Bx)_i/x_i`. The probe vector comes from
//! power iteration on `B + I`, which is primitive whenever `B` is irreducible,
//! so periodic blocks converge too. Quotients are widened by a rounding margin
//! so the reported bracket contains the exact root.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{scc_decompose, NonNegIntMatrix, SpectralCaps, SpectralError};
use crate::bracket::Bracket;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerronEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Largest iteration count used by any component.
    pub iterations: u64,
    /// The matrix is nilpotent (its graph has no cycle); the root is exactly 0.
    pub exact_zero: bool,
}

impl PerronEstimate {
    pub fn bracket(&self) -> Bracket {
        Bracket::new(self.lower, self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerronConfig {
    pub tol: f64,
    pub max_iterations: u64,
}

impl Default for PerronConfig {
    fn default() -> Self {
        PerronConfig { tol: DEFAULT_TOL, max_iterations: DEFAULT_MAX_ITERATIONS }
    }
}

/// Certified bracket on the spectral radius of `a` with the default iteration cap.
pub fn perron_root(a: &NonNegIntMatrix, tol: f64) -> Result<PerronEstimate, SpectralError> {
    perron_root_with(a, PerronConfig { tol, ..PerronConfig::default() }, &SpectralCaps::default())
}

pub fn perron_root_with(
    a: &NonNegIntMatrix,
    config: PerronConfig,
    caps: &SpectralCaps,
) -> Result<PerronEstimate, SpectralError> {
    if !(config.tol > 0.0) {
        return Err(SpectralError::InvalidTolerance(config.tol));
    }
    a.check_dim(caps)?;

    let cond = scc_decompose(a);
    let mut lower = 0.0f64;
    let mut upper = 0.0f64;
    let mut iterations = 0u64;
    let mut any_cycle = false;
    let mut failed = false;

    for (c, comp) in cond.components.iter().enumerate() {
        if !cond.is_cyclic(a, c) {
            continue;
        }
        any_cycle = true;
        let outcome = component_bracket(a, comp, config);
        let (lo, hi, it, ok) = match outcome {
            Ok((lo, hi, it)) => (lo, hi, it, true),
            Err((lo, hi, it)) => (lo, hi, it, false),
        };
        failed |= !ok;
        lower = lower.max(lo);
        upper = upper.max(hi);
        iterations = iterations.max(it);
    }

    let estimate = PerronEstimate { lower, upper, iterations, exact_zero: !any_cycle };
    if failed || (any_cycle && upper - lower > config.tol) {
        return Err(SpectralError::NonConvergence { best: estimate });
    }
    Ok(estimate)
}

/// Bracket for one irreducible block. `Err` carries the best bracket reached.
fn component_bracket(
    a: &NonNegIntMatrix,
    comp: &[usize],
    config: PerronConfig,
) -> Result<(f64, f64, u64), (f64, f64, u64)> {
    let k = comp.len();
    if k == 1 {
        let c = a.get(comp[0], comp[0]);
        return match c.to_f64() {
            Some(v) if c.bits() <= 53 => Ok((v, v, 0)),
            Some(v) if v.is_finite() => Ok((v.next_down(), v.next_up(), 0)),
            _ => Err((0.0, f64::INFINITY, 0)),
        };
    }

    // Constant row sums give the root exactly.
    let row_sums: Vec<BigUint> = comp
        .iter()
        .map(|&i| comp.iter().map(|&j| a.get(i, j)).sum::<BigUint>())
        .collect();
    if row_sums.iter().all(|s| *s == row_sums[0]) && row_sums[0].bits() <= 53 {
        let v = row_sums[0].to_f64().expect("53-bit integer fits f64");
        return Ok((v, v, 0));
    }

    // Sparse rows restricted to the component, local indices.
    let rows: Vec<Vec<(usize, f64)>> = comp
        .iter()
        .map(|&i| {
            comp.iter()
                .enumerate()
                .filter(|&(_, &j)| a.has_edge(i, j))
                .map(|(lj, &j)| (lj, a.get(i, j).to_f64().unwrap_or(f64::INFINITY)))
                .collect()
        })
        .collect();
    if rows.iter().flatten().any(|&(_, w)| !w.is_finite()) {
        return Err((0.0, f64::INFINITY, 0));
    }
    let max_row = rows.iter().map(Vec::len).max().unwrap_or(0);
    let margin = (max_row as f64 + 4.0) * f64::EPSILON;

    let mut x = vec![1.0f64; k];
    let mut y = vec![0.0f64; k];
    let mut terms: Vec<f64> = Vec::with_capacity(max_row);
    let mut best_lo = 0.0f64;
    let mut best_hi = f64::INFINITY;

    for it in 0..=config.max_iterations {
        for (i, row) in rows.iter().enumerate() {
            // Sorted summation makes the result independent of index order.
            terms.clear();
            terms.extend(row.iter().map(|&(j, w)| w * x[j]));
            terms.sort_unstable_by(f64::total_cmp);
            y[i] = terms.iter().sum();
        }

        let mut rmin = f64::INFINITY;
        let mut rmax = 0.0f64;
        let mut valid = true;
        for i in 0..k {
            if x[i] <= 0.0 || !x[i].is_finite() {
                valid = false;
                break;
            }
            let r = y[i] / x[i];
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
        if valid {
            best_lo = best_lo.max((rmin * (1.0 - margin)).max(0.0));
            best_hi = best_hi.min(rmax * (1.0 + margin));
            if best_hi - best_lo <= config.tol {
                return Ok((best_lo, best_hi, it));
            }
            if rmin == rmax {
                // Exact eigenvector already; the margin is the floor.
                return Err((best_lo, best_hi, it));
            }
        }

        let mut norm = 0.0f64;
        for i in 0..k {
            x[i] += y[i];
            norm = norm.max(x[i]);
        }
        if !(norm > 0.0) || !norm.is_finite() {
            return Err((best_lo, best_hi, it));
        }
        for v in &mut x {
            *v /= norm;
        }
    }
    Err((best_lo, best_hi, config.max_iterations))
}

/// Collatz–Wielandt quotient range `(min_i (Ax)_i/x_i, max_i (Ax)_i/x_i)` for a positive probe.
pub fn collatz_wielandt(a: &NonNegIntMatrix, x: &[f64]) -> (f64, f64) {
    let n = a.dim();
    assert_eq!(x.len(), n);
    let e = a.to_f64_entries();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..n {
        let y: f64 = (0..n).map(|j| e[i * n + j] * x[j]).sum();
        let r = y / x[i];
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}
