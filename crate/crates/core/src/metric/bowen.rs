//! Greedy `(n, ε)`-spanning sets over a dyadic sample grid.

use serde::{Deserialize, Serialize};

use super::{MetricError, MetricSystem};

/// Parameters of one Bowen estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowenParams {
    pub horizon: u32,
    pub eps: f64,
    /// Grid spacing is `2^-grid_bits` in the coordinate.
    pub grid_bits: u32,
}

impl Default for BowenParams {
    fn default() -> Self {
        BowenParams { horizon: 14, eps: 1.0 / 1024.0, grid_bits: 14 }
    }
}

pub const MAX_GRID_BITS: u32 = 24;

/// Span counts and the growth estimates read off them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowenEstimate {
    /// `S(j)` for `j = 1, 2, …`, up to the horizon or the first saturated
    /// count, whichever comes first.
    pub span_counts: Vec<u64>,
    pub grid_points: u64,
    /// The two largest horizons at which the grid still resolves the
    /// spanning set, larger first.
    pub horizons: [u32; 2],
    /// Growth rate at each of `horizons`.
    pub estimates: [f64; 2],
    /// The estimate at the largest usable horizon.
    pub estimate: f64,
    /// `|estimates[0] − estimates[1]|`.
    pub diagnostic: f64,
    /// `|g(j) − g(j−1)|` for each usable horizon `j ≥ 3`, in increasing `j`.
    pub diagnostics: Vec<f64>,
}

/// Greedy spanning set size for Bowen balls of length `horizon`, scanning
/// the grid in ascending coordinate order. A point is covered when some
/// earlier center stays strictly within `eps` of it for `horizon` steps.
pub fn span_count(sys: &MetricSystem, grid: &[f64], horizon: u32, eps: f64) -> u64 {
    let h = horizon.max(1) as usize;
    let r = sys.space.coordinate_radius(eps);
    let wraps = sys.space.wraps();
    let mut centers: Vec<f64> = Vec::new();
    let mut orbits: Vec<f64> = Vec::new();
    let mut orbit = vec![0.0; h];
    let close = |orbits: &[f64], c: usize, orbit: &[f64]| {
        let co = &orbits[c * h..(c + 1) * h];
        co.iter().zip(orbit).all(|(&a, &b)| sys.distance(a, b) < eps)
    };
    for &t in grid {
        let mut x = t;
        for slot in orbit.iter_mut() {
            *slot = x;
            x = sys.eval(x);
        }
        let lo = centers.partition_point(|&c| c < t - r);
        let mut covered = (lo..centers.len()).rev().any(|c| close(&orbits, c, &orbit));
        if !covered && wraps && t + r > 1.0 {
            let hi = centers.partition_point(|&c| c < t + r - 1.0);
            covered = (0..hi.min(lo)).any(|c| close(&orbits, c, &orbit));
        }
        if !covered {
            centers.push(t);
            orbits.extend_from_slice(&orbit);
        }
    }
    centers.len() as u64
}

/// Growth rate between horizons `m = ⌈j/2⌉` and `j`:
/// `ln(S(j)/S(m)) / (j − m)`. Measuring over the later half of the
/// orbit discards the transient count `S(1)` that depends only on `eps`.
fn growth(counts: &[u64], j: usize) -> f64 {
    let m = j.div_ceil(2).max(1);
    if j <= m {
        return 0.0;
    }
    let (sj, sm) = (counts[j - 1] as f64, counts[m - 1] as f64);
    ((sj / sm).ln() / (j - m) as f64).max(0.0)
}

/// Bowen–Dinaburg entropy estimate.
///
/// The span counts `S(j)` are computed for every `j ≤ horizon`. Horizons
/// where `S(j)` exceeds a quarter of the grid are treated as saturated
/// (the grid can no longer separate orbits), so the estimate is read at
/// the two largest unsaturated horizons.
pub fn bowen_entropy_estimate(sys: &MetricSystem, params: &BowenParams) -> Result<BowenEstimate, MetricError> {
    let BowenParams { horizon, eps, grid_bits } = *params;
    if horizon < 2 {
        return Err(MetricError::Horizon(horizon));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(MetricError::Epsilon(eps));
    }
    if grid_bits > MAX_GRID_BITS {
        return Err(MetricError::GridCap { bits: grid_bits, cap: MAX_GRID_BITS });
    }
    let required = required_grid_bits(sys, eps);
    if grid_bits < required {
        return Err(MetricError::GridTooCoarse { eps, bits: grid_bits, required });
    }
    let grid = sys.space.grid(grid_bits);
    let n = grid.len() as u64;
    let mut counts = Vec::with_capacity(horizon as usize);
    for j in 1..=horizon {
        let s = span_count(sys, &grid, j, eps);
        counts.push(s);
        if s * 4 > n {
            break;
        }
    }
    let usable = counts.iter().take_while(|&&s| s * 4 <= n).count();
    if usable < 2 {
        return Err(MetricError::Saturated { horizon: usable as u32, bits: grid_bits });
    }
    let g: Vec<f64> = (1..=usable).map(|j| growth(&counts, j)).collect();
    let diagnostics = (3..=usable).map(|j| (g[j - 1] - g[j - 2]).abs()).collect();
    let estimates = [g[usable - 1], g[usable - 2]];
    Ok(BowenEstimate {
        span_counts: counts,
        grid_points: n,
        horizons: [usable as u32, usable as u32 - 1],
        estimates,
        estimate: estimates[0],
        diagnostic: (estimates[0] - estimates[1]).abs(),
        diagnostics,
    })
}

/// Smallest `bits` with neighbouring grid points closer than `eps/4`.
pub fn required_grid_bits(sys: &MetricSystem, eps: f64) -> u32 {
    (1..=64)
        .find(|&b| sys.space.grid_gap((-(b as f64)).exp2()) < eps / 4.0)
        .unwrap_or(64)
}
