//! Numerical entropy of maps on the circle, the interval and the projective
//! line: Bowen spanning-set counts and exact lap counts.
//!
//! Values produced here are estimates, not certified brackets.

mod bowen;
mod pl;
mod system;

use thiserror::Error;

pub use bowen::{
    bowen_entropy_estimate, required_grid_bits, span_count, BowenEstimate, BowenParams,
    MAX_GRID_BITS,
};
pub use pl::{lap_entropy, lap_entropy_with_cap, LapEntropy, Piece, PiecewiseLinearMap, DEFAULT_MAX_PIECES};
pub use system::{MetricMap, MetricSystem, Space};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("horizon must be at least 2, got {0}")]
    Horizon(u32),
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("grid 2^-{bits} is too coarse for epsilon {eps}; need at least 2^-{required}")]
    GridTooCoarse { eps: f64, bits: u32, required: u32 },
    #[error("grid 2^-{bits} exceeds cap 2^-{cap}")]
    GridCap { bits: u32, cap: u32 },
    #[error("span counts saturate the grid 2^-{bits} by horizon {horizon}; refine the grid or enlarge epsilon")]
    Saturated { horizon: u32, bits: u32 },
    #[error("invalid piecewise linear map: {0}")]
    InvalidMap(String),
    #[error("iterate exceeds {cap} pieces; lap counts so far {partial:?}")]
    PieceCap { cap: usize, partial: Vec<u64> },
    #[error("unknown system `{name}`; available: {available}")]
    UnknownSystem { name: String, available: String },
    #[error("bad parameters for `{name}`: {reason}")]
    Parameters { name: String, reason: String },
}

pub const BUILTIN_NAMES: [&str; 5] =
    ["circle_doubling", "circle_identity", "circle_rotation(angle)", "real_affine(a,b)", "interval_tent(s)"];

const MAX_AFFINE_COEFF: f64 = 1e6;
const MAX_TENT_LAPS: u32 = 16;

fn split_call(name: &str) -> Result<(&str, Vec<&str>), MetricError> {
    let name = name.trim();
    match name.find('(') {
        None => Ok((name, Vec::new())),
        Some(open) => {
            let rest = name[open + 1..].strip_suffix(')').ok_or_else(|| MetricError::Parameters {
                name: name.to_string(),
                reason: "missing `)`".into(),
            })?;
            let args = if rest.trim().is_empty() { Vec::new() } else { rest.split(',').map(str::trim).collect() };
            Ok((name[..open].trim(), args))
        }
    }
}

/// Look up a named system, e.g. `circle_doubling`, `real_affine(2,0)`,
/// `interval_tent(3)`.
pub fn builtin(name: &str) -> Result<MetricSystem, MetricError> {
    let (head, args) = split_call(name)?;
    let bad = |reason: &str| MetricError::Parameters { name: name.trim().to_string(), reason: reason.to_string() };
    let floats = |want: usize| -> Result<Vec<f64>, MetricError> {
        if args.len() != want {
            return Err(bad(&format!("expected {want} arguments, got {}", args.len())));
        }
        args.iter()
            .map(|a| a.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(&format!("`{a}` is not a number"))))
            .collect()
    };
    let label = name.trim().to_string();
    match head {
        "circle_doubling" => {
            floats(0)?;
            Ok(MetricSystem::new(label, Space::Circle, MetricMap::CircleDoubling))
        }
        "circle_identity" => {
            floats(0)?;
            Ok(MetricSystem::new(label, Space::Circle, MetricMap::CircleIdentity))
        }
        "circle_rotation" => {
            let v = floats(1)?;
            Ok(MetricSystem::new(label, Space::Circle, MetricMap::CircleRotation(v[0])))
        }
        "real_affine" => {
            let v = floats(2)?;
            let (a, b) = (v[0], v[1]);
            if a == 0.0 {
                return Err(bad("a must be nonzero"));
            }
            if a.abs() > MAX_AFFINE_COEFF || b.abs() > MAX_AFFINE_COEFF {
                return Err(bad("coefficients must lie in [-1e6, 1e6]"));
            }
            Ok(MetricSystem::new(label, Space::ProjectiveLine, MetricMap::ProjectiveAffine { a, b }))
        }
        "interval_tent" => {
            if args.len() != 1 {
                return Err(bad("expected 1 argument"));
            }
            let s: u32 = args[0].parse().map_err(|_| bad("lap count must be a positive integer"))?;
            if s == 0 || s > MAX_TENT_LAPS {
                return Err(bad("lap count must lie in 1..=16"));
            }
            let map = PiecewiseLinearMap::tent(s)?;
            Ok(MetricSystem::new(label, Space::Interval, MetricMap::PiecewiseLinear(map)))
        }
        _ => Err(MetricError::UnknownSystem { name: name.trim().to_string(), available: BUILTIN_NAMES.join(", ") }),
    }
}

impl MetricSystem {
    /// The underlying piecewise linear interval map, if any.
    pub fn piecewise_linear(&self) -> Option<&PiecewiseLinearMap> {
        match &self.map {
            MetricMap::PiecewiseLinear(pl) => Some(pl),
            _ => None,
        }
    }
}

/// Rotation number of a map on a wrapping space, provided the grid samples
/// are consistent with an orientation-preserving degree-one homeomorphism
/// (a lift that is increasing with total displacement one). Such maps have
/// zero entropy.
pub fn rotation_number(sys: &MetricSystem, bits: u32, iterations: u32) -> Option<f64> {
    if !sys.space.wraps() {
        return None;
    }
    let grid = sys.space.grid(bits);
    // Lift displacement in (-1/2, 1/2] at each sample; must vary slowly.
    let disp = |t: f64| {
        let d = sys.eval(t) - t;
        d - d.round()
    };
    let mut prev_img = sys.eval(grid[0]);
    let mut winding = 0.0;
    for &t in grid.iter().skip(1).chain(std::iter::once(&1.0)) {
        let img = if t >= 1.0 { sys.eval(0.0) } else { sys.eval(t) };
        let mut step = img - prev_img;
        if step < 0.0 {
            step += 1.0;
        }
        if step >= 0.5 {
            return None;
        }
        winding += step;
        prev_img = img;
    }
    if (winding - 1.0).abs() > 1e-6 {
        return None;
    }
    let mut x = 0.0f64;
    let mut lift = 0.0f64;
    for _ in 0..iterations.max(1) {
        lift += disp(x);
        x = sys.eval(x);
    }
    Some(lift / f64::from(iterations.max(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_lookup() {
        assert_eq!(builtin("circle_doubling").unwrap().space, Space::Circle);
        let p = builtin("real_affine(2, 0)").unwrap();
        assert_eq!(p.map, MetricMap::ProjectiveAffine { a: 2.0, b: 0.0 });
        assert!(builtin("interval_tent(3)").unwrap().piecewise_linear().is_some());
        match builtin("henon") {
            Err(MetricError::UnknownSystem { available, .. }) => assert!(available.contains("circle_doubling")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(builtin("real_affine(0,1)"), Err(MetricError::Parameters { .. })));
        assert!(matches!(builtin("interval_tent(0)"), Err(MetricError::Parameters { .. })));
        assert!(matches!(builtin("circle_doubling(1)"), Err(MetricError::Parameters { .. })));
    }

    #[test]
    fn rotation_numbers() {
        let r = rotation_number(&builtin("circle_rotation(0.25)").unwrap(), 10, 100).unwrap();
        assert!((r - 0.25).abs() < 1e-12);
        let p = rotation_number(&builtin("real_affine(1,1)").unwrap(), 12, 2000).unwrap();
        assert!(p.abs() < 1e-2, "{p}");
        assert!(rotation_number(&builtin("real_affine(2,0)").unwrap(), 12, 100).is_some());
        assert_eq!(rotation_number(&builtin("circle_doubling").unwrap(), 10, 10), None);
    }

    #[test]
    fn coarse_grid_names_resolution() {
        let sys = builtin("real_affine(2,0)").unwrap();
        let params = BowenParams { horizon: 4, eps: 1.0 / 1024.0, grid_bits: 14 };
        match bowen_entropy_estimate(&sys, &params) {
            Err(MetricError::GridTooCoarse { required, .. }) => assert_eq!(required, 15),
            other => panic!("{other:?}"),
        }
    }
}
