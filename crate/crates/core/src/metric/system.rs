use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::pl::PiecewiseLinearMap;

/// The compact metric spaces that host numerical systems. Points are stored
/// by a coordinate `t`: `[0, 1)` for the circle and the projective line,
/// `[0, 1]` for the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    /// `ℝ/ℤ` with arc-length distance.
    Circle,
    /// `[0, 1]` with the usual distance.
    Interval,
    /// `ℝ ∪ {∞}`; coordinate `t` is the point `tan(π(t − ½))`, `t = 0` is `∞`.
    /// Distance is the chordal metric `2|x − y| / √((1+x²)(1+y²))`, which in
    /// the coordinate reads `2|sin(π(t − s))|`.
    ProjectiveLine,
}

impl Space {
    pub fn distance(&self, t: f64, s: f64) -> f64 {
        match self {
            Space::Circle => {
                let d = (t - s).abs() % 1.0;
                d.min(1.0 - d)
            }
            Space::Interval => (t - s).abs(),
            Space::ProjectiveLine => 2.0 * (PI * (t - s)).sin().abs(),
        }
    }

    pub fn wraps(&self) -> bool {
        !matches!(self, Space::Interval)
    }

    /// Coordinate radius containing every point within distance `eps`.
    pub fn coordinate_radius(&self, eps: f64) -> f64 {
        match self {
            Space::Circle | Space::Interval => eps,
            Space::ProjectiveLine => {
                if eps >= 2.0 {
                    0.5
                } else {
                    ((eps / 2.0).asin() / PI).next_up()
                }
            }
        }
    }

    /// Largest distance between neighbouring grid points at spacing `step`.
    pub fn grid_gap(&self, step: f64) -> f64 {
        match self {
            Space::Circle | Space::Interval => step,
            Space::ProjectiveLine => 2.0 * (PI * step).sin(),
        }
    }

    /// Evenly spaced coordinates at spacing `2^-bits`, ascending.
    pub fn grid(&self, bits: u32) -> Vec<f64> {
        let n = 1u64 << bits;
        let step = 1.0 / n as f64;
        let count = if self.wraps() { n } else { n + 1 };
        (0..count).map(|k| k as f64 * step).collect()
    }

    /// Coordinate of a real number (projective line only).
    pub fn from_real(x: f64) -> f64 {
        wrap_unit(x.atan() / PI + 0.5)
    }

    /// Real number at a projective coordinate; `t = 0` gives infinity.
    pub fn to_real(t: f64) -> f64 {
        if t == 0.0 {
            f64::INFINITY
        } else {
            (PI * (t - 0.5)).tan()
        }
    }
}

fn wrap_unit(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// An evaluable self-map in the coordinate of its space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMap {
    CircleDoubling,
    CircleIdentity,
    /// Rotation `t ↦ t + angle` on the circle.
    CircleRotation(f64),
    /// The extension of `x ↦ a·x + b` to `ℝ ∪ {∞}` fixing `∞`.
    ProjectiveAffine { a: f64, b: f64 },
    PiecewiseLinear(PiecewiseLinearMap),
    /// The map composed with itself `n` times.
    Iterate(Box<MetricMap>, u32),
}

impl MetricMap {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            MetricMap::CircleDoubling => wrap_unit(2.0 * t),
            MetricMap::CircleIdentity => t,
            MetricMap::CircleRotation(angle) => wrap_unit(t + angle),
            MetricMap::ProjectiveAffine { a, b } => {
                // Act on the direction (cos α, sin α) by [[1, 0], [b, a]].
                let alpha = PI * (t - 0.5);
                let (s, c) = alpha.sin_cos();
                let (c2, s2) = (c, a * s + b * c);
                let mut beta = s2.atan2(c2);
                // Directions modulo π, folded into [−π/2, π/2).
                if beta >= PI / 2.0 {
                    beta -= PI;
                } else if beta < -PI / 2.0 {
                    beta += PI;
                }
                wrap_unit(beta / PI + 0.5)
            }
            MetricMap::PiecewiseLinear(pl) => pl.eval_f64(t),
            MetricMap::Iterate(inner, n) => (0..*n).fold(t, |x, _| inner.eval(x)),
        }
    }
}

/// A self-map of a compact metric space, sampled on a dyadic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSystem {
    pub name: String,
    pub space: Space,
    pub map: MetricMap,
}

impl MetricSystem {
    pub fn new(name: impl Into<String>, space: Space, map: MetricMap) -> Self {
        MetricSystem { name: name.into(), space, map }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.map.eval(t)
    }

    pub fn distance(&self, t: f64, s: f64) -> f64 {
        self.space.distance(t, s)
    }

    /// The map composed with itself `n` times.
    pub fn iterate(&self, n: u32) -> MetricSystem {
        MetricSystem {
            name: format!("{}^{n}", self.name),
            space: self.space,
            map: MetricMap::Iterate(Box::new(self.map.clone()), n),
        }
    }

    /// Spot-check symmetry and the triangle inequality on grid triples.
    /// Returns the first violating triple.
    pub fn check_metric(&self, bits: u32) -> Option<(f64, f64, f64)> {
        let grid = self.space.grid(bits);
        let n = grid.len();
        let stride = (n / 17).max(1);
        for i in (0..n).step_by(stride) {
            for j in (0..n).step_by(stride + 1) {
                for k in (0..n).step_by(stride + 2) {
                    let (x, y, z) = (grid[i], grid[j], grid[k]);
                    let dxy = self.distance(x, y);
                    let sym = (dxy - self.distance(y, x)).abs() > 1e-15;
                    let tri = self.distance(x, z) > dxy + self.distance(y, z) + 1e-12;
                    if sym || tri {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    /// Every evaluation lands back in the space.
    pub fn check_total(&self, bits: u32) -> bool {
        let wraps = self.space.wraps();
        self.space.grid(bits).into_iter().map(|t| self.eval(t)).all(|y| {
            if wraps {
                (0.0..1.0).contains(&y)
            } else {
                (0.0..=1.0).contains(&y)
            }
        })
    }
}

impl fmt::Display for MetricSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chordal_matches_formula() {
        let (x, y) = (0.7f64, -2.5f64);
        let direct = 2.0 * (x - y).abs() / ((1.0 + x * x) * (1.0 + y * y)).sqrt();
        let via = Space::ProjectiveLine.distance(Space::from_real(x), Space::from_real(y));
        assert!((direct - via).abs() < 1e-12);
        // distance to infinity
        let to_inf = Space::ProjectiveLine.distance(0.0, Space::from_real(x));
        assert!((to_inf - 2.0 / (1.0 + x * x).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn projective_affine_agrees_with_reals() {
        let m = MetricMap::ProjectiveAffine { a: 2.0, b: 1.0 };
        for x in [-3.0, -0.25, 0.0, 0.5, 7.0] {
            let t = m.eval(Space::from_real(x));
            assert!((Space::to_real(t) - (2.0 * x + 1.0)).abs() < 1e-9, "x={x}");
        }
        assert_eq!(m.eval(0.0), 0.0);
    }

    #[test]
    fn metrics_pass_spot_checks() {
        for space in [Space::Circle, Space::Interval, Space::ProjectiveLine] {
            let sys = MetricSystem::new("id", space, MetricMap::CircleIdentity);
            assert_eq!(sys.check_metric(8), None, "{space:?}");
            assert!(sys.check_total(8));
        }
    }

    #[test]
    fn doubling_is_exact_on_dyadics() {
        let m = MetricMap::CircleDoubling;
        assert_eq!(m.eval(0.75), 0.5);
        assert_eq!(m.eval(0.5), 0.0);
        assert_eq!(MetricMap::Iterate(Box::new(m), 3).eval(0.125 + 1.0 / 1024.0), 1.0 / 128.0);
    }
}
