//! Closed real intervals used for every certified quantity in the crate.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A closed interval `[lower, upper]` known to contain some real quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower <= upper, "inverted bracket [{lower}, {upper}]");
        Bracket { lower, upper }
    }

    pub fn exact(value: f64) -> Self {
        Bracket { lower: value, upper: value }
    }

    pub fn zero() -> Self {
        Bracket::exact(0.0)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// True when the two intervals intersect after widening each side by `slack`.
    pub fn overlaps(&self, other: &Bracket, slack: f64) -> bool {
        self.lower <= other.upper + slack && other.lower <= self.upper + slack
    }

    /// Certified `self ≤ other` up to `slack`: some value of `self` is at most some value of `other`.
    pub fn possibly_le(&self, other: &Bracket, slack: f64) -> bool {
        self.lower <= other.upper + slack
    }

    /// Certified strict `self > other`: every value of `self` exceeds every value of `other`.
    pub fn certainly_gt(&self, other: &Bracket) -> bool {
        self.lower > other.upper
    }

    /// Natural logarithm of a bracket of positive reals, rounded outward.
    ///
    /// A lower endpoint of zero maps to negative infinity.
    pub fn ln(&self) -> Bracket {
        let lo = match self.lower {
            x if x <= 0.0 => f64::NEG_INFINITY,
            1.0 => 0.0,
            x => x.ln().next_down(),
        };
        let hi = match self.upper {
            x if x <= 0.0 => f64::NEG_INFINITY,
            1.0 => 0.0,
            x => x.ln().next_up(),
        };
        Bracket { lower: lo, upper: hi }
    }

    pub fn add(&self, other: &Bracket) -> Bracket {
        Bracket {
            lower: (self.lower + other.lower).next_down(),
            upper: (self.upper + other.upper).next_up(),
        }
    }

    pub fn sub(&self, other: &Bracket) -> Bracket {
        Bracket {
            lower: (self.lower - other.upper).next_down(),
            upper: (self.upper - other.lower).next_up(),
        }
    }

    /// Product of two brackets of nonnegative reals.
    pub fn mul_nonneg(&self, other: &Bracket) -> Bracket {
        Bracket {
            lower: (self.lower * other.lower).next_down().max(0.0),
            upper: (self.upper * other.upper).next_up(),
        }
    }

    /// Multiply by a nonnegative exact scalar.
    pub fn scale(&self, k: f64) -> Bracket {
        debug_assert!(k >= 0.0);
        Bracket {
            lower: (self.lower * k).next_down(),
            upper: (self.upper * k).next_up(),
        }
    }

    /// Integer power of a bracket of nonnegative reals.
    pub fn powi_nonneg(&self, n: u32) -> Bracket {
        let mut acc = Bracket::exact(1.0);
        for _ in 0..n {
            acc = acc.mul_nonneg(self);
        }
        acc
    }

    /// The bracket containing `max(a, b)` for any `a` in `self` and `b` in `other`.
    pub fn max(&self, other: &Bracket) -> Bracket {
        Bracket { lower: self.lower.max(other.lower), upper: self.upper.max(other.upper) }
    }

    /// The bracket containing `min(a, b)` for any `a` in `self` and `b` in `other`.
    pub fn min(&self, other: &Bracket) -> Bracket {
        Bracket { lower: self.lower.min(other.lower), upper: self.upper.min(other.upper) }
    }

    /// Widen symmetrically by `band`.
    pub fn widen(&self, band: f64) -> Bracket {
        Bracket { lower: self.lower - band, upper: self.upper + band }
    }

    /// Raise the lower endpoint to at least `floor` (for quantities known to be ≥ `floor`).
    pub fn clamp_below(&self, floor: f64) -> Bracket {
        Bracket { lower: self.lower.max(floor), upper: self.upper.max(floor) }
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12}, {:.12}]", self.lower, self.upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_is_outward() {
        let b = Bracket::exact(2.0).ln();
        assert!(b.contains(std::f64::consts::LN_2));
        assert!(b.width() < 1e-15);
    }

    #[test]
    fn min_max_overlap() {
        let a = Bracket::new(1.0, 2.0);
        let b = Bracket::new(1.5, 3.0);
        assert_eq!(a.max(&b), Bracket::new(1.5, 3.0));
        assert_eq!(a.min(&b), Bracket::new(1.0, 2.0));
        assert!(a.overlaps(&b, 0.0));
        assert!(!Bracket::exact(0.0).overlaps(&Bracket::exact(1.0), 0.5));
        assert!(Bracket::new(3.1, 4.0).certainly_gt(&a));
    }
}
