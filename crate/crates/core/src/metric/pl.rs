//! Piecewise linear interval maps with exact rational data and lap counting.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::MetricError;

/// One linear piece `[x0, x1] → ` the segment from `y0` to `y1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub x0: BigRational,
    pub x1: BigRational,
    pub y0: BigRational,
    pub y1: BigRational,
}

impl Piece {
    fn direction(&self) -> i8 {
        match self.y1.cmp(&self.y0) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
        }
    }

    fn at(&self, x: &BigRational) -> BigRational {
        if self.x1 == self.x0 {
            return self.y0.clone();
        }
        &self.y0 + (&self.y1 - &self.y0) * (x - &self.x0) / (&self.x1 - &self.x0)
    }

    fn preimage(&self, y: &BigRational) -> BigRational {
        &self.x0 + (y - &self.y0) * (&self.x1 - &self.x0) / (&self.y1 - &self.y0)
    }
}

/// A self-map of `[0, 1]` that is linear on each piece of a finite partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearMap {
    pieces: Vec<Piece>,
    continuous: bool,
    #[serde(skip)]
    starts: Vec<f64>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl PiecewiseLinearMap {
    pub fn new(pieces: Vec<Piece>) -> Result<Self, MetricError> {
        let zero = BigRational::zero();
        let one = BigRational::one();
        if pieces.is_empty() {
            return Err(MetricError::InvalidMap("no pieces".into()));
        }
        if pieces[0].x0 != zero || pieces[pieces.len() - 1].x1 != one {
            return Err(MetricError::InvalidMap("pieces must cover [0, 1]".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.x0 >= p.x1 {
                return Err(MetricError::InvalidMap(format!("piece {i} is empty or reversed")));
            }
            for y in [&p.y0, &p.y1] {
                if *y < zero || *y > one {
                    return Err(MetricError::InvalidMap(format!("piece {i} leaves [0, 1]")));
                }
            }
            if i > 0 && pieces[i - 1].x1 != p.x0 {
                return Err(MetricError::InvalidMap(format!("gap or overlap before piece {i}")));
            }
        }
        let continuous = pieces.windows(2).all(|w| w[0].y1 == w[1].y0);
        let starts = pieces.iter().map(|p| p.x0.to_f64().unwrap_or(0.0)).collect();
        Ok(PiecewiseLinearMap { pieces, continuous, starts })
    }

    /// Continuous map through the points `(breaks[i], values[i])`.
    pub fn from_breakpoints(breaks: &[BigRational], values: &[BigRational]) -> Result<Self, MetricError> {
        if breaks.len() != values.len() || breaks.len() < 2 {
            return Err(MetricError::InvalidMap("need matching breakpoints and values".into()));
        }
        let pieces = (0..breaks.len() - 1)
            .map(|i| Piece {
                x0: breaks[i].clone(),
                x1: breaks[i + 1].clone(),
                y0: values[i].clone(),
                y1: values[i + 1].clone(),
            })
            .collect();
        Self::new(pieces)
    }

    /// The `laps`-lap tent map with slopes `±laps`, starting at 0.
    pub fn tent(laps: u32) -> Result<Self, MetricError> {
        if laps == 0 {
            return Err(MetricError::InvalidMap("tent needs at least one lap".into()));
        }
        let l = i64::from(laps);
        let breaks: Vec<BigRational> = (0..=l).map(|k| rat(k, l)).collect();
        let values: Vec<BigRational> = (0..=l).map(|k| rat(k % 2, 1)).collect();
        Self::from_breakpoints(&breaks, &values)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    fn piece_index_f64(&self, t: f64) -> usize {
        let starts: Vec<f64>;
        let s = if self.starts.len() == self.pieces.len() {
            &self.starts
        } else {
            starts = self.pieces.iter().map(|p| p.x0.to_f64().unwrap_or(0.0)).collect();
            &starts
        };
        s.partition_point(|&x0| x0 <= t).saturating_sub(1)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let p = &self.pieces[self.piece_index_f64(t)];
        let x0 = p.x0.to_f64().unwrap_or(0.0);
        let x1 = p.x1.to_f64().unwrap_or(1.0);
        let y0 = p.y0.to_f64().unwrap_or(0.0);
        let y1 = p.y1.to_f64().unwrap_or(0.0);
        (y0 + (y1 - y0) * (t - x0) / (x1 - x0)).clamp(0.0, 1.0)
    }

    /// Index of the piece containing `y`, right-continuous at breakpoints.
    fn piece_index(&self, y: &BigRational) -> usize {
        self.pieces.partition_point(|p| p.x0 <= *y).saturating_sub(1)
    }

    pub fn eval(&self, y: &BigRational) -> BigRational {
        self.pieces[self.piece_index(y)].at(y)
    }

    /// Pieces of `self ∘ g` for `g` given by its pieces.
    fn compose_after(&self, g: &[Piece], cap: usize) -> Option<Vec<Piece>> {
        let mut out = Vec::with_capacity(g.len() * 2);
        for p in g {
            if p.y0 == p.y1 {
                let v = self.eval(&p.y0);
                out.push(Piece { x0: p.x0.clone(), x1: p.x1.clone(), y0: v.clone(), y1: v });
                continue;
            }
            let (lo, hi) = if p.y0 < p.y1 { (&p.y0, &p.y1) } else { (&p.y1, &p.y0) };
            let mut cuts: Vec<BigRational> = self
                .pieces
                .iter()
                .skip(1)
                .map(|q| q.x0.clone())
                .filter(|b| b > lo && b < hi)
                .collect();
            if p.y0 > p.y1 {
                cuts.reverse();
            }
            let mut xs = vec![p.x0.clone()];
            xs.extend(cuts.iter().map(|c| p.preimage(c)));
            xs.push(p.x1.clone());
            for w in xs.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                let ya = p.at(a);
                let yb = p.at(b);
                let mid = (&ya + &yb) / BigRational::from_integer(BigInt::from(2));
                let q = &self.pieces[self.piece_index(&mid)];
                out.push(Piece { x0: a.clone(), x1: b.clone(), y0: q.at(&ya), y1: q.at(&yb) });
            }
            if out.len() > cap {
                return None;
            }
        }
        Some(out)
    }

    /// Lap counts of `f¹, …, f^n_max`. On hitting the piece cap the error
    /// carries the counts computed so far.
    pub fn lap_counts(&self, n_max: u32, max_pieces: usize) -> Result<Vec<u64>, MetricError> {
        let mut counts = Vec::with_capacity(n_max as usize);
        let mut current = self.pieces.clone();
        for n in 1..=n_max {
            if n > 1 {
                current = match self.compose_after(&current, max_pieces) {
                    Some(p) => p,
                    None => return Err(MetricError::PieceCap { cap: max_pieces, partial: counts }),
                };
            }
            counts.push(count_laps(&current));
        }
        Ok(counts)
    }
}

/// Maximal intervals of monotonicity; flat pieces join either neighbour.
fn count_laps(pieces: &[Piece]) -> u64 {
    let mut laps = 1u64;
    let mut dir = 0i8;
    let mut prev_end: Option<&BigRational> = None;
    for p in pieces {
        let d = p.direction();
        if let Some(end) = prev_end {
            // A jump against the running direction starts a new lap.
            let jump = (&p.y0 - end).signum();
            let jump_dir = if jump.is_positive() { 1 } else if jump.is_negative() { -1 } else { 0 };
            if jump_dir != 0 {
                if dir != 0 && jump_dir != dir {
                    laps += 1;
                    dir = jump_dir;
                } else if dir == 0 {
                    dir = jump_dir;
                }
            }
        }
        if d != 0 {
            if dir != 0 && d != dir {
                laps += 1;
            }
            dir = d;
        }
        prev_end = Some(&p.y1);
    }
    laps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LapEntropy {
    /// `ln(laps(f^n_max)) / n_max`.
    pub estimate: f64,
    pub horizon: u32,
    pub laps: Vec<u64>,
}

pub const DEFAULT_MAX_PIECES: usize = 1 << 20;

/// Lap-count growth `ln ℓ(fⁿ)/n` at `n = n_max`.
pub fn lap_entropy(map: &PiecewiseLinearMap, n_max: u32) -> Result<LapEntropy, MetricError> {
    lap_entropy_with_cap(map, n_max, DEFAULT_MAX_PIECES)
}

pub fn lap_entropy_with_cap(
    map: &PiecewiseLinearMap,
    n_max: u32,
    max_pieces: usize,
) -> Result<LapEntropy, MetricError> {
    if n_max < 2 {
        return Err(MetricError::Horizon(n_max));
    }
    let laps = map.lap_counts(n_max, max_pieces)?;
    let last = *laps.last().expect("n_max ≥ 2");
    Ok(LapEntropy { estimate: (last as f64).ln() / f64::from(n_max), horizon: n_max, laps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_lap_counts_are_powers() {
        let t2 = PiecewiseLinearMap::tent(2).unwrap();
        assert_eq!(t2.lap_counts(6, 1 << 20).unwrap(), vec![2, 4, 8, 16, 32, 64]);
        let t3 = PiecewiseLinearMap::tent(3).unwrap();
        assert_eq!(t3.lap_counts(4, 1 << 20).unwrap(), vec![3, 9, 27, 81]);
    }

    #[test]
    fn monotone_map_has_one_lap() {
        let half = rat(1, 2);
        let m = PiecewiseLinearMap::from_breakpoints(&[rat(0, 1), half.clone(), rat(1, 1)], &[rat(0, 1), rat(1, 4), rat(1, 1)]).unwrap();
        let e = lap_entropy(&m, 8).unwrap();
        assert_eq!(e.laps, vec![1; 8]);
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn exact_composition() {
        let t2 = PiecewiseLinearMap::tent(2).unwrap();
        assert_eq!(t2.eval(&rat(1, 3)), rat(2, 3));
        assert_eq!(t2.eval(&rat(3, 4)), rat(1, 2));
        assert!((t2.eval_f64(0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn piece_cap_returns_partial() {
        let t2 = PiecewiseLinearMap::tent(2).unwrap();
        match lap_entropy_with_cap(&t2, 10, 64) {
            Err(MetricError::PieceCap { partial, .. }) => assert_eq!(partial, vec![2, 4, 8, 16, 32, 64]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation() {
        assert!(PiecewiseLinearMap::from_breakpoints(&[rat(0, 1), rat(1, 2)], &[rat(0, 1), rat(1, 1)]).is_err());
        assert!(PiecewiseLinearMap::from_breakpoints(&[rat(0, 1), rat(1, 1)], &[rat(0, 1), rat(2, 1)]).is_err());
        assert!(lap_entropy(&PiecewiseLinearMap::tent(2).unwrap(), 1).is_err());
    }
}
