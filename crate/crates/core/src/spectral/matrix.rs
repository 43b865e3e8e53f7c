use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{SpectralCaps, SpectralError};

/// Dense square matrix of nonnegative arbitrary-precision integers, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NonNegIntMatrix {
    n: usize,
    entries: Vec<BigUint>,
}

impl NonNegIntMatrix {
    pub fn new(n: usize, entries: Vec<BigUint>) -> Result<Self, SpectralError> {
        if n == 0 {
            return Err(SpectralError::EmptyMatrix);
        }
        if entries.len() != n * n {
            return Err(SpectralError::NotSquare { rows: n, len: entries.len() });
        }
        Ok(NonNegIntMatrix { n, entries })
    }

    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self, SpectralError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(SpectralError::NotSquare { rows: n, len: row.len() });
            }
            entries.extend(row.iter().map(|&v| BigUint::from(v)));
        }
        Self::new(n, entries)
    }

    pub fn zeros(n: usize) -> Self {
        NonNegIntMatrix { n, entries: vec![BigUint::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = BigUint::one();
        }
        m
    }

    /// The all-ones matrix (full shift transition matrix).
    pub fn full(n: usize) -> Self {
        NonNegIntMatrix { n, entries: vec![BigUint::one(); n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigUint {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigUint) {
        self.entries[i * self.n + j] = value;
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        !self.get(i, j).is_zero()
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.has_edge(i, j))
    }

    pub fn predecessors(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.has_edge(i, j))
    }

    pub fn is_zero_one(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero() || e.is_one())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    /// 0/1 matrix with the same zero pattern.
    pub fn support(&self) -> NonNegIntMatrix {
        let entries = self
            .entries
            .iter()
            .map(|e| if e.is_zero() { BigUint::zero() } else { BigUint::one() })
            .collect();
        NonNegIntMatrix { n: self.n, entries }
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn submatrix(&self, indices: &[usize]) -> Result<NonNegIntMatrix, SpectralError> {
        let k = indices.len();
        let mut entries = Vec::with_capacity(k * k);
        for &i in indices {
            for &j in indices {
                entries.push(self.get(i, j).clone());
            }
        }
        NonNegIntMatrix::new(k, entries)
    }

    /// `P A Pᵀ` where row/column `i` of the result is row/column `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> NonNegIntMatrix {
        assert_eq!(perm.len(), self.n);
        self.submatrix(perm).expect("permutation of a nonempty matrix")
    }

    pub fn entry_sum(&self) -> BigUint {
        self.entries.iter().sum()
    }

    pub fn row_sum(&self, i: usize) -> BigUint {
        self.entries[i * self.n..(i + 1) * self.n].iter().sum()
    }

    /// Largest entry bit length.
    pub fn max_bits(&self) -> u64 {
        self.entries.iter().map(BigUint::bits).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &NonNegIntMatrix) -> NonNegIntMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = vec![BigUint::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out[i * n + j] += a * b;
                    }
                }
            }
        }
        NonNegIntMatrix { n, entries: out }
    }

    /// Matrix times vector, exact.
    pub fn mul_vec(&self, v: &[BigUint]) -> Vec<BigUint> {
        (0..self.n)
            .map(|i| {
                let mut acc = BigUint::zero();
                for (j, vj) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !vj.is_zero() {
                        acc += a * vj;
                    }
                }
                acc
            })
            .collect()
    }

    /// Entries as `f64`, row-major. Entries beyond `f64` range saturate to infinity.
    pub fn to_f64_entries(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.to_f64().unwrap_or(f64::INFINITY)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[BigUint]> {
        self.entries.chunks(self.n)
    }

    pub(crate) fn check_dim(&self, caps: &SpectralCaps) -> Result<(), SpectralError> {
        if self.n > caps.max_dim {
            return Err(SpectralError::DimensionCap { dim: self.n, cap: caps.max_dim });
        }
        Ok(())
    }
}

/// Parse the `1 1 / 1 0` text format: rows separated by `/`, entries by whitespace.
pub(crate) fn parse_rows<T: FromStr>(text: &str) -> Result<Vec<Vec<T>>, SpectralError> {
    let rows: Vec<Vec<T>> = text
        .split('/')
        .map(|row| {
            row.split_whitespace()
                .map(|tok| {
                    tok.parse::<T>()
                        .map_err(|_| SpectralError::Parse(format!("bad matrix entry `{tok}`")))
                })
                .collect::<Result<Vec<T>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().all(|r| r.is_empty()) {
        return Err(SpectralError::Parse("empty matrix".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(SpectralError::Parse(format!(
                "row {} has {} entries, expected {n}",
                i + 1,
                r.len()
            )));
        }
    }
    Ok(rows)
}

pub(crate) fn format_rows<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    n: usize,
    entries: &[T],
) -> fmt::Result {
    for (i, row) in entries.chunks(n).enumerate() {
        if i > 0 {
            f.write_str(" / ")?;
        }
        for (j, e) in row.iter().enumerate() {
            if j > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
    }
    Ok(())
}

impl FromStr for NonNegIntMatrix {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rows: Vec<Vec<BigUint>> = parse_rows(s)?;
        let n = rows.len();
        NonNegIntMatrix::new(n, rows.into_iter().flatten().collect())
    }
}

impl fmt::Display for NonNegIntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_rows(f, self.n, &self.entries)
    }
}

impl Serialize for NonNegIntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NonNegIntMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let m: NonNegIntMatrix = "1 1 / 1 0".parse().unwrap();
        assert_eq!(m.dim(), 2);
        assert!(m.has_edge(1, 0) && !m.has_edge(1, 1));
        assert_eq!(m.to_string(), "1 1 / 1 0");
    }

    #[test]
    fn parse_rejects_ragged_and_negative() {
        assert!("1 1 / 1".parse::<NonNegIntMatrix>().is_err());
        assert!("1 -1 / 1 0".parse::<NonNegIntMatrix>().is_err());
        assert!("".parse::<NonNegIntMatrix>().is_err());
        assert!("x".parse::<NonNegIntMatrix>().is_err());
    }

    #[test]
    fn mul_golden_mean_cubed() {
        let a: NonNegIntMatrix = "1 1 / 1 0".parse().unwrap();
        let a3 = a.mul(&a).mul(&a);
        assert_eq!(a3.to_string(), "3 2 / 2 1");
    }
}
