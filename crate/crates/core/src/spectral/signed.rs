//! Integer matrices with signed entries: exterior powers, characteristic
//! polynomials and certified spectral radii.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::{format_rows, parse_rows};
use super::SpectralError;
use crate::bracket::Bracket;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedIntMatrix {
    k: usize,
    entries: Vec<BigInt>,
}

impl SignedIntMatrix {
    pub fn new(k: usize, entries: Vec<BigInt>) -> Result<Self, SpectralError> {
        if k == 0 {
            return Err(SpectralError::EmptyMatrix);
        }
        if entries.len() != k * k {
            return Err(SpectralError::NotSquare { rows: k, len: entries.len() });
        }
        Ok(SignedIntMatrix { k, entries })
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self, SpectralError> {
        let k = rows.len();
        let mut entries = Vec::with_capacity(k * k);
        for row in rows {
            let row = row.as_ref();
            if row.len() != k {
                return Err(SpectralError::NotSquare { rows: k, len: row.len() });
            }
            entries.extend(row.iter().map(|&v| BigInt::from(v)));
        }
        Self::new(k, entries)
    }

    pub fn identity(k: usize) -> Self {
        let mut entries = vec![BigInt::zero(); k * k];
        for i in 0..k {
            entries[i * k + i] = BigInt::one();
        }
        SignedIntMatrix { k, entries }
    }

    pub fn diagonal(diag: &[i64]) -> Self {
        let k = diag.len();
        let mut m = Self::identity(k);
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * k + i] = BigInt::from(d);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.k + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &SignedIntMatrix) -> SignedIntMatrix {
        assert_eq!(self.k, other.k, "dimension mismatch");
        let k = self.k;
        let mut out = vec![BigInt::zero(); k * k];
        for i in 0..k {
            for l in 0..k {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..k {
                    out[i * k + j] += a * other.get(l, j);
                }
            }
        }
        SignedIntMatrix { k, entries: out }
    }

    pub fn pow(&self, n: u32) -> SignedIntMatrix {
        let mut result = SignedIntMatrix::identity(self.k);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.entries.iter().map(|e| e.abs()).max().unwrap_or_default()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        bareiss_det(self.k, self.entries.clone())
    }

    /// Minor on the given sorted row and column index sets.
    fn minor(&self, rows: &[usize], cols: &[usize]) -> BigInt {
        let p = rows.len();
        if p == 0 {
            return BigInt::one();
        }
        let mut sub = Vec::with_capacity(p * p);
        for &i in rows {
            for &j in cols {
                sub.push(self.get(i, j).clone());
            }
        }
        bareiss_det(p, sub)
    }

    /// Coefficients of `det(zI − M)`, lowest degree first; the last entry is 1.
    pub fn characteristic_polynomial(&self) -> Vec<BigInt> {
        // Faddeev–LeVerrier with exact integer division.
        let k = self.k;
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = BigInt::one();
        let mut aux = SignedIntMatrix { k, entries: vec![BigInt::zero(); k * k] };
        for m in 1..=k {
            let mut next = self.mul(&aux);
            for i in 0..k {
                next.entries[i * k + i] += &coeffs[k - m + 1];
            }
            let am = self.mul(&next);
            let trace: BigInt = (0..k).map(|i| am.get(i, i)).sum();
            let (q, r) = trace.div_rem(&BigInt::from(m));
            debug_assert!(r.is_zero(), "Faddeev–LeVerrier trace not divisible");
            coeffs[k - m] = -q;
            aux = next;
        }
        coeffs
    }
}

fn bareiss_det(n: usize, mut a: Vec<BigInt>) -> BigInt {
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k * n + k].is_zero() {
            match (k + 1..n).find(|&r| !a[r * n + k].is_zero()) {
                Some(r) => {
                    for c in 0..n {
                        a.swap(k * n + c, r * n + c);
                    }
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = v / &prev;
            }
        }
        prev = a[k * n + k].clone();
    }
    sign * &a[n * n - 1]
}

/// All `p`-subsets of `0..k` in lexicographic order.
pub fn sorted_subsets(k: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            if k - i < p - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, k, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, p, &mut Vec::with_capacity(p), &mut out);
    out
}

/// The `p`-th exterior power: the matrix of `p × p` minors indexed by sorted
/// row/column subsets in lexicographic order. `∧⁰M = [1]`.
pub fn exterior_power(m: &SignedIntMatrix, p: usize) -> Result<SignedIntMatrix, SpectralError> {
    let k = m.dim();
    if p > k {
        return Err(SpectralError::ExteriorDegree { p, k });
    }
    let subsets = sorted_subsets(k, p);
    let mut entries = Vec::with_capacity(subsets.len() * subsets.len());
    for rows in &subsets {
        for cols in &subsets {
            entries.push(m.minor(rows, cols));
        }
    }
    SignedIntMatrix::new(subsets.len(), entries)
}

/// True when every root of the polynomial lies strictly inside `|z| < num/den`.
///
/// Schur–Cohn–Jury reduction on `q(z) = p(z·num/den)`, all in exact integers.
pub(crate) fn roots_strictly_inside(coeffs: &[BigInt], num: &BigInt, den: &BigInt) -> bool {
    let d = coeffs.len() - 1;
    let mut q: Vec<BigInt> = Vec::with_capacity(d + 1);
    let mut num_pow = BigInt::one();
    let den_pows: Vec<BigInt> = {
        let mut v = vec![BigInt::one(); d + 1];
        for i in 1..=d {
            v[i] = &v[i - 1] * den;
        }
        v
    };
    for (i, c) in coeffs.iter().enumerate() {
        q.push(c * &num_pow * &den_pows[d - i]);
        num_pow *= num;
    }
    strip_content(&mut q);

    while q.len() > 1 {
        let d = q.len() - 1;
        let (q0, qd) = (q[0].abs(), q[d].abs());
        if q0 >= qd {
            return false;
        }
        let mut next: Vec<BigInt> = (0..d)
            .map(|j| &q[d] * &q[j + 1] - &q[0] * &q[d - 1 - j])
            .collect();
        strip_content(&mut next);
        q = next;
    }
    !q[0].is_zero()
}

fn strip_content(q: &mut [BigInt]) {
    let g = q.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for c in q.iter_mut() {
            *c /= &g;
        }
    }
}

/// Certified bracket on `max |eigenvalue|` of a signed integer matrix.
///
/// Bisects on the radius `r`, deciding "all roots of the characteristic
/// polynomial have modulus < r" exactly. An all-zero matrix gives `[0, 0]`.
pub fn spectral_radius_signed(m: &SignedIntMatrix, tol: f64) -> Result<Bracket, SpectralError> {
    if !(tol > 0.0) {
        return Err(SpectralError::InvalidTolerance(tol));
    }
    if m.is_zero() {
        return Ok(Bracket::zero());
    }
    if m.dim() == 1 {
        let v = m.get(0, 0).abs();
        return Ok(exact_or_outward(&v));
    }
    let mut coeffs = m.characteristic_polynomial();
    // Factor out roots at zero.
    let zeros = coeffs.iter().take_while(|c| c.is_zero()).count();
    coeffs.drain(..zeros);
    if coeffs.len() == 1 {
        return Ok(Bracket::zero());
    }
    if coeffs.len() == 2 {
        // z + c0: single nonzero root −c0.
        return Ok(exact_or_outward(&coeffs[0].abs()));
    }

    let cauchy = BigInt::one() + coeffs.iter().map(|c| c.abs()).max().expect("nonempty");
    let mut lo = BigRational::zero();
    let mut hi = BigRational::from_integer(cauchy);
    let two = BigRational::from_integer(BigInt::from(2));
    while (&hi - &lo).to_f64().unwrap_or(f64::INFINITY) > 0.5 * tol {
        let mid = (&lo + &hi) / &two;
        if roots_strictly_inside(&coeffs, mid.numer(), mid.denom()) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lower = lo.to_f64().unwrap_or(0.0).next_down().max(0.0);
    let upper = hi.to_f64().unwrap_or(f64::INFINITY).next_up();
    Ok(Bracket::new(lower, upper))
}

fn exact_or_outward(v: &BigInt) -> Bracket {
    let f = v.to_f64().unwrap_or(f64::INFINITY);
    if v.bits() <= 53 {
        Bracket::exact(f)
    } else {
        Bracket::new(f.next_down(), f.next_up())
    }
}

/// Growth estimate `log(max_ij |(Mⁿ)_ij|) / n`; an independent check on `log ρ(M)`.
pub fn log_entry_growth(m: &SignedIntMatrix, n: u32) -> f64 {
    let top = m.pow(n).max_abs_entry();
    if top.is_zero() {
        return f64::NEG_INFINITY;
    }
    big_ln(&top) / f64::from(n)
}

/// Natural log of a positive big integer without overflow.
pub(crate) fn big_ln(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().expect("64-bit head");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

impl FromStr for SignedIntMatrix {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rows: Vec<Vec<BigInt>> = parse_rows(s)?;
        let k = rows.len();
        SignedIntMatrix::new(k, rows.into_iter().flatten().collect())
    }
}

impl fmt::Display for SignedIntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        format_rows(f, self.k, &self.entries)
    }
}

impl Serialize for SignedIntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignedIntMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> SignedIntMatrix {
        text.parse().unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn exterior_power_edges() {
        let m = s("1 2 3 / 4 5 6 / 7 8 10");
        assert_eq!(exterior_power(&m, 0).unwrap(), s("1"));
        assert_eq!(exterior_power(&m, 1).unwrap(), m);
        assert_eq!(exterior_power(&m, 3).unwrap(), SignedIntMatrix::from_rows(&[[m.determinant().to_i64().unwrap()]]).unwrap());
        assert_eq!(m.determinant(), BigInt::from(-3));
        assert_eq!(exterior_power(&SignedIntMatrix::diagonal(&[2, 3]), 2).unwrap(), s("6"));
        assert!(exterior_power(&m, 4).is_err());
    }

    #[test]
    fn second_exterior_power_of_3x3_has_lex_minors() {
        let m = s("1 2 3 / 4 5 6 / 7 8 10");
        let w = exterior_power(&m, 2).unwrap();
        assert_eq!(w.dim(), 3);
        // rows {0,1}, cols {0,1}: 1*5 - 2*4
        assert_eq!(*w.get(0, 0), BigInt::from(-3));
        // rows {1,2}, cols {0,2}: 4*10 - 6*7
        assert_eq!(*w.get(2, 1), BigInt::from(-2));
    }

    #[test]
    fn characteristic_polynomial_small() {
        // det(zI - [[1,1],[1,0]]) = z² - z - 1
        assert_eq!(s("1 1 / 1 0").characteristic_polynomial(), ints(&[-1, -1, 1]));
        assert_eq!(
            SignedIntMatrix::diagonal(&[2, 3]).characteristic_polynomial(),
            ints(&[6, -5, 1])
        );
    }

    #[test]
    fn schur_cohn_boundaries() {
        let p = ints(&[-2, 1]); // z - 2
        let b = |v: i64| BigInt::from(v);
        assert!(roots_strictly_inside(&p, &b(3), &b(1)));
        assert!(!roots_strictly_inside(&p, &b(2), &b(1)));
        assert!(!roots_strictly_inside(&p, &b(1), &b(1)));
        // z² + 1 has roots ±i
        let q = ints(&[1, 0, 1]);
        assert!(roots_strictly_inside(&q, &b(11), &b(10)));
        assert!(!roots_strictly_inside(&q, &b(1), &b(1)));
    }

    #[test]
    fn radius_examples() {
        let r = spectral_radius_signed(&SignedIntMatrix::diagonal(&[2, 3]), 1e-9).unwrap();
        assert!(r.contains(3.0) && r.width() <= 1e-9, "{r}");
        let r = spectral_radius_signed(&s("0 -1 / 1 1"), 1e-9).unwrap();
        assert!(r.contains(1.0) && r.width() <= 1e-9, "{r}");
        let r = spectral_radius_signed(&SignedIntMatrix::identity(3), 1e-9).unwrap();
        assert!(r.contains(1.0));
        let r = spectral_radius_signed(&s("0 0 / 0 0"), 1e-9).unwrap();
        assert_eq!(r, Bracket::zero());
        let r = spectral_radius_signed(&s("0 1 / 0 0"), 1e-9).unwrap();
        assert_eq!(r, Bracket::zero());
    }

    #[test]
    fn rotation_of_order_six() {
        let m = s("0 -1 / 1 1");
        assert_eq!(m.pow(6), SignedIntMatrix::identity(2));
        assert!(log_entry_growth(&m, 24).abs() < 0.05);
    }
}
