//! Dynamical degrees of monomial maps and the gap to an entropy value.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::correspondence::FiniteCorrespondence;
use super::AlgdynError;
use crate::bracket::Bracket;
use crate::etale::Provenance;
use crate::spectral::{exterior_power, log_entry_growth, spectral_radius_signed, SignedIntMatrix};

/// Iterate used by the entry-growth cross-check.
pub const GROWTH_ITERATE: u32 = 24;
/// Largest `|det|` whose covering model is built as a full relation.
pub const MAX_MODEL_DEGREE: u64 = 64;

/// The map `z ↦ z^M` of the torus for an integer matrix `M` with nonzero
/// determinant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialMap {
    matrix: SignedIntMatrix,
    det: BigInt,
}

impl MonomialMap {
    pub fn new(matrix: SignedIntMatrix) -> Result<Self, AlgdynError> {
        let det = matrix.determinant();
        if det.is_zero() {
            return Err(AlgdynError::Singular);
        }
        Ok(MonomialMap { matrix, det })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SignedIntMatrix {
        &self.matrix
    }

    /// `|det M|`, the topological degree.
    pub fn degree(&self) -> BigInt {
        self.det.abs()
    }

    /// Symbolic model of the degree-`|det M|` covering: the full relation on
    /// `|det M|` points.
    pub fn covering_model(&self) -> Result<FiniteCorrespondence, AlgdynError> {
        match self.degree().to_u64() {
            Some(d) if d <= MAX_MODEL_DEGREE => Ok(FiniteCorrespondence::full(d as usize)),
            _ => Err(AlgdynError::ModelTooLarge { degree: self.degree().to_string(), cap: MAX_MODEL_DEGREE }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeProfile {
    /// `λ_0, …, λ_k`.
    pub lambdas: Vec<Bracket>,
    pub provenance: Provenance,
    /// `log(max |entry of (∧ᵖM)ⁿ|) / n` at `n = GROWTH_ITERATE`, when computed.
    pub growth: Option<Vec<f64>>,
}

impl DegreeProfile {
    /// Degrees supplied by the caller, e.g. for maps without a monomial model.
    pub fn declared(lambdas: &[f64]) -> Result<Self, AlgdynError> {
        if lambdas.is_empty() || lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(AlgdynError::DeclaredDegrees);
        }
        Ok(DegreeProfile {
            lambdas: lambdas.iter().map(|&l| Bracket::exact(l)).collect(),
            provenance: Provenance::Declared,
            growth: None,
        })
    }

    /// `λ_p² ≥ λ_{p−1}·λ_{p+1}` for every `p`, up to relative slack `tol`.
    pub fn is_log_concave(&self, tol: f64) -> bool {
        self.lambdas.windows(3).all(|w| {
            let sq = w[1].mul_nonneg(&w[1]);
            let outer = w[0].mul_nonneg(&w[2]);
            outer.possibly_le(&sq, tol * sq.upper.max(1.0))
        })
    }

    /// `max_p ln λ_p` and the first `p` attaining the largest lower end.
    pub fn log_bound(&self) -> (Bracket, usize) {
        let logs: Vec<Bracket> = self.lambdas.iter().map(|l| l.clamp_below(f64::MIN_POSITIVE).ln()).collect();
        let mut best = 0;
        let mut acc = logs[0];
        for (p, l) in logs.iter().enumerate().skip(1) {
            acc = acc.max(l);
            if l.lower > logs[best].lower {
                best = p;
            }
        }
        (acc, best)
    }
}

/// `λ_p` as the spectral radius of the `p`-th exterior power of `M`, with
/// the entry-growth rate of its `GROWTH_ITERATE`-th power alongside.
pub fn monomial_dynamical_degrees(m: &MonomialMap, tol: f64) -> Result<DegreeProfile, AlgdynError> {
    let k = m.dim();
    let mut lambdas = Vec::with_capacity(k + 1);
    let mut growth = Vec::with_capacity(k + 1);
    for p in 0..=k {
        let wedge = exterior_power(m.matrix(), p)?;
        lambdas.push(spectral_radius_signed(&wedge, tol)?);
        growth.push(log_entry_growth(&wedge, GROWTH_ITERATE));
    }
    Ok(DegreeProfile { lambdas, provenance: Provenance::Certified, growth: Some(growth) })
}

/// Integer value of `λ_p`: an integer `r` inside the certified bracket such
/// that the characteristic polynomial `χ` of `∧ᵖM` has a root on the circle
/// `|z| = r`, detected as a common root of `χ(z)` and `zⁿχ(r²/z)`.
pub fn integer_degree(m: &MonomialMap, profile: &DegreeProfile, p: usize) -> Result<Option<BigInt>, AlgdynError> {
    let b = profile.lambdas[p];
    let r = b.midpoint().round();
    if !b.contains(r) || !(r.abs() < 9.0e15) {
        return Ok(None);
    }
    let r = BigInt::from(r as i64);
    let chi = exterior_power(m.matrix(), p)?.characteristic_polynomial();
    let n = chi.len() - 1;
    let r2 = &r * &r;
    // coefficient of z^(n−i) in zⁿχ(r²/z) is c_i·r^(2i)
    let mut mirrored = vec![BigInt::zero(); n + 1];
    let mut pow = BigInt::one();
    for (i, c) in chi.iter().enumerate() {
        mirrored[n - i] = c * &pow;
        pow *= &r2;
    }
    Ok((poly_gcd_degree(&chi, &mirrored) > 0).then_some(r))
}

/// Degree of the gcd of two integer polynomials (lowest degree first).
fn poly_gcd_degree(a: &[BigInt], b: &[BigInt]) -> usize {
    let to_rat = |v: &[BigInt]| -> Vec<BigRational> {
        let mut out: Vec<BigRational> = v.iter().map(|c| BigRational::from_integer(c.clone())).collect();
        while out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        out
    };
    let (mut a, mut b) = (to_rat(a), to_rat(b));
    while !b.is_empty() {
        // a mod b
        while a.len() >= b.len() {
            let shift = a.len() - b.len();
            let q = a.last().expect("nonempty") / b.last().expect("nonempty");
            for (i, c) in b.iter().enumerate() {
                a[i + shift] -= &q * c;
            }
            a.pop();
            while a.last().is_some_and(|c| c.is_zero()) {
                a.pop();
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// `max_p ln λ_p`.
    pub bound: Bracket,
    pub argmax: usize,
    pub entropy: Bracket,
    pub entropy_provenance: Provenance,
    /// `bound − entropy`.
    pub gap: Bracket,
    /// A certified entropy above the bound by more than the tolerance.
    pub inconsistent: bool,
}

/// Compare an entropy value with the degree bound `max_p ln λ_p`.
pub fn gromov_yomdin_gap(profile: &DegreeProfile, entropy: Bracket, provenance: Provenance, tol: f64) -> GapReport {
    let (bound, argmax) = profile.log_bound();
    let gap = bound.sub(&entropy);
    let inconsistent = provenance == Provenance::Certified && gap.upper < -tol;
    GapReport { bound, argmax, entropy, entropy_provenance: provenance, gap, inconsistent }
}
