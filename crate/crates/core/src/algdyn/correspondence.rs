//! Correspondences on finite sets, their orbit-sequence shifts, pullbacks
//! along finite surjections and the weighted entropy over a family of them.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::AlgdynError;
use crate::bracket::Bracket;
use crate::etale::Provenance;
use crate::spectral::{perron_root, NonNegIntMatrix};

/// A relation on `{0, …, n−1}` with multiplicities: entry `(i, j)` counts
/// how often `(i, j)` occurs in the graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteCorrespondence {
    multiplicity: NonNegIntMatrix,
}

impl FiniteCorrespondence {
    pub fn new(multiplicity: NonNegIntMatrix) -> Self {
        FiniteCorrespondence { multiplicity }
    }

    /// The graph of a map `i ↦ map[i]`.
    pub fn from_map(map: &[usize]) -> Result<Self, AlgdynError> {
        let n = map.len();
        if n == 0 {
            return Err(AlgdynError::EmptyMap);
        }
        let mut m = NonNegIntMatrix::zeros(n);
        for (i, &j) in map.iter().enumerate() {
            if j >= n {
                return Err(AlgdynError::MapRange { point: i, value: j, size: n });
            }
            m.set(i, j, BigUint::from(1u8));
        }
        Ok(Self::new(m))
    }

    /// Every pair related once.
    pub fn full(n: usize) -> Self {
        Self::new(NonNegIntMatrix::full(n))
    }

    pub fn points(&self) -> usize {
        self.multiplicity.dim()
    }

    pub fn multiplicity(&self) -> &NonNegIntMatrix {
        &self.multiplicity
    }

    pub fn support(&self) -> NonNegIntMatrix {
        self.multiplicity.support()
    }
}

/// Result of removing the points from which no infinite forward orbit starts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trimmed {
    /// The restriction to the kept points, `None` when nothing survives.
    pub correspondence: Option<FiniteCorrespondence>,
    /// Surviving original points, ascending.
    pub kept: Vec<usize>,
    /// Removed original points in removal order.
    pub removed: Vec<usize>,
    /// Rounds that removed at least one point.
    pub passes: usize,
}

impl Trimmed {
    pub fn is_empty(&self) -> bool {
        self.correspondence.is_none()
    }
}

/// Repeatedly delete points with no successor among the remaining points.
pub fn trim_correspondence(c: &FiniteCorrespondence) -> Trimmed {
    let n = c.points();
    let m = c.multiplicity();
    let mut alive = vec![true; n];
    let mut removed = Vec::new();
    let mut passes = 0;
    loop {
        let dead: Vec<usize> = (0..n).filter(|&i| alive[i] && !m.successors(i).any(|j| alive[j])).collect();
        if dead.is_empty() {
            break;
        }
        passes += 1;
        for &i in &dead {
            alive[i] = false;
        }
        removed.extend(dead);
    }
    let kept: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    let correspondence = if kept.is_empty() {
        None
    } else {
        Some(FiniteCorrespondence::new(m.submatrix(&kept).expect("kept indices are in range")))
    };
    Trimmed { correspondence, kept, removed, passes }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEntropy {
    pub bracket: Bracket,
    /// Nothing survives trimming; the entropy is 0 by convention.
    pub empty: bool,
}

/// Entropy of the shift on admissible forward orbit sequences: the log of
/// the Perron root of the trimmed support. Multiplicities do not change the
/// set of sequences and are ignored here.
pub fn gamma_infinity_entropy(c: &FiniteCorrespondence, tol: f64) -> Result<GammaEntropy, AlgdynError> {
    let t = trim_correspondence(c);
    let Some(core) = t.correspondence else {
        return Ok(GammaEntropy { bracket: Bracket::zero(), empty: true });
    };
    // Every remaining point has a successor, so the root is at least 1.
    let rho = perron_root(&core.support(), tol / 4.0)?.bracket();
    Ok(GammaEntropy { bracket: rho.clamp_below(1.0).ln().clamp_below(0.0), empty: false })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// `Z = X`, `d_Z = 1`.
    Identity,
    /// Pullback along the surjection `p: Z → X` given as a table.
    Pullback(Vec<usize>),
    /// `f_Z` and `d_Z` supplied without a checked surjection.
    Declared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedFamilyEntry {
    pub label: String,
    pub kind: EntryKind,
    pub correspondence: FiniteCorrespondence,
    pub degree: u64,
    pub h_top: Bracket,
    /// `h_top − ln d_Z`.
    pub weighted: Bracket,
    pub provenance: Provenance,
}

fn weigh(h: Bracket, degree: u64) -> Bracket {
    if degree == 1 {
        h
    } else {
        h.sub(&Bracket::exact(degree as f64).ln())
    }
}

impl WeightedFamilyEntry {
    pub fn identity(c: &FiniteCorrespondence, tol: f64) -> Result<Self, AlgdynError> {
        let h = gamma_infinity_entropy(c, tol)?.bracket;
        Ok(WeightedFamilyEntry {
            label: "identity".into(),
            kind: EntryKind::Identity,
            correspondence: c.clone(),
            degree: 1,
            h_top: h,
            weighted: h,
            provenance: Provenance::Certified,
        })
    }

    /// An entry whose degree is asserted by the caller.
    pub fn declared(label: impl Into<String>, f_z: FiniteCorrespondence, degree: u64, tol: f64) -> Result<Self, AlgdynError> {
        if degree == 0 {
            return Err(AlgdynError::ZeroDegree);
        }
        let h = gamma_infinity_entropy(&f_z, tol)?.bracket;
        Ok(WeightedFamilyEntry {
            label: label.into(),
            kind: EntryKind::Declared,
            correspondence: f_z,
            degree,
            h_top: h,
            weighted: weigh(h, degree),
            provenance: Provenance::Declared,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.kind == EntryKind::Identity
    }
}

/// Pull `c` back along the surjection `p: Z → X` whose fibers all have the
/// same size `g`: `z → z′` with the multiplicity of `(p(z), p(z′))`, and
/// `d_Z = g`. The identity `p∘f_Z = g·(f∘p)` is checked on every pair.
pub fn pullback_correspondence(
    c: &FiniteCorrespondence,
    p: &[usize],
    tol: f64,
) -> Result<WeightedFamilyEntry, AlgdynError> {
    let n = c.points();
    if p.is_empty() {
        return Err(AlgdynError::EmptyMap);
    }
    let mut fibers = vec![0usize; n];
    for (z, &x) in p.iter().enumerate() {
        if x >= n {
            return Err(AlgdynError::MapRange { point: z, value: x, size: n });
        }
        fibers[x] += 1;
    }
    if let Some(x) = fibers.iter().position(|&s| s == 0) {
        return Err(AlgdynError::NotOnto { point: x });
    }
    let g = fibers[0];
    if fibers.iter().any(|&s| s != g) {
        return Err(AlgdynError::NonConstantFibers { sizes: fibers });
    }
    let m = c.multiplicity();
    let zn = p.len();
    let mut fz = NonNegIntMatrix::zeros(zn);
    for z in 0..zn {
        for w in 0..zn {
            let v = m.get(p[z], p[w]);
            if !v.is_zero() {
                fz.set(z, w, v.clone());
            }
        }
    }
    // (p∘f_Z)(z, x′) sums f_Z over the fiber of x′.
    let g_big = BigUint::from(g);
    for z in 0..zn {
        for x in 0..n {
            let lhs: BigUint = (0..zn).filter(|&w| p[w] == x).map(|w| fz.get(z, w).clone()).sum();
            if lhs != &g_big * m.get(p[z], x) {
                return Err(AlgdynError::Semiconjugacy { point: z, image: x });
            }
        }
    }
    let f_z = FiniteCorrespondence::new(fz);
    let h = gamma_infinity_entropy(&f_z, tol)?.bracket;
    let degree = g.to_u64().expect("fiber size fits in u64");
    Ok(WeightedFamilyEntry {
        label: format!("pullback of degree {g}"),
        kind: EntryKind::Pullback(p.to_vec()),
        correspondence: f_z,
        degree,
        h_top: h,
        weighted: weigh(h, degree),
        provenance: Provenance::Certified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEntropy {
    /// Bracket on the largest weighted value.
    pub value: Bracket,
    pub provenance: Provenance,
    /// Entry with the largest lower end.
    pub argmax: usize,
    pub label: String,
}

/// The largest weighted value `h_top(f_Z) − ln d_Z` over the family, which
/// must contain the identity entry.
pub fn h_et(family: &[WeightedFamilyEntry]) -> Result<WeightedEntropy, AlgdynError> {
    if !family.iter().any(WeightedFamilyEntry::is_identity) {
        return Err(AlgdynError::MissingIdentity);
    }
    let mut value = family[0].weighted;
    let mut provenance = family[0].provenance;
    let mut argmax = 0;
    for (i, e) in family.iter().enumerate().skip(1) {
        value = value.max(&e.weighted);
        provenance = provenance.max(e.provenance);
        if e.weighted.lower > family[argmax].weighted.lower {
            argmax = i;
        }
    }
    Ok(WeightedEntropy { value, provenance, argmax, label: family[argmax].label.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn corr(text: &str) -> FiniteCorrespondence {
        FiniteCorrespondence::new(text.parse().unwrap())
    }

    #[test]
    fn trimming() {
        let f = FiniteCorrespondence::from_map(&[1, 2, 0, 0]).unwrap();
        let t = trim_correspondence(&f);
        assert_eq!((t.passes, t.kept.len()), (0, 4));
        let t = trim_correspondence(&corr("0 1 / 0 0"));
        assert!(t.is_empty());
        assert_eq!(t.passes, 2);
        assert_eq!(t.removed, vec![1, 0]);
        // a 2-cycle {0, 1} with a tail 2 -> 3 -> dead end 4
        let t = trim_correspondence(&corr("0 1 0 0 0 / 1 0 0 0 0 / 0 0 0 1 0 / 0 0 0 0 1 / 0 0 0 0 0"));
        assert_eq!(t.kept, vec![0, 1]);
        assert_eq!(t.removed, vec![4, 3, 2]);
    }

    #[test]
    fn gamma_examples() {
        let h = gamma_infinity_entropy(&FiniteCorrespondence::full(3), 1e-9).unwrap();
        assert!(h.bracket.contains(3f64.ln()));
        let h = gamma_infinity_entropy(&FiniteCorrespondence::from_map(&[2, 0, 1]).unwrap(), 1e-9).unwrap();
        assert_eq!(h.bracket, Bracket::zero());
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let h = gamma_infinity_entropy(&corr("1 1 / 1 0"), 1e-9).unwrap();
        assert!(h.bracket.contains(phi.ln()) && h.bracket.width() <= 1e-9);
        let h = gamma_infinity_entropy(&corr("0 1 / 0 0"), 1e-9).unwrap();
        assert!(h.empty);
        // multiplicities do not matter
        let a = gamma_infinity_entropy(&corr("3 1 / 2 0"), 1e-9).unwrap();
        assert!(a.bracket.contains(phi.ln()));
    }

    #[test]
    fn pullbacks() {
        let tol = 1e-9;
        let full2 = FiniteCorrespondence::full(2);
        let e = pullback_correspondence(&full2, &[0, 0, 1, 1], tol).unwrap();
        assert_eq!(e.correspondence, FiniteCorrespondence::full(4));
        assert_eq!(e.degree, 2);
        assert!(e.h_top.contains(4f64.ln()));
        assert!(e.weighted.contains(LN_2));

        let perm = FiniteCorrespondence::from_map(&[1, 0]).unwrap();
        // each point upstairs relates to the whole fiber over its image
        let e = pullback_correspondence(&perm, &[0, 1, 0, 1, 0, 1], tol).unwrap();
        assert!(e.h_top.contains(3f64.ln()));
        assert!(e.weighted.contains(0.0));
        // a permutation lift with a declared degree 3 weighs below zero
        let lift = FiniteCorrespondence::from_map(&[1, 2, 3, 4, 5, 0]).unwrap();
        let d = WeightedFamilyEntry::declared("lift", lift, 3, tol).unwrap();
        assert!(d.weighted.contains(-(3f64.ln())) && d.weighted.upper < 0.0);
        let id = WeightedFamilyEntry::identity(&perm, tol).unwrap();
        let r = h_et(&[d.clone(), id]).unwrap();
        assert_eq!(r.value, Bracket::zero());
        assert_eq!(r.argmax, 1);
        assert!(matches!(h_et(&[d]), Err(AlgdynError::MissingIdentity)));

        let id = WeightedFamilyEntry::identity(&full2, tol).unwrap();
        let same = pullback_correspondence(&full2, &[1, 0], tol).unwrap();
        assert_eq!(same.weighted, id.weighted);
    }

    #[test]
    fn pullback_errors() {
        let c = FiniteCorrespondence::full(2);
        assert!(matches!(pullback_correspondence(&c, &[0, 0, 1], 1e-9), Err(AlgdynError::NonConstantFibers { .. })));
        assert!(matches!(pullback_correspondence(&c, &[0, 0], 1e-9), Err(AlgdynError::NotOnto { point: 1 })));
        assert!(matches!(pullback_correspondence(&c, &[0, 2], 1e-9), Err(AlgdynError::MapRange { .. })));
        let d = WeightedFamilyEntry::declared("d", FiniteCorrespondence::full(3), 3, 1e-9).unwrap();
        assert_eq!(d.provenance, Provenance::Declared);
        assert!(d.weighted.contains(0.0));
    }
}
