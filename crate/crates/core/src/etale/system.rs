use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::EtaleError;
use crate::metric::{BowenParams, MetricSystem};
use crate::symbolic::Sft;

/// Largest point count for exhaustive checks on finite spaces.
pub const MAX_FINITE_POINTS: usize = 20;
pub const MAX_OPEN_SETS: usize = 4096;

/// A topology on `{0, …, points−1}`; open sets are bit masks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteTopSpace {
    points: usize,
    opens: Vec<u32>,
}

impl FiniteTopSpace {
    /// Validate a family of open sets: it must contain ∅ and the whole space
    /// and be closed under pairwise union and intersection.
    pub fn new(points: usize, opens: &[Vec<usize>]) -> Result<Self, EtaleError> {
        if points == 0 || points > MAX_FINITE_POINTS {
            return Err(EtaleError::FiniteSpace(format!("point count must lie in 1..={MAX_FINITE_POINTS}")));
        }
        let full = Self::full_mask(points);
        let mut masks = Vec::with_capacity(opens.len());
        for set in opens {
            let mut m = 0u32;
            for &p in set {
                if p >= points {
                    return Err(EtaleError::FiniteSpace(format!("point {p} is outside the space")));
                }
                m |= 1 << p;
            }
            masks.push(m);
        }
        masks.sort_unstable();
        masks.dedup();
        if masks.len() > MAX_OPEN_SETS {
            return Err(EtaleError::FiniteSpace(format!("more than {MAX_OPEN_SETS} open sets")));
        }
        for required in [0, full] {
            if masks.binary_search(&required).is_err() {
                let which = if required == 0 { "the empty set" } else { "the whole space" };
                return Err(EtaleError::FiniteSpace(format!("open family must contain {which}")));
            }
        }
        for &a in &masks {
            for &b in &masks {
                for (c, op) in [(a | b, "union"), (a & b, "intersection")] {
                    if masks.binary_search(&c).is_err() {
                        return Err(EtaleError::FiniteSpace(format!(
                            "{op} of {} and {} is not open",
                            mask_text(a),
                            mask_text(b)
                        )));
                    }
                }
            }
        }
        Ok(FiniteTopSpace { points, opens: masks })
    }

    fn full_mask(points: usize) -> u32 {
        (1u32 << points) - 1
    }

    /// Every subset open.
    pub fn discrete(points: usize) -> Result<Self, EtaleError> {
        if points == 0 || points > 12 {
            return Err(EtaleError::FiniteSpace("discrete spaces are limited to 12 points".into()));
        }
        let opens = (0..1u32 << points).collect();
        Ok(FiniteTopSpace { points, opens })
    }

    /// Only ∅ and the whole space open.
    pub fn indiscrete(points: usize) -> Result<Self, EtaleError> {
        Self::new(points, &[vec![], (0..points).collect()])
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn open_masks(&self) -> &[u32] {
        &self.opens
    }

    pub fn is_open(&self, mask: u32) -> bool {
        self.opens.binary_search(&mask).is_ok()
    }

    pub fn is_discrete(&self) -> bool {
        (0..self.points).all(|p| self.is_open(1 << p))
    }

    /// The open sets as sorted point lists.
    pub fn open_sets(&self) -> Vec<Vec<usize>> {
        self.opens.iter().map(|&m| mask_points(m)).collect()
    }
}

pub(crate) fn mask_points(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

fn mask_text(mask: u32) -> String {
    let pts: Vec<String> = mask_points(mask).iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", pts.join(","))
}

fn preimage_mask(map: &[usize], mask: u32) -> u32 {
    map.iter().enumerate().filter(|&(_, &y)| mask & (1 << y) != 0).fold(0, |m, (x, _)| m | (1 << x))
}

/// A continuous self-map of a finite topological space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSystem {
    space: FiniteTopSpace,
    map: Vec<usize>,
}

impl FiniteSystem {
    pub fn new(space: FiniteTopSpace, map: Vec<usize>) -> Result<Self, EtaleError> {
        if map.len() != space.points {
            return Err(EtaleError::FiniteSpace(format!(
                "map table has {} entries for {} points",
                map.len(),
                space.points
            )));
        }
        if let Some(&y) = map.iter().find(|&&y| y >= space.points) {
            return Err(EtaleError::FiniteSpace(format!("map value {y} is outside the space")));
        }
        check_continuous(&space, &space, &map)?;
        Ok(FiniteSystem { space, map })
    }

    pub fn space(&self) -> &FiniteTopSpace {
        &self.space
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `f(K) ⊆ K` for the point set `K`.
    pub fn is_invariant(&self, subset: &[usize]) -> bool {
        subset.iter().all(|&x| x < self.map.len() && subset.contains(&self.map[x]))
    }
}

/// Preimages of open sets of `target` under `map` are open in `source`.
pub(crate) fn check_continuous(source: &FiniteTopSpace, target: &FiniteTopSpace, map: &[usize]) -> Result<(), EtaleError> {
    for &u in &target.opens {
        let pre = preimage_mask(map, u);
        if !source.is_open(pre) {
            return Err(EtaleError::FiniteSpace(format!(
                "map is not continuous: preimage of open {} is {}",
                mask_text(u),
                mask_text(pre)
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffineDomain {
    Naturals,
    Integers,
    Reals,
}

impl AffineDomain {
    pub fn name(&self) -> &'static str {
        match self {
            AffineDomain::Naturals => "naturals",
            AffineDomain::Integers => "integers",
            AffineDomain::Reals => "reals",
        }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        match self {
            AffineDomain::Naturals => x.is_integer() && !x.is_negative(),
            AffineDomain::Integers => x.is_integer(),
            AffineDomain::Reals => true,
        }
    }
}

impl std::str::FromStr for AffineDomain {
    type Err = EtaleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naturals" | "N" => Ok(AffineDomain::Naturals),
            "integers" | "Z" => Ok(AffineDomain::Integers),
            "reals" | "R" => Ok(AffineDomain::Reals),
            other => Err(EtaleError::Affine(format!("unknown domain `{other}`; expected naturals, integers or reals"))),
        }
    }
}

/// `x ↦ a·x + b` on ℕ, ℤ or ℝ with the usual (non-compact) topology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineSystem {
    domain: AffineDomain,
    a: BigRational,
    b: BigRational,
}

impl AffineSystem {
    pub fn new(domain: AffineDomain, a: BigRational, b: BigRational) -> Result<Self, EtaleError> {
        let ok = match domain {
            AffineDomain::Naturals => a.is_integer() && b.is_integer() && !a.is_negative() && !b.is_negative(),
            AffineDomain::Integers => a.is_integer() && b.is_integer(),
            AffineDomain::Reals => true,
        };
        if !ok {
            return Err(EtaleError::Affine(format!(
                "x -> {a}x + {b} does not map the {} into themselves",
                domain.name()
            )));
        }
        Ok(AffineSystem { domain, a, b })
    }

    pub fn domain(&self) -> AffineDomain {
        self.domain
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn apply(&self, x: &BigRational) -> BigRational {
        &self.a * x + &self.b
    }

    pub fn apply_f64(&self, x: f64) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN) * x + self.b.to_f64().unwrap_or(f64::NAN)
    }

    /// The unique fixed point, if `a ≠ 1`.
    pub fn fixed_point(&self) -> Option<BigRational> {
        let one = BigRational::from_integer(BigInt::from(1));
        if self.a == one {
            return None;
        }
        Some(&self.b / (one - &self.a))
    }

    pub fn is_identity(&self) -> bool {
        self.a == BigRational::from_integer(BigInt::from(1)) && self.b.is_zero()
    }
}

/// The dynamical systems the registry can hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemVariant {
    FiniteTop(FiniteSystem),
    Sft(Sft),
    /// A map of a compact metric space with optional Bowen parameters
    /// overriding the evaluator defaults.
    Metric { system: MetricSystem, bowen: Option<BowenParams> },
    SymbolicAffine(AffineSystem),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub id: String,
    pub variant: SystemVariant,
}

impl SystemDescriptor {
    pub fn new(id: impl Into<String>, variant: SystemVariant) -> Self {
        SystemDescriptor { id: id.into(), variant }
    }

    /// Finite, symbolic and metric hosts are compact; affine systems are not.
    pub fn is_compact(&self) -> bool {
        !matches!(self.variant, SystemVariant::SymbolicAffine(_))
    }

    pub fn kind(&self) -> &'static str {
        match self.variant {
            SystemVariant::FiniteTop(_) => "finite",
            SystemVariant::Sft(_) => "sft",
            SystemVariant::Metric { .. } => "metric",
            SystemVariant::SymbolicAffine(_) => "affine",
        }
    }

    pub fn as_sft(&self) -> Option<&Sft> {
        match &self.variant {
            SystemVariant::Sft(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for SystemDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.id, self.kind())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn topology_axioms() {
        let sierpinski = FiniteTopSpace::new(2, &[vec![], vec![0], vec![0, 1]]).unwrap();
        assert!(!sierpinski.is_discrete());
        assert!(FiniteTopSpace::new(2, &[vec![0], vec![0, 1]]).is_err());
        let err = FiniteTopSpace::new(3, &[vec![], vec![0], vec![1], vec![0, 1, 2]]).unwrap_err();
        assert!(err.to_string().contains("union of {0} and {1}"), "{err}");
        assert!(FiniteTopSpace::discrete(3).unwrap().is_discrete());
        assert_eq!(FiniteTopSpace::indiscrete(3).unwrap().open_sets(), vec![vec![], vec![0, 1, 2]]);
    }

    #[test]
    fn continuity_is_checked() {
        let s = FiniteTopSpace::new(2, &[vec![], vec![0], vec![0, 1]]).unwrap();
        assert!(FiniteSystem::new(s.clone(), vec![0, 0]).is_ok());
        assert!(FiniteSystem::new(s.clone(), vec![0, 1]).is_ok());
        // swapping the points pulls {0} back to {1}, which is not open
        let err = FiniteSystem::new(s, vec![1, 0]).unwrap_err();
        assert!(err.to_string().contains("not continuous"));
    }

    #[test]
    fn affine_domains() {
        assert!(AffineSystem::new(AffineDomain::Naturals, rat(1), rat(1)).is_ok());
        assert!(AffineSystem::new(AffineDomain::Naturals, rat(1), rat(-1)).is_err());
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert!(AffineSystem::new(AffineDomain::Integers, half.clone(), rat(0)).is_err());
        let r = AffineSystem::new(AffineDomain::Reals, half, rat(1)).unwrap();
        assert_eq!(r.fixed_point(), Some(rat(2)));
        assert_eq!(r.apply(&rat(2)), rat(2));
    }
}
