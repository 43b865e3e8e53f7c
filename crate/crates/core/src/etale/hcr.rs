//! Internal entropy: the supremum of entropy over compact invariant subsets.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::system::{mask_points, AffineDomain, AffineSystem, FiniteSystem};
use super::{CheckMode, EntropyValue, EtaleError, EvalConfig, Provenance, SystemDescriptor, SystemVariant};
use crate::metric::{bowen_entropy_estimate, BowenParams, MetricSystem};
use crate::symbolic::{sft_entropy, sub_sft, Sft};

/// Most integer points taken from an interval of ℕ or ℤ.
const MAX_INTERVAL_POINTS: i64 = 10_000;

/// A subset proposed as compact and invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    Whole,
    /// Points of a finite space or symbols of a shift.
    Subset(Vec<usize>),
    /// Finitely many points of an affine system.
    Points(Vec<BigRational>),
    /// A closed interval `[lo, hi]`.
    Interval { lo: BigRational, hi: BigRational },
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(",");
        match self {
            Candidate::Whole => f.write_str("whole"),
            Candidate::Subset(s) => write!(f, "subset{{{}}}", join(s.iter().map(|x| x.to_string()).collect())),
            Candidate::Points(p) => write!(f, "points{{{}}}", join(p.iter().map(|x| x.to_string()).collect())),
            Candidate::Interval { lo, hi } => write!(f, "interval[{lo},{hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub candidate: Candidate,
    /// `Ok(entropy)` when the candidate verified, `Err(reason)` otherwise.
    pub result: Result<EntropyValue, String>,
    /// Sampled when invariance was only checked on grid points.
    pub mode: CheckMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcrResult {
    pub value: EntropyValue,
    /// The verified candidate attaining the value, if any verified.
    pub best: Option<Candidate>,
    pub verified: usize,
    pub rejected: usize,
    /// Outcomes for the explicitly declared candidates, in order.
    pub declared: Vec<CandidateOutcome>,
    /// Candidates generated automatically.
    pub generated: usize,
}

/// Supremum of `h_top(f|K)` over verified candidates `K`; zero when none
/// verifies. With `auto`, candidates are also generated from the system:
/// the whole space when compact, every symbol subset of a shift (up to
/// `cfg.max_subsets`), and fixed points, 2-cycles and invariant intervals of
/// affine maps.
pub fn h_cr(sys: &SystemDescriptor, candidates: &[Candidate], auto: bool, cfg: &EvalConfig) -> Result<HcrResult, EtaleError> {
    let generated = if auto { auto_candidates(sys, cfg) } else { Vec::new() };
    let mut best: Option<(EntropyValue, Candidate)> = None;
    let mut value: Option<EntropyValue> = None;
    let mut verified = 0;
    let mut rejected = 0;
    let mut declared = Vec::with_capacity(candidates.len());
    for (i, cand) in generated.iter().chain(candidates).enumerate() {
        let (result, mode) = check_candidate(sys, cand, cfg)?;
        match &result {
            Ok(v) => {
                verified += 1;
                if best.as_ref().is_none_or(|(b, _)| v.bracket.lower > b.bracket.lower) {
                    best = Some((*v, cand.clone()));
                }
                // Supremum bracket: larger lower end, larger upper end.
                value = Some(match value {
                    None => *v,
                    Some(acc) => EntropyValue {
                        bracket: acc.bracket.max(&v.bracket),
                        provenance: EntropyValue::combine_tag(acc.provenance, v.provenance),
                    },
                });
            }
            Err(_) => rejected += 1,
        }
        if i >= generated.len() {
            declared.push(CandidateOutcome { candidate: cand.clone(), result, mode });
        }
    }
    let value = value.unwrap_or_else(EntropyValue::zero);
    Ok(HcrResult { value, best: best.map(|(_, c)| c), verified, rejected, declared, generated: generated.len() })
}

fn auto_candidates(sys: &SystemDescriptor, cfg: &EvalConfig) -> Vec<Candidate> {
    match &sys.variant {
        SystemVariant::FiniteTop(_) | SystemVariant::Metric { .. } => vec![Candidate::Whole],
        SystemVariant::Sft(s) => {
            let n = s.alphabet_size();
            let mut out = vec![Candidate::Whole];
            if n <= 20 {
                let total = (1u64 << n) - 1;
                // proper nonempty subsets, smallest masks first
                for mask in 1..total {
                    if out.len() >= cfg.max_subsets {
                        break;
                    }
                    out.push(Candidate::Subset(mask_points(mask as u32)));
                }
            }
            out
        }
        SystemVariant::SymbolicAffine(af) => affine_candidates(af),
    }
}

fn affine_candidates(af: &AffineSystem) -> Vec<Candidate> {
    let one = BigRational::one();
    let mut out = Vec::new();
    if af.is_identity() {
        out.push(Candidate::Points(vec![BigRational::from_integer(BigInt::from(0))]));
        return out;
    }
    if let Some(x) = af.fixed_point() {
        if af.domain().contains(&x) {
            out.push(Candidate::Points(vec![x.clone()]));
            if af.domain() == AffineDomain::Reals && af.a().abs() < one {
                out.push(Candidate::Interval { lo: &x - &one, hi: &x + &one });
            }
        }
    }
    if *af.a() == -one.clone() {
        let zero = BigRational::from_integer(BigInt::from(0));
        let image = af.apply(&zero);
        if image != zero && af.domain().contains(&image) {
            out.push(Candidate::Points(vec![zero, image]));
        }
    }
    out
}

type Checked = (Result<EntropyValue, String>, CheckMode);

fn check_candidate(sys: &SystemDescriptor, cand: &Candidate, cfg: &EvalConfig) -> Result<Checked, EtaleError> {
    match &sys.variant {
        SystemVariant::FiniteTop(fs) => Ok(check_finite(fs, cand)),
        SystemVariant::Sft(s) => check_sft(s, cand, cfg),
        SystemVariant::Metric { system, bowen } => check_metric(system, bowen.unwrap_or(cfg.bowen), cand),
        SystemVariant::SymbolicAffine(af) => Ok(check_affine(af, cand)),
    }
}

fn not_applicable(cand: &Candidate, kind: &str) -> Checked {
    (Err(format!("{cand} does not describe a subset of a {kind} system")), CheckMode::Exact)
}

fn check_finite(fs: &FiniteSystem, cand: &Candidate) -> Checked {
    // Finite sets are compact and carry zero entropy.
    match cand {
        Candidate::Whole => (Ok(EntropyValue::zero()), CheckMode::Exact),
        Candidate::Subset(pts) => {
            if let Some(p) = pts.iter().find(|&&p| p >= fs.space().points()) {
                return (Err(format!("point {p} is outside the space")), CheckMode::Exact);
            }
            match pts.iter().find(|&&x| !pts.contains(&fs.apply(x))) {
                Some(&x) => (Err(format!("f({x}) = {} leaves the subset", fs.apply(x))), CheckMode::Exact),
                None => (Ok(EntropyValue::zero()), CheckMode::Exact),
            }
        }
        other => not_applicable(other, "finite"),
    }
}

fn check_sft(s: &Sft, cand: &Candidate, cfg: &EvalConfig) -> Result<Checked, EtaleError> {
    match cand {
        Candidate::Whole => Ok((Ok(EntropyValue::certified(sft_entropy(s, cfg.tol)?.bracket)), CheckMode::Exact)),
        Candidate::Subset(symbols) => match sub_sft(s, symbols) {
            Err(e) => Ok((Err(e.to_string()), CheckMode::Exact)),
            Ok(sub) => {
                let v = match &sub.sft {
                    None => EntropyValue::zero(),
                    Some(t) => EntropyValue::certified(sft_entropy(t, cfg.tol)?.bracket),
                };
                Ok((Ok(v), CheckMode::Exact))
            }
        },
        other => Ok(not_applicable(other, "shift")),
    }
}

fn check_metric(sys: &MetricSystem, params: BowenParams, cand: &Candidate) -> Result<Checked, EtaleError> {
    match cand {
        Candidate::Whole => {
            if !sys.check_total(12) {
                return Ok((Err("map leaves the space on sampled points".into()), CheckMode::Sampled));
            }
            let est = bowen_entropy_estimate(sys, &params)?;
            Ok((Ok(EntropyValue::numeric(est.estimate)), CheckMode::Sampled))
        }
        other => Ok(not_applicable(other, "metric")),
    }
}

fn check_affine(af: &AffineSystem, cand: &Candidate) -> Checked {
    let domain = af.domain();
    match cand {
        Candidate::Whole => (Err(format!("the {} are not compact", domain.name())), CheckMode::Exact),
        Candidate::Points(pts) => check_points(af, pts),
        Candidate::Interval { lo, hi } => {
            if lo > hi {
                return (Err(format!("empty interval [{lo},{hi}]")), CheckMode::Exact);
            }
            if domain != AffineDomain::Reals {
                // A bounded piece of ℕ or ℤ is the finite set of its integers.
                let (Some(a), Some(b)) = (lo.ceil().to_integer().to_i64(), hi.floor().to_integer().to_i64()) else {
                    return (Err("interval bounds out of range".into()), CheckMode::Exact);
                };
                let a = if domain == AffineDomain::Naturals { a.max(0) } else { a };
                if b < a {
                    return (Err(format!("interval [{lo},{hi}] holds no points of the {}", domain.name())), CheckMode::Exact);
                }
                if b - a >= MAX_INTERVAL_POINTS {
                    return (Err(format!("interval holds more than {MAX_INTERVAL_POINTS} points")), CheckMode::Exact);
                }
                let pts: Vec<BigRational> = (a..=b).map(|k| BigRational::from_integer(BigInt::from(k))).collect();
                return check_points(af, &pts);
            }
            let (ya, yb) = (af.apply(lo), af.apply(hi));
            for (x, y) in [(lo, &ya), (hi, &yb)] {
                if y < lo || y > hi {
                    return (Err(format!("f({x}) = {y} leaves [{lo},{hi}]")), CheckMode::Exact);
                }
            }
            // An affine map of an interval is monotone: zero entropy.
            (Ok(EntropyValue::zero()), CheckMode::Exact)
        }
        other => not_applicable(other, "affine"),
    }
}

fn check_points(af: &AffineSystem, pts: &[BigRational]) -> Checked {
    if pts.is_empty() {
        return (Err("empty point set".into()), CheckMode::Exact);
    }
    if let Some(p) = pts.iter().find(|p| !af.domain().contains(p)) {
        return (Err(format!("{p} is not in the {}", af.domain().name())), CheckMode::Exact);
    }
    for p in pts {
        let y = af.apply(p);
        if !pts.contains(&y) {
            return (Err(format!("f({p}) = {y} leaves the set")), CheckMode::Exact);
        }
    }
    (Ok(EntropyValue::zero()), CheckMode::Exact)
}

impl HcrResult {
    pub fn provenance(&self) -> Provenance {
        self.value.provenance
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::etale::{FiniteTopSpace, SystemDescriptor};

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn affine(domain: AffineDomain, a: i64, b: i64) -> SystemDescriptor {
        SystemDescriptor::new("f", SystemVariant::SymbolicAffine(AffineSystem::new(domain, rat(a), rat(b)).unwrap()))
    }

    #[test]
    fn discrete_finite_space_is_zero() {
        let fs = FiniteSystem::new(FiniteTopSpace::discrete(4).unwrap(), vec![1, 2, 3, 0]).unwrap();
        let sys = SystemDescriptor::new("cycle", SystemVariant::FiniteTop(fs));
        let r = h_cr(&sys, &[Candidate::Subset(vec![0, 1])], true, &EvalConfig::default()).unwrap();
        assert_eq!(r.value, EntropyValue::zero());
        assert_eq!(r.verified, 1);
        assert!(r.declared[0].result.as_ref().unwrap_err().contains("f(1) = 2"));
    }

    #[test]
    fn translation_has_no_candidates() {
        let cfg = EvalConfig::default();
        let sys = affine(AffineDomain::Reals, 1, 1);
        let declared = [Candidate::Interval { lo: rat(0), hi: rat(5) }, Candidate::Whole, Candidate::Points(vec![rat(3)])];
        let r = h_cr(&sys, &declared, true, &cfg).unwrap();
        assert_eq!(r.generated, 0);
        assert_eq!(r.verified, 0);
        assert_eq!(r.value, EntropyValue::zero());
        assert!(r.best.is_none());
        assert!(r.declared.iter().all(|o| o.result.is_err()));
    }

    #[test]
    fn affine_fixed_points_verify() {
        let cfg = EvalConfig::default();
        let r = h_cr(&affine(AffineDomain::Integers, -1, 4), &[], true, &cfg).unwrap();
        // x -> 4 - x fixes 2 and swaps 0 and 4
        assert_eq!(r.verified, 2);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let contraction = AffineSystem::new(AffineDomain::Reals, half, rat(1)).unwrap();
        let sys = SystemDescriptor::new("c", SystemVariant::SymbolicAffine(contraction));
        let r = h_cr(&sys, &[Candidate::Interval { lo: rat(0), hi: rat(4) }], true, &cfg).unwrap();
        assert_eq!(r.verified, 3);
        let nat = affine(AffineDomain::Naturals, 1, 0);
        let r = h_cr(&nat, &[Candidate::Interval { lo: rat(-3), hi: rat(2) }], false, &cfg).unwrap();
        assert_eq!(r.verified, 1);
    }

    #[test]
    fn shift_value_is_full_entropy() {
        let cfg = EvalConfig::default();
        let sys = SystemDescriptor::new("gm", SystemVariant::Sft(Sft::golden_mean()));
        let r = h_cr(&sys, &[], true, &cfg).unwrap();
        let full = sft_entropy(&Sft::golden_mean(), cfg.tol).unwrap().bracket;
        assert_eq!(r.value.bracket, full);
        assert_eq!(r.best, Some(Candidate::Whole));
        assert_eq!(r.generated, 3);
    }
}
