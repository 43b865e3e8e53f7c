//! Étale covers (onto semiconjugacies with finite fibers) and compactifications
//! of their sources.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::system::check_continuous;
use super::{host_entropy, AffineDomain, CheckMode, EntropyValue, EtaleError, EvalConfig, Registry, SystemVariant};
use crate::metric::{MetricMap, MetricSystem, Space};
use crate::symbolic::{code_degree, is_finite_to_one, is_onto, DiamondWitness, Sft, SlidingBlockCode};

/// Tolerance for equality of sampled points in the target metric.
const SAMPLE_TOL: f64 = 1e-9;
/// Grid resolution used to count preimages of a metric projection.
const FIBER_GRID_BITS: u32 = 14;
/// Most target points whose fibers are counted for a metric projection.
const FIBER_TARGETS: usize = 256;
/// Largest window exponent used when watching fibers grow.
const MAX_WINDOW_EXP: u32 = 24;
/// Half-width of the window real samples are drawn from.
const REAL_SAMPLE_RADIUS: f64 = 1024.0;

/// The map `π` of a cover `π: source → target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Source and target are the same system.
    Identity,
    /// A sliding block code between shifts.
    BlockCode(SlidingBlockCode),
    /// A table `x ↦ π(x)` between finite spaces.
    PointMap(Vec<usize>),
    /// `x ↦ x mod 1` from an affine system on ℝ to a circle map.
    UniversalCover,
    /// An evaluable map between compact metric spaces, in coordinates.
    Metric(MetricMap),
    /// Fibers are known to be infinite.
    DeclaredInfinite,
}

impl Projection {
    pub fn kind(&self) -> &'static str {
        match self {
            Projection::Identity => "identity",
            Projection::BlockCode(_) => "block_code",
            Projection::PointMap(_) => "point_map",
            Projection::UniversalCover => "universal_cover",
            Projection::Metric(_) => "metric",
            Projection::DeclaredInfinite => "declared_infinite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverWitness {
    pub id: String,
    pub source: String,
    pub target: String,
    pub projection: Projection,
}

/// What bounds the fibers of a verified cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberEvidence {
    /// Every fiber counted; the largest has this size.
    Exhaustive { max_fiber: u64 },
    /// No diamond exists; `degree` is the fiber size over generic points
    /// when it was determined.
    NoDiamond { degree: Option<usize> },
    /// Largest fiber seen among sampled target points.
    Sampled { max_observed: u64, targets: usize },
}

impl fmt::Display for FiberEvidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberEvidence::Exhaustive { max_fiber } => write!(f, "fibers counted exhaustively, largest {max_fiber}"),
            FiberEvidence::NoDiamond { degree: Some(d) } => write!(f, "no diamond, degree {d}"),
            FiberEvidence::NoDiamond { degree: None } => f.write_str("no diamond"),
            FiberEvidence::Sampled { max_observed, targets } => {
                write!(f, "largest fiber {max_observed} over {targets} sampled points")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    InfiniteFibers { evidence: String, diamond: Option<DiamondWitness> },
    NotOnto { detail: String },
    SemiconjugacyFailure { point: String },
    Incompatible { detail: String },
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::InfiniteFibers { evidence, .. } => write!(f, "infinite fibers: {evidence}"),
            RejectReason::NotOnto { detail } => write!(f, "not onto: {detail}"),
            RejectReason::SemiconjugacyFailure { point } => write!(f, "semiconjugacy fails at {point}"),
            RejectReason::Incompatible { detail } => write!(f, "incompatible: {detail}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverVerdict {
    VerifiedExact { evidence: FiberEvidence },
    /// Semiconjugacy and fibers checked on `checked` sample points only.
    VerifiedSampled { evidence: FiberEvidence, checked: usize },
    Rejected { reason: RejectReason },
}

impl CoverVerdict {
    pub fn is_verified(&self) -> bool {
        !matches!(self, CoverVerdict::Rejected { .. })
    }

    pub fn mode(&self) -> Option<CheckMode> {
        match self {
            CoverVerdict::VerifiedExact { .. } => Some(CheckMode::Exact),
            CoverVerdict::VerifiedSampled { .. } => Some(CheckMode::Sampled),
            CoverVerdict::Rejected { .. } => None,
        }
    }

    pub fn reject_reason(&self) -> Option<&RejectReason> {
        match self {
            CoverVerdict::Rejected { reason } => Some(reason),
            _ => None,
        }
    }
}

impl fmt::Display for CoverVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverVerdict::VerifiedExact { evidence } => write!(f, "verified_exact ({evidence})"),
            CoverVerdict::VerifiedSampled { evidence, checked } => {
                write!(f, "verified_sampled ({evidence}; {checked} points checked)")
            }
            CoverVerdict::Rejected { reason } => write!(f, "rejected ({reason})"),
        }
    }
}

fn reject(reason: RejectReason) -> CoverVerdict {
    CoverVerdict::Rejected { reason }
}

fn incompatible(detail: impl Into<String>) -> CoverVerdict {
    reject(RejectReason::Incompatible { detail: detail.into() })
}

/// Check that `w` is an étale cover: a semiconjugacy that is onto and has
/// finite fibers. Shift codes and finite maps are decided exactly; maps of
/// continua are tested on `cfg.sample_budget` seeded sample points.
pub fn verify_etale_cover(reg: &Registry, w: &CoverWitness, cfg: &EvalConfig) -> Result<CoverVerdict, EtaleError> {
    let source = reg.system(&w.source)?;
    let target = reg.system(&w.target)?;
    let verdict = match (&w.projection, &source.variant, &target.variant) {
        (Projection::DeclaredInfinite, _, _) => reject(RejectReason::InfiniteFibers {
            evidence: "declared infinite by the witness".into(),
            diamond: None,
        }),
        (Projection::Identity, s, t) => {
            if s == t {
                CoverVerdict::VerifiedExact { evidence: FiberEvidence::Exhaustive { max_fiber: 1 } }
            } else {
                incompatible(format!("identity between different systems `{}` and `{}`", source.id, target.id))
            }
        }
        (Projection::BlockCode(code), SystemVariant::Sft(s), SystemVariant::Sft(t)) => verify_code(code, s, t, cfg)?,
        (Projection::PointMap(table), SystemVariant::FiniteTop(s), SystemVariant::FiniteTop(t)) => {
            verify_point_map(table, s, t)
        }
        (Projection::UniversalCover, SystemVariant::SymbolicAffine(af), SystemVariant::Metric { system, .. }) => {
            if af.domain() != AffineDomain::Reals || system.space != Space::Circle {
                incompatible("the universal cover runs from an affine map of the reals to a circle map")
            } else {
                let (a, b) = (rational_f64(af.a()), rational_f64(af.b()));
                verify_universal_cover(move |x| a * x + b, system, cfg)
            }
        }
        (Projection::Metric(pi), SystemVariant::Metric { system: s, .. }, SystemVariant::Metric { system: t, .. }) => {
            verify_metric_projection(pi, s, t, cfg)
        }
        (p, _, _) => incompatible(format!(
            "projection {} cannot map a {} system to a {} system",
            p.kind(),
            source.kind(),
            target.kind()
        )),
    };
    Ok(verdict)
}

fn rational_f64(x: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

fn verify_code(code: &SlidingBlockCode, s: &Sft, t: &Sft, cfg: &EvalConfig) -> Result<CoverVerdict, EtaleError> {
    if code.source() != s || code.target() != t {
        return Ok(incompatible("block code source or target differs from the registered shifts"));
    }
    // A sliding block code commutes with the shift by construction.
    let fto = is_finite_to_one(code, &cfg.caps)?;
    if !fto.is_finite_to_one() {
        return Ok(reject(RejectReason::InfiniteFibers {
            evidence: "diamond in the recoded label graph".into(),
            diamond: fto.witness,
        }));
    }
    if !is_onto(code, &cfg.caps)? {
        return Ok(reject(RejectReason::NotOnto { detail: "some target word has no preimage".into() }));
    }
    let degree = code_degree(code, cfg.degree_length, &cfg.caps)?;
    Ok(CoverVerdict::VerifiedExact { evidence: FiberEvidence::NoDiamond { degree } })
}

fn verify_point_map(table: &[usize], s: &super::FiniteSystem, t: &super::FiniteSystem) -> CoverVerdict {
    let (n, m) = (s.space().points(), t.space().points());
    if table.len() != n {
        return incompatible(format!("table has {} entries for {n} points", table.len()));
    }
    if let Some(&y) = table.iter().find(|&&y| y >= m) {
        return incompatible(format!("value {y} is outside the target"));
    }
    if let Err(e) = check_continuous(s.space(), t.space(), table) {
        return incompatible(e.to_string());
    }
    for x in 0..n {
        let (lhs, rhs) = (table[s.apply(x)], t.apply(table[x]));
        if lhs != rhs {
            return reject(RejectReason::SemiconjugacyFailure { point: format!("{x}: π(f'(x)) = {lhs}, f(π(x)) = {rhs}") });
        }
    }
    let mut fibers = vec![0u64; m];
    for &y in table {
        fibers[y] += 1;
    }
    if let Some(y) = fibers.iter().position(|&c| c == 0) {
        return reject(RejectReason::NotOnto { detail: format!("point {y} has no preimage") });
    }
    let max_fiber = fibers.into_iter().max().unwrap_or(0);
    CoverVerdict::VerifiedExact { evidence: FiberEvidence::Exhaustive { max_fiber } }
}

fn sampler(cfg: &EvalConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.sample_seed)
}

fn verify_universal_cover(f: impl Fn(f64) -> f64, target: &MetricSystem, cfg: &EvalConfig) -> CoverVerdict {
    let pi = |x: f64| x.rem_euclid(1.0);
    let mut rng = sampler(cfg);
    for _ in 0..cfg.sample_budget {
        let x = rng.gen_range(-REAL_SAMPLE_RADIUS..REAL_SAMPLE_RADIUS);
        let (lhs, rhs) = (pi(f(x)), target.eval(pi(x)));
        if target.distance(lhs, rhs) > SAMPLE_TOL * (1.0 + x.abs()) {
            return reject(RejectReason::SemiconjugacyFailure {
                point: format!("x = {x}: π(f'(x)) = {lhs}, f(π(x)) = {rhs}"),
            });
        }
    }
    // Count preimages of a sampled target point in growing windows.
    let y: f64 = rng.gen_range(0.0..1.0);
    let mut largest = 0;
    for k in 0..=MAX_WINDOW_EXP {
        let r = (1u64 << k) as f64;
        let count = (-(1i64 << k)..=(1i64 << k))
            .map(|m| y + m as f64)
            .filter(|&x| x.abs() <= r && Space::Circle.distance(pi(x), y) <= SAMPLE_TOL)
            .count() as u64;
        largest = count;
        if count > cfg.fiber_bound {
            return reject(RejectReason::InfiniteFibers {
                evidence: format!(
                    "fiber over {y:.6} has {count} points in [-{r}, {r}], past the bound {}",
                    cfg.fiber_bound
                ),
                diamond: None,
            });
        }
    }
    CoverVerdict::VerifiedSampled {
        evidence: FiberEvidence::Sampled { max_observed: largest, targets: 1 },
        checked: cfg.sample_budget,
    }
}

/// Number of grid cells whose image arc contains `y`.
fn crossing_count(images: &[f64], space: Space, y: f64) -> u64 {
    let mut count = 0;
    for w in images.windows(2) {
        let (a, b) = (w[0], w[1]);
        let hit = if space.wraps() {
            // shortest signed displacement from a to b and from a to y
            let d = (b - a + 0.5).rem_euclid(1.0) - 0.5;
            let e = (y - a).rem_euclid(1.0);
            if d >= 0.0 {
                e < d
            } else {
                e > 1.0 + d || e == 0.0
            }
        } else {
            (a <= y && y < b) || (b < y && y <= a)
        };
        count += hit as u64;
    }
    count
}

fn verify_metric_projection(pi: &MetricMap, s: &MetricSystem, t: &MetricSystem, cfg: &EvalConfig) -> CoverVerdict {
    let mut rng = sampler(cfg);
    for _ in 0..cfg.sample_budget {
        let x: f64 = rng.gen_range(0.0..1.0);
        let (lhs, rhs) = (pi.eval(s.eval(x)), t.eval(pi.eval(x)));
        if t.distance(lhs, rhs) > SAMPLE_TOL {
            return reject(RejectReason::SemiconjugacyFailure {
                point: format!("t = {x}: π(f'(t)) = {lhs}, f(π(t)) = {rhs}"),
            });
        }
    }
    let mut grid = s.space.grid(FIBER_GRID_BITS);
    if s.space.wraps() {
        grid.push(1.0);
    }
    let images: Vec<f64> = grid.iter().map(|&x| pi.eval(x)).collect();
    let targets = FIBER_TARGETS.min(cfg.sample_budget.max(1));
    let mut largest = 0;
    for _ in 0..targets {
        let y: f64 = rng.gen_range(0.0..1.0);
        let count = crossing_count(&images, t.space, y);
        if count == 0 {
            return reject(RejectReason::NotOnto { detail: format!("no preimage found for {y:.6}") });
        }
        if count > cfg.fiber_bound {
            return reject(RejectReason::InfiniteFibers {
                evidence: format!("fiber over {y:.6} has at least {count} points, past the bound {}", cfg.fiber_bound),
                diamond: None,
            });
        }
        largest = largest.max(count);
    }
    CoverVerdict::VerifiedSampled {
        evidence: FiberEvidence::Sampled { max_observed: largest, targets },
        checked: cfg.sample_budget,
    }
}

/// How the cover's source sits inside the host.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Embedding {
    /// The host is the source itself.
    Identity,
    /// An affine system placed in the projective line by `x ↦ x`.
    ProjectiveReal,
    /// A shift embedded in a shift by a symbol map.
    SymbolInclusion(Vec<usize>),
}

/// How density of the image is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    Exact,
    /// Asserted by the scenario author and not checked.
    Declared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HostEntropy {
    Computed,
    Declared(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactificationWitness {
    pub id: String,
    pub cover: String,
    pub host: String,
    pub embedding: Embedding,
    pub density: Density,
    pub host_entropy: HostEntropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactificationCheck {
    /// How the embedding and extension were checked.
    pub mode: CheckMode,
    pub density: Density,
    /// Points on which injectivity and the extension property were checked.
    pub checked: usize,
    pub failure: Option<String>,
    pub entropy: Option<EntropyValue>,
}

impl CompactificationCheck {
    pub fn is_valid(&self) -> bool {
        self.failure.is_none()
    }
}

/// Check that the host is compact, the embedding is injective, its image is
/// dense, and the host map extends the source map; then evaluate the host
/// entropy.
pub fn verify_compactification(
    reg: &Registry,
    w: &CompactificationWitness,
    cfg: &EvalConfig,
) -> Result<CompactificationCheck, EtaleError> {
    let cover = reg.cover(&w.cover)?;
    let source = reg.system(&cover.source)?;
    let host = reg.system(&w.host)?;
    let mut check = CompactificationCheck { mode: CheckMode::Exact, density: w.density, checked: 0, failure: None, entropy: None };
    let outcome: Result<(), String> = if !host.is_compact() {
        Err(format!("host `{}` is not compact", host.id))
    } else {
        match (&w.embedding, &source.variant, &host.variant) {
            (Embedding::Identity, s, h) => {
                if s == h {
                    Ok(())
                } else {
                    Err(format!("identity embedding of `{}` into the different system `{}`", source.id, host.id))
                }
            }
            (Embedding::ProjectiveReal, SystemVariant::SymbolicAffine(af), SystemVariant::Metric { system, .. }) => {
                check.mode = CheckMode::Sampled;
                if system.space != Space::ProjectiveLine {
                    Err("projective embedding needs a host on the projective line".into())
                } else {
                    let (a, b) = (rational_f64(af.a()), rational_f64(af.b()));
                    let pts = affine_samples(af.domain(), cfg);
                    check.checked = pts.len();
                    check_projective(&pts, |x| a * x + b, system).and_then(|()| {
                        if af.domain() == AffineDomain::Reals || w.density == Density::Declared {
                            Ok(())
                        } else {
                            Err(format!("the {} are not dense in the projective line", af.domain().name()))
                        }
                    })
                }
            }
            (Embedding::SymbolInclusion(map), SystemVariant::Sft(s), SystemVariant::Sft(h)) => {
                check.checked = s.alphabet_size();
                check_inclusion(map, s, h, w.density)
            }
            (e, _, _) => Err(format!("embedding {e:?} cannot place a {} system in a {} system", source.kind(), host.kind())),
        }
    };
    if let Err(e) = outcome {
        check.failure = Some(e);
        return Ok(check);
    }
    match w.host_entropy {
        HostEntropy::Declared(v) if v.is_finite() && v >= 0.0 => check.entropy = Some(EntropyValue::declared(v)),
        HostEntropy::Declared(v) => check.failure = Some(format!("declared host entropy {v} is not a nonnegative number")),
        HostEntropy::Computed => match host_entropy(host, cfg) {
            Ok(v) => check.entropy = Some(v),
            Err(e) => check.failure = Some(format!("host entropy: {e}")),
        },
    }
    Ok(check)
}

fn affine_samples(domain: AffineDomain, cfg: &EvalConfig) -> Vec<f64> {
    let n = cfg.sample_budget.max(1);
    match domain {
        AffineDomain::Naturals => (0..n).map(|k| k as f64).collect(),
        AffineDomain::Integers => (0..n).map(|k| k as f64 - (n / 2) as f64).collect(),
        AffineDomain::Reals => {
            let mut rng = sampler(cfg);
            (0..n).map(|_| rng.gen_range(-REAL_SAMPLE_RADIUS..REAL_SAMPLE_RADIUS)).collect()
        }
    }
}

fn check_projective(pts: &[f64], f: impl Fn(f64) -> f64, host: &MetricSystem) -> Result<(), String> {
    let mut images = Vec::with_capacity(pts.len());
    for &x in pts {
        let t = Space::from_real(x);
        let (lhs, rhs) = (host.eval(t), Space::from_real(f(x)));
        if host.distance(lhs, rhs) > SAMPLE_TOL {
            return Err(format!("host map does not extend the source map at x = {x}"));
        }
        images.push((t, x));
    }
    images.sort_by(|p, q| p.0.total_cmp(&q.0));
    for w in images.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 != w[1].1 {
            return Err(format!("embedding identifies {} and {}", w[0].1, w[1].1));
        }
    }
    Ok(())
}

fn check_inclusion(map: &[usize], s: &Sft, h: &Sft, density: Density) -> Result<(), String> {
    let (n, m) = (s.alphabet_size(), h.alphabet_size());
    if map.len() != n {
        return Err(format!("symbol map has {} entries for {n} symbols", map.len()));
    }
    let mut used = vec![false; m];
    for &y in map {
        if y >= m {
            return Err(format!("symbol {y} is outside the host alphabet"));
        }
        if std::mem::replace(&mut used[y], true) {
            return Err(format!("symbol map is not injective at {y}"));
        }
    }
    for a in 0..n {
        for b in 0..n {
            if s.allows(a, b) && !h.allows(map[a], map[b]) {
                return Err(format!("transition {a}->{b} is not allowed in the host"));
            }
        }
    }
    if density == Density::Declared {
        return Ok(());
    }
    // A subshift is closed, so a dense one equals the host: every essential
    // host symbol and transition must come from the source.
    let src = s.essential_symbols();
    let image: Vec<usize> = src.iter().map(|&a| map[a]).collect();
    let host_ess = h.essential_symbols();
    if let Some(y) = host_ess.iter().find(|y| !image.contains(y)) {
        return Err(format!("host symbol {y} is not in the closure of the image"));
    }
    for &a in &src {
        for &b in &src {
            if h.allows(map[a], map[b]) && !s.allows(a, b) {
                return Err(format!("host transition {}->{} is not in the closure of the image", map[a], map[b]));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::etale::{AffineSystem, FiniteSystem, FiniteTopSpace, SystemDescriptor};
    use crate::metric::builtin;
    use crate::symbolic::{group_extension, Cocycle, SymbolicCaps};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn reg_with(systems: Vec<SystemDescriptor>) -> Registry {
        let mut reg = Registry::default();
        for s in systems {
            reg.add_system(s).unwrap();
        }
        reg
    }

    fn cover(source: &str, target: &str, projection: Projection) -> CoverWitness {
        CoverWitness { id: "c".into(), source: source.into(), target: target.into(), projection }
    }

    fn metric(id: &str, name: &str) -> SystemDescriptor {
        SystemDescriptor::new(id, SystemVariant::Metric { system: builtin(name).unwrap(), bowen: None })
    }

    fn affine(id: &str, domain: AffineDomain, a: i64, b: i64) -> SystemDescriptor {
        let r = |n: i64| BigRational::from_integer(BigInt::from(n));
        SystemDescriptor::new(id, SystemVariant::SymbolicAffine(AffineSystem::new(domain, r(a), r(b)).unwrap()))
    }

    #[test]
    fn group_extension_has_fiber_two() {
        let caps = SymbolicCaps::default();
        let base = Sft::golden_mean();
        let cocycle: Cocycle = [((0, 0), 1), ((0, 1), 0), ((1, 0), 1)].into_iter().collect();
        let ext = group_extension(&base, 2, &cocycle, &caps).unwrap();
        let reg = reg_with(vec![
            SystemDescriptor::new("x", SystemVariant::Sft(base)),
            SystemDescriptor::new("e", SystemVariant::Sft(ext.sft.clone())),
        ]);
        let v = verify_etale_cover(&reg, &cover("e", "x", Projection::BlockCode(ext.projection)), &EvalConfig::default()).unwrap();
        assert_eq!(v, CoverVerdict::VerifiedExact { evidence: FiberEvidence::NoDiamond { degree: Some(2) } });
    }

    #[test]
    fn identity_and_mismatch() {
        let cfg = EvalConfig::default();
        let reg = reg_with(vec![
            SystemDescriptor::new("x", SystemVariant::Sft(Sft::full_shift(2))),
            SystemDescriptor::new("y", SystemVariant::Sft(Sft::golden_mean())),
        ]);
        let v = verify_etale_cover(&reg, &cover("x", "x", Projection::Identity), &cfg).unwrap();
        assert_eq!(v, CoverVerdict::VerifiedExact { evidence: FiberEvidence::Exhaustive { max_fiber: 1 } });
        let v = verify_etale_cover(&reg, &cover("x", "y", Projection::Identity), &cfg).unwrap();
        assert!(matches!(v.reject_reason(), Some(RejectReason::Incompatible { .. })));
        let v = verify_etale_cover(&reg, &cover("x", "y", Projection::UniversalCover), &cfg).unwrap();
        assert!(!v.is_verified());
    }

    #[test]
    fn collapsing_code_has_a_diamond() {
        let caps = SymbolicCaps::default();
        let full = Sft::full_shift(2);
        let one = Sft::full_shift(1);
        let code = SlidingBlockCode::one_block(full.clone(), one.clone(), &[0, 0], &caps).unwrap();
        let reg = reg_with(vec![
            SystemDescriptor::new("x", SystemVariant::Sft(full)),
            SystemDescriptor::new("p", SystemVariant::Sft(one)),
        ]);
        let v = verify_etale_cover(&reg, &cover("x", "p", Projection::BlockCode(code.clone())), &EvalConfig::default()).unwrap();
        match v.reject_reason() {
            Some(RejectReason::InfiniteFibers { diamond: Some(d), .. }) => assert!(d.replay(&code)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn finite_point_maps() {
        let cfg = EvalConfig::default();
        let four = FiniteSystem::new(FiniteTopSpace::discrete(4).unwrap(), vec![1, 2, 3, 0]).unwrap();
        let two = FiniteSystem::new(FiniteTopSpace::discrete(2).unwrap(), vec![1, 0]).unwrap();
        let reg = reg_with(vec![
            SystemDescriptor::new("c4", SystemVariant::FiniteTop(four)),
            SystemDescriptor::new("c2", SystemVariant::FiniteTop(two)),
        ]);
        let v = verify_etale_cover(&reg, &cover("c4", "c2", Projection::PointMap(vec![0, 1, 0, 1])), &cfg).unwrap();
        assert_eq!(v, CoverVerdict::VerifiedExact { evidence: FiberEvidence::Exhaustive { max_fiber: 2 } });
        let v = verify_etale_cover(&reg, &cover("c4", "c2", Projection::PointMap(vec![0, 0, 1, 1])), &cfg).unwrap();
        assert!(matches!(v.reject_reason(), Some(RejectReason::SemiconjugacyFailure { .. })));
    }

    #[test]
    fn universal_cover_has_infinite_fibers() {
        let cfg = EvalConfig::default();
        let reg = reg_with(vec![affine("r", AffineDomain::Reals, 2, 0), metric("s", "circle_doubling")]);
        let v = verify_etale_cover(&reg, &cover("r", "s", Projection::UniversalCover), &cfg).unwrap();
        assert!(matches!(v.reject_reason(), Some(RejectReason::InfiniteFibers { .. })), "{v}");
        let reg = reg_with(vec![affine("r", AffineDomain::Reals, 3, 0), metric("s", "circle_doubling")]);
        let v = verify_etale_cover(&reg, &cover("r", "s", Projection::UniversalCover), &cfg).unwrap();
        assert!(matches!(v.reject_reason(), Some(RejectReason::SemiconjugacyFailure { .. })), "{v}");
    }

    #[test]
    fn doubling_covers_itself_twice() {
        let cfg = EvalConfig { sample_budget: 2000, ..EvalConfig::default() };
        let reg = reg_with(vec![metric("a", "circle_doubling"), metric("b", "circle_doubling")]);
        let v = verify_etale_cover(&reg, &cover("a", "b", Projection::Metric(MetricMap::CircleDoubling)), &cfg).unwrap();
        match v {
            CoverVerdict::VerifiedSampled { evidence: FiberEvidence::Sampled { max_observed, .. }, .. } => {
                assert_eq!(max_observed, 2)
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn projective_compactification_of_translation() {
        let cfg = EvalConfig { sample_budget: 2000, ..EvalConfig::default() };
        let mut reg = reg_with(vec![affine("n", AffineDomain::Naturals, 1, 1), metric("p", "real_affine(1,1)")]);
        reg.add_cover(cover("n", "n", Projection::Identity)).unwrap();
        let mut w = CompactificationWitness {
            id: "z".into(),
            cover: "c".into(),
            host: "p".into(),
            embedding: Embedding::ProjectiveReal,
            density: Density::Exact,
            host_entropy: HostEntropy::Declared(0.0),
        };
        let chk = verify_compactification(&reg, &w, &cfg).unwrap();
        assert!(chk.failure.as_deref().unwrap().contains("not dense"));
        w.density = Density::Declared;
        let chk = verify_compactification(&reg, &w, &cfg).unwrap();
        assert!(chk.is_valid(), "{chk:?}");
        assert_eq!(chk.mode, CheckMode::Sampled);
        assert_eq!(chk.checked, 2000);
        w.host = "n".into();
        let chk = verify_compactification(&reg, &w, &cfg).unwrap();
        assert!(chk.failure.unwrap().contains("not compact"));
    }

    #[test]
    fn symbol_inclusion_density() {
        let cfg = EvalConfig::default();
        let mut reg = reg_with(vec![
            SystemDescriptor::new("gm", SystemVariant::Sft(Sft::golden_mean())),
            SystemDescriptor::new("full", SystemVariant::Sft(Sft::full_shift(2))),
        ]);
        reg.add_cover(cover("gm", "gm", Projection::Identity)).unwrap();
        let mut w = CompactificationWitness {
            id: "z".into(),
            cover: "c".into(),
            host: "full".into(),
            embedding: Embedding::SymbolInclusion(vec![0, 1]),
            density: Density::Exact,
            host_entropy: HostEntropy::Computed,
        };
        let chk = verify_compactification(&reg, &w, &cfg).unwrap();
        assert!(chk.failure.unwrap().contains("closure"));
        w.host = "gm".into();
        let chk = verify_compactification(&reg, &w, &cfg).unwrap();
        assert!(chk.is_valid());
        assert_eq!(chk.entropy.unwrap().provenance, crate::etale::Provenance::Certified);
    }
}
