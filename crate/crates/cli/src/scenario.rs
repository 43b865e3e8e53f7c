//! Scenario files.
//!
//! A scenario is a list of `[kind id]` sections holding `key = value` lines.
//! `#` starts a comment. Matrices are written row by row with `/` between
//! rows, e.g. `1 1 / 1 0`.

use std::collections::BTreeMap;
use std::fmt;

use etale_entropy::algdyn::{FiniteCorrespondence, MonomialMap};
use etale_entropy::etale::{
    AffineDomain, AffineSystem, Candidate, CompactificationWitness, CoverWitness, Density, Embedding, EvalConfig,
    FiniteSystem, FiniteTopSpace, HostEntropy, Projection, Registry, SystemDescriptor, SystemVariant,
};
use etale_entropy::metric::{builtin, BowenParams};
use etale_entropy::spectral::{NonNegIntMatrix, SignedIntMatrix};
use etale_entropy::symbolic::{group_extension, higher_block, Cocycle, Sft, SlidingBlockCode};
use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

fn err<T>(line: usize, reason: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, reason: reason.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Opens {
    Discrete,
    Indiscrete,
    Sets(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemKind {
    Sft { matrix: NonNegIntMatrix },
    Finite { points: usize, opens: Opens, map: Vec<usize> },
    Affine { domain: AffineDomain, a: BigRational, b: BigRational },
    /// A builtin metric system; unset Bowen parameters come from the run flags.
    Metric { map: String, horizon: Option<u32>, epsilon: Option<f64>, grid: Option<u32> },
    /// The `length`-block presentation of an earlier shift.
    HigherBlock { base: String, length: usize },
    /// A group extension of an earlier shift.
    Extension { base: String, order: u64, cocycle: Cocycle },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub id: String,
    pub kind: SystemKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionSpec {
    Identity,
    /// 1-block code given by the image of each source symbol.
    Labels(Vec<usize>),
    Code { memory: usize, anticipation: usize, entries: BTreeMap<Vec<usize>, usize> },
    /// The natural projection of a higher block or extension source.
    Natural,
    PointMap(Vec<usize>),
    UniversalCover,
    /// A builtin metric map used as the projection.
    Metric(String),
    DeclaredInfinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverSpec {
    pub id: String,
    pub source: String,
    pub target: String,
    pub projection: ProjectionSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompactificationSpec {
    pub id: String,
    pub cover: String,
    pub host: String,
    pub embedding: Embedding,
    pub density: Density,
    pub host_entropy: HostEntropy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSpec {
    pub id: String,
    pub matrix: NonNegIntMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonomialSpec {
    pub id: String,
    pub matrix: SignedIntMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskOp {
    HOmega { system: String, family: Vec<String>, candidates: Vec<Candidate>, auto: bool, complete: bool },
    HCr { system: String, candidates: Vec<Candidate>, auto: bool },
    /// Topological entropy of a compact system.
    Entropy { system: String },
    VerifyCover { cover: String },
    Gamma { correspondence: String },
    /// Weighted étale entropy of a correspondence; `declared` pairs a
    /// correspondence id with its degree. With `monomial` set, every weighted
    /// value is compared with that map's degree bound.
    HEt { correspondence: String, pullbacks: Vec<Vec<usize>>, declared: Vec<(String, u64)>, monomial: Option<String> },
    Degrees { monomial: String },
    Suite { trials: u64 },
    Conjecture1 { trials: u64 },
}

impl TaskOp {
    pub fn name(&self) -> &'static str {
        match self {
            TaskOp::HOmega { .. } => "h_omega",
            TaskOp::HCr { .. } => "h_cr",
            TaskOp::Entropy { .. } => "entropy",
            TaskOp::VerifyCover { .. } => "verify_cover",
            TaskOp::Gamma { .. } => "gamma",
            TaskOp::HEt { .. } => "h_et",
            TaskOp::Degrees { .. } => "degrees",
            TaskOp::Suite { .. } => "suite",
            TaskOp::Conjecture1 { .. } => "conjecture1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: String,
    pub op: TaskOp,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub systems: Vec<SystemSpec>,
    pub covers: Vec<CoverSpec>,
    pub compactifications: Vec<CompactificationSpec>,
    pub correspondences: Vec<CorrespondenceSpec>,
    pub monomials: Vec<MonomialSpec>,
    pub tasks: Vec<TaskSpec>,
}

/// Objects built from a scenario.
#[derive(Debug, Clone, Default)]
pub struct Built {
    pub registry: Registry,
    pub correspondences: BTreeMap<String, FiniteCorrespondence>,
    pub monomials: BTreeMap<String, MonomialMap>,
}

impl Scenario {
    /// Build every system, cover and compactification. Metric systems take
    /// unset Bowen parameters from `cfg`.
    pub fn build(&self, cfg: &EvalConfig) -> Result<Built, String> {
        let mut built = Built::default();
        for s in &self.systems {
            let d = build_system(s, &built.registry, cfg)?;
            built.registry.add_system(d).map_err(|e| e.to_string())?;
        }
        for c in &self.covers {
            let w = build_cover(c, &built.registry, cfg, &self.systems)?;
            built.registry.add_cover(w).map_err(|e| e.to_string())?;
        }
        for z in &self.compactifications {
            built.registry.add_compactification(build_compactification(z)).map_err(|e| e.to_string())?;
        }
        for c in &self.correspondences {
            built.correspondences.insert(c.id.clone(), FiniteCorrespondence::new(c.matrix.clone()));
        }
        for m in &self.monomials {
            built.monomials.insert(m.id.clone(), MonomialMap::new(m.matrix.clone()).map_err(|e| e.to_string())?);
        }
        Ok(built)
    }
}

fn build_system(s: &SystemSpec, reg: &Registry, cfg: &EvalConfig) -> Result<SystemDescriptor, String> {
    let sft_base = |base: &str| -> Result<Sft, String> {
        match reg.systems.get(base) {
            Some(d) => d.as_sft().cloned().ok_or_else(|| format!("system `{base}` is not a shift")),
            None => Err(format!("system `{base}` must be defined before `{}`", s.id)),
        }
    };
    let variant = match &s.kind {
        SystemKind::Sft { matrix } => SystemVariant::Sft(Sft::two_sided(matrix.clone()).map_err(|e| e.to_string())?),
        SystemKind::Finite { points, opens, map } => {
            let space = match opens {
                Opens::Discrete => FiniteTopSpace::discrete(*points),
                Opens::Indiscrete => FiniteTopSpace::indiscrete(*points),
                Opens::Sets(sets) => FiniteTopSpace::new(*points, sets),
            }
            .map_err(|e| e.to_string())?;
            SystemVariant::FiniteTop(FiniteSystem::new(space, map.clone()).map_err(|e| e.to_string())?)
        }
        SystemKind::Affine { domain, a, b } => {
            SystemVariant::SymbolicAffine(AffineSystem::new(*domain, a.clone(), b.clone()).map_err(|e| e.to_string())?)
        }
        SystemKind::Metric { map, horizon, epsilon, grid } => {
            let system = builtin(map).map_err(|e| e.to_string())?;
            let bowen = BowenParams {
                horizon: horizon.unwrap_or(cfg.bowen.horizon),
                eps: epsilon.unwrap_or(cfg.bowen.eps),
                grid_bits: grid.unwrap_or(cfg.bowen.grid_bits),
            };
            SystemVariant::Metric { system, bowen: Some(bowen) }
        }
        SystemKind::HigherBlock { base, length } => {
            let hb = higher_block(&sft_base(base)?, *length, &cfg.caps).map_err(|e| e.to_string())?;
            SystemVariant::Sft(hb.sft)
        }
        SystemKind::Extension { base, order, cocycle } => {
            let ext = group_extension(&sft_base(base)?, *order, cocycle, &cfg.caps).map_err(|e| e.to_string())?;
            SystemVariant::Sft(ext.sft)
        }
    };
    Ok(SystemDescriptor::new(s.id.clone(), variant))
}

/// The natural projection of a derived shift onto its base, if `spec`
/// describes one.
fn natural_projection(spec: &SystemSpec, reg: &Registry, cfg: &EvalConfig) -> Result<(String, SlidingBlockCode), String> {
    let base_sft = |base: &str| reg.system(base).map_err(|e| e.to_string())?.as_sft().cloned().ok_or("base is not a shift".to_string());
    match &spec.kind {
        SystemKind::HigherBlock { base, length } => {
            let hb = higher_block(&base_sft(base)?, *length, &cfg.caps).map_err(|e| e.to_string())?;
            Ok((base.clone(), hb.code))
        }
        SystemKind::Extension { base, order, cocycle } => {
            let ext = group_extension(&base_sft(base)?, *order, cocycle, &cfg.caps).map_err(|e| e.to_string())?;
            Ok((base.clone(), ext.projection))
        }
        _ => Err(format!("system `{}` is not a higher block or extension system", spec.id)),
    }
}

fn build_cover(c: &CoverSpec, reg: &Registry, cfg: &EvalConfig, systems: &[SystemSpec]) -> Result<CoverWitness, String> {
    let source = reg.system(&c.source).map_err(|e| e.to_string())?;
    let target = reg.system(&c.target).map_err(|e| e.to_string())?;
    let shifts = || -> Result<(Sft, Sft), String> {
        match (source.as_sft(), target.as_sft()) {
            (Some(s), Some(t)) => Ok((s.clone(), t.clone())),
            _ => Err("block codes need shift source and target".into()),
        }
    };
    let projection = match &c.projection {
        ProjectionSpec::Identity => Projection::Identity,
        ProjectionSpec::Labels(labels) => {
            let (s, t) = shifts()?;
            Projection::BlockCode(SlidingBlockCode::one_block(s, t, labels, &cfg.caps).map_err(|e| e.to_string())?)
        }
        ProjectionSpec::Code { memory, anticipation, entries } => {
            let (s, t) = shifts()?;
            Projection::BlockCode(
                SlidingBlockCode::new(s, t, *memory, *anticipation, entries.clone(), &cfg.caps).map_err(|e| e.to_string())?,
            )
        }
        ProjectionSpec::Natural => {
            let spec = systems.iter().find(|s| s.id == c.source).ok_or_else(|| format!("unknown system `{}`", c.source))?;
            let (base, code) = natural_projection(spec, reg, cfg)?;
            if base != c.target {
                return Err(format!("the natural projection of `{}` lands in `{base}`, not `{}`", c.source, c.target));
            }
            Projection::BlockCode(code)
        }
        ProjectionSpec::PointMap(table) => Projection::PointMap(table.clone()),
        ProjectionSpec::UniversalCover => Projection::UniversalCover,
        ProjectionSpec::Metric(name) => Projection::Metric(builtin(name).map_err(|e| e.to_string())?.map),
        ProjectionSpec::DeclaredInfinite => Projection::DeclaredInfinite,
    };
    Ok(CoverWitness { id: c.id.clone(), source: c.source.clone(), target: c.target.clone(), projection })
}

fn build_compactification(z: &CompactificationSpec) -> CompactificationWitness {
    CompactificationWitness {
        id: z.id.clone(),
        cover: z.cover.clone(),
        host: z.host.clone(),
        embedding: z.embedding.clone(),
        density: z.density,
        host_entropy: z.host_entropy,
    }
}

struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Section {
    kind: String,
    id: String,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn check_keys(&self, allowed: &[&str]) -> Result<(), ParseError> {
        for e in &self.entries {
            if !allowed.contains(&e.key.as_str()) {
                return err(e.line, format!("unknown key `{}` in [{} {}]; expected one of {}", e.key, self.kind, self.id, allowed.join(", ")));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn req(&self, key: &str) -> Result<&Entry, ParseError> {
        self.get(key).ok_or_else(|| ParseError { line: self.line, reason: format!("[{} {}] is missing `{key}`", self.kind, self.id) })
    }

    /// Parse the value of `key` with `f`, reporting failures at its line.
    fn parse<T>(&self, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<T, ParseError> {
        let e = self.req(key)?;
        f(&e.value).map_err(|reason| ParseError { line: e.line, reason: format!("`{key}`: {reason}") })
    }

    fn parse_or<T>(&self, key: &str, default: T, f: impl Fn(&str) -> Result<T, String>) -> Result<T, ParseError> {
        match self.get(key) {
            Some(_) => self.parse(key, f),
            None => Ok(default),
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.get(key).map_or(self.line, |e| e.line)
    }
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn split_sections(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(inner) = content.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return err(line, "unterminated section header");
            };
            let parts: Vec<&str> = inner.split_whitespace().collect();
            if parts.len() != 2 {
                return err(line, "section header must be `[kind id]`");
            }
            if !valid_ident(parts[1]) {
                return err(line, format!("invalid id `{}`", parts[1]));
            }
            sections.push(Section { kind: parts[0].to_string(), id: parts[1].to_string(), line, entries: Vec::new() });
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return err(line, format!("expected `key = value`, found `{content}`"));
        };
        let (key, value) = (key.trim(), value.trim());
        if !valid_ident(key) {
            return err(line, format!("invalid key `{key}`"));
        }
        if value.is_empty() {
            return err(line, format!("`{key}` has no value"));
        }
        let Some(sec) = sections.last_mut() else {
            return err(line, "key outside of any section");
        };
        if let Some(first) = sec.entries.iter().find(|e| e.key == key) {
            return err(line, format!("duplicate key `{key}` (first set at line {})", first.line));
        }
        sec.entries.push(Entry { key: key.to_string(), value: value.to_string(), line });
    }
    Ok(sections)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("`{}` is not a valid number", s.trim()))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split_whitespace().map(parse_num).collect()
}

fn parse_ids(s: &str) -> Result<Vec<String>, String> {
    s.split_whitespace()
        .map(|t| if valid_ident(t) { Ok(t.to_string()) } else { Err(format!("invalid id `{t}`")) })
        .collect()
}

fn parse_ident(s: &str) -> Result<String, String> {
    if valid_ident(s) {
        Ok(s.to_string())
    } else {
        Err(format!("invalid id `{s}`"))
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, found `{s}`")),
    }
}

/// A float, also accepting `2^k` with integer `k`.
pub fn parse_float(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.strip_prefix("2^") {
        Some(k) => 2f64.powi(k.parse::<i32>().map_err(|_| format!("bad exponent in `{s}`"))?),
        None => s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_nonneg_matrix(s: &str) -> Result<NonNegIntMatrix, String> {
    s.parse().map_err(|e: etale_entropy::spectral::SpectralError| format!("malformed matrix: {e}"))
}

fn parse_signed_matrix(s: &str) -> Result<SignedIntMatrix, String> {
    s.parse().map_err(|e: etale_entropy::spectral::SpectralError| format!("malformed matrix: {e}"))
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    s.trim().parse().map_err(|_| format!("`{}` is not a rational number", s.trim()))
}

fn parse_domain(s: &str) -> Result<AffineDomain, String> {
    match s {
        "naturals" => Ok(AffineDomain::Naturals),
        "integers" => Ok(AffineDomain::Integers),
        "reals" => Ok(AffineDomain::Reals),
        _ => Err(format!("unknown domain `{s}`; expected naturals, integers or reals")),
    }
}

fn parse_opens(s: &str) -> Result<Opens, String> {
    match s {
        "discrete" => return Ok(Opens::Discrete),
        "indiscrete" => return Ok(Opens::Indiscrete),
        _ => {}
    }
    let mut sets = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        let Some(body) = rest.strip_prefix('{') else {
            return Err("open sets are written `{0,1} {2}`".into());
        };
        let Some((inner, tail)) = body.split_once('}') else {
            return Err("unclosed `{`".into());
        };
        let set = inner.split(',').map(str::trim).filter(|t| !t.is_empty()).map(parse_num).collect::<Result<Vec<usize>, _>>()?;
        sets.push(set);
        rest = tail.trim_start();
    }
    Ok(Opens::Sets(sets))
}

/// `a.b.c:s` entries of a block map.
fn parse_code(s: &str) -> Result<BTreeMap<Vec<usize>, usize>, String> {
    let mut out = BTreeMap::new();
    for tok in s.split_whitespace() {
        let (window, image) = tok.split_once(':').ok_or_else(|| format!("block map entry `{tok}` must be `a.b:c`"))?;
        let window: Vec<usize> = window.split('.').map(parse_num).collect::<Result<_, _>>()?;
        if out.insert(window, parse_num(image)?).is_some() {
            return Err(format!("window in `{tok}` is listed twice"));
        }
    }
    Ok(out)
}

/// `a-b:h` entries of a cocycle.
fn parse_cocycle(s: &str) -> Result<Cocycle, String> {
    let mut out = Cocycle::new();
    for tok in s.split_whitespace() {
        let bad = || format!("cocycle entry `{tok}` must be `a-b:h`");
        let (edge, h) = tok.split_once(':').ok_or_else(bad)?;
        let (a, b) = edge.split_once('-').ok_or_else(bad)?;
        if out.insert((parse_num(a)?, parse_num(b)?), parse_num(h)?).is_some() {
            return Err(format!("edge in `{tok}` is listed twice"));
        }
    }
    Ok(out)
}

fn parse_candidates(s: &str) -> Result<Vec<Candidate>, String> {
    s.split(';')
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .map(|c| {
            let (head, args) = c.split_once(char::is_whitespace).unwrap_or((c, ""));
            match head {
                "whole" if args.trim().is_empty() => Ok(Candidate::Whole),
                "subset" => Ok(Candidate::Subset(parse_list(args)?)),
                "points" => Ok(Candidate::Points(args.split_whitespace().map(parse_rational).collect::<Result<_, _>>()?)),
                "interval" => {
                    let v: Vec<BigRational> = args.split_whitespace().map(parse_rational).collect::<Result<_, _>>()?;
                    match <[BigRational; 2]>::try_from(v) {
                        Ok([lo, hi]) => Ok(Candidate::Interval { lo, hi }),
                        Err(_) => Err("an interval takes two endpoints".into()),
                    }
                }
                _ => Err(format!("unknown candidate `{c}`; expected whole, subset, points or interval")),
            }
        })
        .collect()
}

fn parse_pullbacks(s: &str) -> Result<Vec<Vec<usize>>, String> {
    s.split(';').map(str::trim).filter(|t| !t.is_empty()).map(parse_list).collect()
}

fn parse_declared(s: &str) -> Result<Vec<(String, u64)>, String> {
    s.split_whitespace()
        .map(|tok| {
            let (id, d) = tok.split_once(':').ok_or_else(|| format!("declared entry `{tok}` must be `id:degree`"))?;
            Ok((parse_ident(id)?, parse_num(d)?))
        })
        .collect()
}

fn system_spec(sec: &Section) -> Result<SystemSpec, ParseError> {
    let kind_name = sec.parse("kind", |s| Ok(s.to_string()))?;
    let kind = match kind_name.as_str() {
        "sft" => {
            sec.check_keys(&["kind", "matrix"])?;
            SystemKind::Sft { matrix: sec.parse("matrix", parse_nonneg_matrix)? }
        }
        "finite" => {
            sec.check_keys(&["kind", "points", "opens", "map"])?;
            SystemKind::Finite {
                points: sec.parse("points", parse_num)?,
                opens: sec.parse_or("opens", Opens::Discrete, parse_opens)?,
                map: sec.parse("map", parse_list)?,
            }
        }
        "affine" => {
            sec.check_keys(&["kind", "domain", "a", "b"])?;
            SystemKind::Affine {
                domain: sec.parse("domain", parse_domain)?,
                a: sec.parse("a", parse_rational)?,
                b: sec.parse("b", parse_rational)?,
            }
        }
        "metric" => {
            sec.check_keys(&["kind", "map", "horizon", "epsilon", "grid"])?;
            let opt = |key: &str| -> Result<Option<u32>, ParseError> { sec.parse_or(key, None, |s| parse_num(s).map(Some)) };
            SystemKind::Metric {
                map: sec.parse("map", |s| Ok(s.to_string()))?,
                horizon: opt("horizon")?,
                epsilon: sec.parse_or("epsilon", None, |s| parse_float(s).map(Some))?,
                grid: opt("grid")?,
            }
        }
        "higher_block" => {
            sec.check_keys(&["kind", "base", "length"])?;
            SystemKind::HigherBlock { base: sec.parse("base", parse_ident)?, length: sec.parse("length", parse_num)? }
        }
        "extension" => {
            sec.check_keys(&["kind", "base", "order", "cocycle"])?;
            SystemKind::Extension {
                base: sec.parse("base", parse_ident)?,
                order: sec.parse("order", parse_num)?,
                cocycle: sec.parse("cocycle", parse_cocycle)?,
            }
        }
        other => {
            return err(
                sec.line_of("kind"),
                format!("unknown system kind `{other}`; expected sft, finite, affine, metric, higher_block or extension"),
            )
        }
    };
    Ok(SystemSpec { id: sec.id.clone(), kind })
}

fn cover_spec(sec: &Section) -> Result<CoverSpec, ParseError> {
    let kind = sec.parse("kind", |s| Ok(s.to_string()))?;
    let base = ["kind", "source", "target"];
    let with = |extra: &[&'static str]| -> Vec<&str> { base.iter().chain(extra).copied().collect() };
    let projection = match kind.as_str() {
        "identity" | "natural" | "universal_cover" | "declared_infinite" => {
            sec.check_keys(&base)?;
            match kind.as_str() {
                "identity" => ProjectionSpec::Identity,
                "natural" => ProjectionSpec::Natural,
                "universal_cover" => ProjectionSpec::UniversalCover,
                _ => ProjectionSpec::DeclaredInfinite,
            }
        }
        "block_code" => {
            sec.check_keys(&with(&["labels", "memory", "anticipation", "code"]))?;
            match (sec.get("labels"), sec.get("code")) {
                (Some(_), None) => {
                    if let Some(e) = sec.get("memory").or(sec.get("anticipation")) {
                        return err(e.line, "`memory` and `anticipation` go with `code`, not `labels`");
                    }
                    ProjectionSpec::Labels(sec.parse("labels", parse_list)?)
                }
                (None, Some(_)) => ProjectionSpec::Code {
                    memory: sec.parse_or("memory", 0, parse_num)?,
                    anticipation: sec.parse_or("anticipation", 0, parse_num)?,
                    entries: sec.parse("code", parse_code)?,
                },
                _ => return err(sec.line, "a block code needs exactly one of `labels` and `code`"),
            }
        }
        "point_map" => {
            sec.check_keys(&with(&["table"]))?;
            ProjectionSpec::PointMap(sec.parse("table", parse_list)?)
        }
        "metric" => {
            sec.check_keys(&with(&["map"]))?;
            ProjectionSpec::Metric(sec.parse("map", |s| Ok(s.to_string()))?)
        }
        other => {
            return err(
                sec.line_of("kind"),
                format!(
                    "unknown cover kind `{other}`; expected identity, block_code, natural, point_map, universal_cover, metric or declared_infinite"
                ),
            )
        }
    };
    Ok(CoverSpec { id: sec.id.clone(), source: sec.parse("source", parse_ident)?, target: sec.parse("target", parse_ident)?, projection })
}

fn compactification_spec(sec: &Section) -> Result<CompactificationSpec, ParseError> {
    sec.check_keys(&["cover", "host", "embedding", "symbols", "density", "host_entropy"])?;
    let embedding = match sec.parse("embedding", |s| Ok(s.to_string()))?.as_str() {
        "identity" => Embedding::Identity,
        "projective" => Embedding::ProjectiveReal,
        "inclusion" => Embedding::SymbolInclusion(sec.parse("symbols", parse_list)?),
        other => return err(sec.line_of("embedding"), format!("unknown embedding `{other}`; expected identity, projective or inclusion")),
    };
    if !matches!(embedding, Embedding::SymbolInclusion(_)) {
        if let Some(e) = sec.get("symbols") {
            return err(e.line, "`symbols` only applies to `embedding = inclusion`");
        }
    }
    let density = sec.parse_or("density", Density::Exact, |s| match s {
        "exact" => Ok(Density::Exact),
        "declared" => Ok(Density::Declared),
        _ => Err(format!("expected exact or declared, found `{s}`")),
    })?;
    let host_entropy = sec.parse_or("host_entropy", HostEntropy::Computed, |s| match s {
        "computed" => Ok(HostEntropy::Computed),
        _ => parse_float(s).map(HostEntropy::Declared).map_err(|e| format!("{e}; expected computed or a number")),
    })?;
    Ok(CompactificationSpec {
        id: sec.id.clone(),
        cover: sec.parse("cover", parse_ident)?,
        host: sec.parse("host", parse_ident)?,
        embedding,
        density,
        host_entropy,
    })
}

fn task_spec(sec: &Section) -> Result<TaskSpec, ParseError> {
    let op_name = sec.parse("op", |s| Ok(s.to_string()))?;
    let op = match op_name.as_str() {
        "h_omega" => {
            sec.check_keys(&["op", "system", "family", "candidates", "auto", "complete"])?;
            TaskOp::HOmega {
                system: sec.parse("system", parse_ident)?,
                family: sec.parse_or("family", Vec::new(), parse_ids)?,
                candidates: sec.parse_or("candidates", Vec::new(), parse_candidates)?,
                auto: sec.parse_or("auto", true, parse_bool)?,
                complete: sec.parse_or("complete", false, parse_bool)?,
            }
        }
        "h_cr" => {
            sec.check_keys(&["op", "system", "candidates", "auto"])?;
            TaskOp::HCr {
                system: sec.parse("system", parse_ident)?,
                candidates: sec.parse_or("candidates", Vec::new(), parse_candidates)?,
                auto: sec.parse_or("auto", true, parse_bool)?,
            }
        }
        "entropy" => {
            sec.check_keys(&["op", "system"])?;
            TaskOp::Entropy { system: sec.parse("system", parse_ident)? }
        }
        "verify_cover" => {
            sec.check_keys(&["op", "cover"])?;
            TaskOp::VerifyCover { cover: sec.parse("cover", parse_ident)? }
        }
        "gamma" => {
            sec.check_keys(&["op", "correspondence"])?;
            TaskOp::Gamma { correspondence: sec.parse("correspondence", parse_ident)? }
        }
        "h_et" => {
            sec.check_keys(&["op", "correspondence", "pullbacks", "declared", "monomial"])?;
            TaskOp::HEt {
                correspondence: sec.parse("correspondence", parse_ident)?,
                pullbacks: sec.parse_or("pullbacks", Vec::new(), parse_pullbacks)?,
                declared: sec.parse_or("declared", Vec::new(), parse_declared)?,
                monomial: sec.parse_or("monomial", None, |s| parse_ident(s).map(Some))?,
            }
        }
        "degrees" => {
            sec.check_keys(&["op", "monomial"])?;
            TaskOp::Degrees { monomial: sec.parse("monomial", parse_ident)? }
        }
        "suite" => {
            sec.check_keys(&["op", "trials"])?;
            TaskOp::Suite { trials: sec.parse_or("trials", 100, parse_num)? }
        }
        "conjecture1" => {
            sec.check_keys(&["op", "trials"])?;
            TaskOp::Conjecture1 { trials: sec.parse_or("trials", 1000, parse_num)? }
        }
        other => {
            return err(
                sec.line_of("op"),
                format!("unknown op `{other}`; expected h_omega, h_cr, entropy, verify_cover, gamma, h_et, degrees, suite or conjecture1"),
            )
        }
    };
    Ok(TaskSpec { id: sec.id.clone(), op })
}

/// Parse a scenario, resolve every reference and build every object once so
/// that errors name the offending line.
pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let sections = split_sections(text)?;
    let mut sc = Scenario::default();
    let mut seen: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    let mut by_kind: BTreeMap<&str, Vec<&Section>> = BTreeMap::new();
    for sec in &sections {
        if !["system", "cover", "compactification", "correspondence", "monomial", "task"].contains(&sec.kind.as_str()) {
            return err(
                sec.line,
                format!("unknown section kind `{}`; expected system, cover, compactification, correspondence, monomial or task", sec.kind),
            );
        }
        if let Some(first) = seen.insert((&sec.kind, &sec.id), sec.line) {
            return err(sec.line, format!("duplicate {} id `{}` (first defined at line {first})", sec.kind, sec.id));
        }
        by_kind.entry(sec.kind.as_str()).or_default().push(sec);
    }
    let secs = |k: &str| by_kind.get(k).cloned().unwrap_or_default();
    let defined = |kind: &str, id: &str| seen.contains_key(&(kind, id));
    let resolve = |sec: &Section, key: &str, kind: &str, id: &str| -> Result<(), ParseError> {
        if defined(kind, id) {
            Ok(())
        } else {
            err(sec.line_of(key), format!("unresolved reference: no {kind} `{id}`"))
        }
    };

    let cfg = EvalConfig::default();
    let mut built = Built::default();
    for sec in secs("system") {
        let spec = system_spec(sec)?;
        if let SystemKind::HigherBlock { base, .. } | SystemKind::Extension { base, .. } = &spec.kind {
            resolve(sec, "base", "system", base)?;
            if !sc.systems.iter().any(|s| &s.id == base) {
                return err(sec.line_of("base"), format!("system `{base}` must be defined before `{}`", sec.id));
            }
        }
        let d = build_system(&spec, &built.registry, &cfg).map_err(|r| ParseError { line: sec.line, reason: r })?;
        built.registry.add_system(d).map_err(|e| ParseError { line: sec.line, reason: e.to_string() })?;
        sc.systems.push(spec);
    }
    for sec in secs("cover") {
        let spec = cover_spec(sec)?;
        resolve(sec, "source", "system", &spec.source)?;
        resolve(sec, "target", "system", &spec.target)?;
        let w = build_cover(&spec, &built.registry, &cfg, &sc.systems).map_err(|r| ParseError { line: sec.line, reason: r })?;
        built.registry.add_cover(w).map_err(|e| ParseError { line: sec.line, reason: e.to_string() })?;
        sc.covers.push(spec);
    }
    for sec in secs("compactification") {
        let spec = compactification_spec(sec)?;
        resolve(sec, "cover", "cover", &spec.cover)?;
        resolve(sec, "host", "system", &spec.host)?;
        sc.compactifications.push(spec);
    }
    for sec in secs("correspondence") {
        sec.check_keys(&["matrix"])?;
        sc.correspondences.push(CorrespondenceSpec { id: sec.id.clone(), matrix: sec.parse("matrix", parse_nonneg_matrix)? });
    }
    for sec in secs("monomial") {
        sec.check_keys(&["matrix"])?;
        let matrix = sec.parse("matrix", parse_signed_matrix)?;
        MonomialMap::new(matrix.clone()).map_err(|e| ParseError { line: sec.line_of("matrix"), reason: e.to_string() })?;
        sc.monomials.push(MonomialSpec { id: sec.id.clone(), matrix });
    }
    for sec in secs("task") {
        let spec = task_spec(sec)?;
        match &spec.op {
            TaskOp::HOmega { system, family, .. } => {
                resolve(sec, "system", "system", system)?;
                for z in family {
                    resolve(sec, "family", "compactification", z)?;
                }
            }
            TaskOp::HCr { system, .. } | TaskOp::Entropy { system } => resolve(sec, "system", "system", system)?,
            TaskOp::VerifyCover { cover } => resolve(sec, "cover", "cover", cover)?,
            TaskOp::Gamma { correspondence } => resolve(sec, "correspondence", "correspondence", correspondence)?,
            TaskOp::HEt { correspondence, declared, monomial, .. } => {
                resolve(sec, "correspondence", "correspondence", correspondence)?;
                for (id, _) in declared {
                    resolve(sec, "declared", "correspondence", id)?;
                }
                if let Some(m) = monomial {
                    resolve(sec, "monomial", "monomial", m)?;
                }
            }
            TaskOp::Degrees { monomial } => resolve(sec, "monomial", "monomial", monomial)?,
            TaskOp::Suite { trials } | TaskOp::Conjecture1 { trials } => {
                if *trials == 0 {
                    return err(sec.line_of("trials"), "`trials` must be positive");
                }
            }
        }
        sc.tasks.push(spec);
    }
    Ok(sc)
}

fn join<T: fmt::Display>(v: &[T], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn candidate_text(c: &Candidate) -> String {
    match c {
        Candidate::Whole => "whole".into(),
        Candidate::Subset(s) => format!("subset {}", join(s, " ")),
        Candidate::Points(p) => format!("points {}", join(p, " ")),
        Candidate::Interval { lo, hi } => format!("interval {lo} {hi}"),
    }
}

/// The canonical text form; parsing it gives back an equal scenario.
impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut header = |f: &mut fmt::Formatter<'_>, kind: &str, id: &str| -> fmt::Result {
            if !first {
                writeln!(f)?;
            }
            first = false;
            writeln!(f, "[{kind} {id}]")
        };
        for s in &self.systems {
            header(f, "system", &s.id)?;
            match &s.kind {
                SystemKind::Sft { matrix } => writeln!(f, "kind = sft\nmatrix = {matrix}")?,
                SystemKind::Finite { points, opens, map } => {
                    writeln!(f, "kind = finite\npoints = {points}")?;
                    match opens {
                        Opens::Discrete => writeln!(f, "opens = discrete")?,
                        Opens::Indiscrete => writeln!(f, "opens = indiscrete")?,
                        Opens::Sets(sets) => {
                            let text: Vec<String> = sets.iter().map(|s| format!("{{{}}}", join(s, ","))).collect();
                            writeln!(f, "opens = {}", text.join(" "))?
                        }
                    }
                    writeln!(f, "map = {}", join(map, " "))?
                }
                SystemKind::Affine { domain, a, b } => writeln!(f, "kind = affine\ndomain = {}\na = {a}\nb = {b}", domain.name())?,
                SystemKind::Metric { map, horizon, epsilon, grid } => {
                    writeln!(f, "kind = metric\nmap = {map}")?;
                    if let Some(h) = horizon {
                        writeln!(f, "horizon = {h}")?;
                    }
                    if let Some(e) = epsilon {
                        writeln!(f, "epsilon = {e}")?;
                    }
                    if let Some(g) = grid {
                        writeln!(f, "grid = {g}")?;
                    }
                }
                SystemKind::HigherBlock { base, length } => writeln!(f, "kind = higher_block\nbase = {base}\nlength = {length}")?,
                SystemKind::Extension { base, order, cocycle } => {
                    let text: Vec<String> = cocycle.iter().map(|((a, b), h)| format!("{a}-{b}:{h}")).collect();
                    writeln!(f, "kind = extension\nbase = {base}\norder = {order}\ncocycle = {}", text.join(" "))?
                }
            }
        }
        for c in &self.covers {
            header(f, "cover", &c.id)?;
            writeln!(f, "source = {}\ntarget = {}", c.source, c.target)?;
            match &c.projection {
                ProjectionSpec::Identity => writeln!(f, "kind = identity")?,
                ProjectionSpec::Labels(l) => writeln!(f, "kind = block_code\nlabels = {}", join(l, " "))?,
                ProjectionSpec::Code { memory, anticipation, entries } => {
                    let text: Vec<String> = entries.iter().map(|(w, s)| format!("{}:{s}", join(w, "."))).collect();
                    writeln!(f, "kind = block_code\nmemory = {memory}\nanticipation = {anticipation}\ncode = {}", text.join(" "))?
                }
                ProjectionSpec::Natural => writeln!(f, "kind = natural")?,
                ProjectionSpec::PointMap(t) => writeln!(f, "kind = point_map\ntable = {}", join(t, " "))?,
                ProjectionSpec::UniversalCover => writeln!(f, "kind = universal_cover")?,
                ProjectionSpec::Metric(m) => writeln!(f, "kind = metric\nmap = {m}")?,
                ProjectionSpec::DeclaredInfinite => writeln!(f, "kind = declared_infinite")?,
            }
        }
        for z in &self.compactifications {
            header(f, "compactification", &z.id)?;
            writeln!(f, "cover = {}\nhost = {}", z.cover, z.host)?;
            match &z.embedding {
                Embedding::Identity => writeln!(f, "embedding = identity")?,
                Embedding::ProjectiveReal => writeln!(f, "embedding = projective")?,
                Embedding::SymbolInclusion(s) => writeln!(f, "embedding = inclusion\nsymbols = {}", join(s, " "))?,
            }
            let density = match z.density {
                Density::Exact => "exact",
                Density::Declared => "declared",
            };
            writeln!(f, "density = {density}")?;
            match z.host_entropy {
                HostEntropy::Computed => writeln!(f, "host_entropy = computed")?,
                HostEntropy::Declared(v) => writeln!(f, "host_entropy = {v}")?,
            }
        }
        for c in &self.correspondences {
            header(f, "correspondence", &c.id)?;
            writeln!(f, "matrix = {}", c.matrix)?;
        }
        for m in &self.monomials {
            header(f, "monomial", &m.id)?;
            writeln!(f, "matrix = {}", m.matrix)?;
        }
        for t in &self.tasks {
            header(f, "task", &t.id)?;
            writeln!(f, "op = {}", t.op.name())?;
            let candidates = |c: &[Candidate]| c.iter().map(candidate_text).collect::<Vec<_>>().join("; ");
            match &t.op {
                TaskOp::HOmega { system, family, candidates: c, auto, complete } => {
                    writeln!(f, "system = {system}")?;
                    if !family.is_empty() {
                        writeln!(f, "family = {}", family.join(" "))?;
                    }
                    if !c.is_empty() {
                        writeln!(f, "candidates = {}", candidates(c))?;
                    }
                    writeln!(f, "auto = {auto}\ncomplete = {complete}")?
                }
                TaskOp::HCr { system, candidates: c, auto } => {
                    writeln!(f, "system = {system}")?;
                    if !c.is_empty() {
                        writeln!(f, "candidates = {}", candidates(c))?;
                    }
                    writeln!(f, "auto = {auto}")?
                }
                TaskOp::Entropy { system } => writeln!(f, "system = {system}")?,
                TaskOp::VerifyCover { cover } => writeln!(f, "cover = {cover}")?,
                TaskOp::Gamma { correspondence } => writeln!(f, "correspondence = {correspondence}")?,
                TaskOp::HEt { correspondence, pullbacks, declared, monomial } => {
                    writeln!(f, "correspondence = {correspondence}")?;
                    if !pullbacks.is_empty() {
                        let text: Vec<String> = pullbacks.iter().map(|p| join(p, " ")).collect();
                        writeln!(f, "pullbacks = {}", text.join("; "))?;
                    }
                    if !declared.is_empty() {
                        let text: Vec<String> = declared.iter().map(|(id, d)| format!("{id}:{d}")).collect();
                        writeln!(f, "declared = {}", text.join(" "))?;
                    }
                    if let Some(m) = monomial {
                        writeln!(f, "monomial = {m}")?;
                    }
                }
                TaskOp::Degrees { monomial } => writeln!(f, "monomial = {monomial}")?,
                TaskOp::Suite { trials } | TaskOp::Conjecture1 { trials } => writeln!(f, "trials = {trials}")?,
            }
        }
        Ok(())
    }
}
