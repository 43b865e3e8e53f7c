//! Entropy of systems on arbitrary topological spaces through compact
//! invariant subsets and compactifications of finite-fibered covers.

mod conjecture;
mod cover;
mod hcr;
mod report;
mod system;
mod theorem1;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bracket::Bracket;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::metric::{bowen_entropy_estimate, BowenParams, MetricError};
use crate::spectral::SpectralError;
use crate::symbolic::{sft_entropy, SymbolicCaps, SymbolicError};

pub use conjecture::{conjecture1_search, replay_trial, ConjectureReport, CoverKind, TrialRecord};
pub use cover::{
    verify_compactification, verify_etale_cover, CompactificationCheck, CompactificationWitness, CoverVerdict,
    CoverWitness, Density, Embedding, FiberEvidence, HostEntropy, Projection, RejectReason,
};
pub use hcr::{h_cr, Candidate, CandidateOutcome, HcrResult};
pub use report::{h_omega, EntropyReport, FamilyEntry, EMPTY_FAMILY_CAVEAT};
pub use system::{
    AffineDomain, AffineSystem, FiniteSystem, FiniteTopSpace, SystemDescriptor, SystemVariant, MAX_FINITE_POINTS,
    MAX_OPEN_SETS,
};
pub use theorem1::{theorem1_suite, GeneratorParams, PartOutcome, SuiteReport, EQUALITY_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EtaleError {
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("finite space: {0}")]
    FiniteSpace(String),
    #[error("affine system: {0}")]
    Affine(String),
    #[error("system `{0}` is not compact")]
    NotCompact(String),
    #[error("unknown {kind} `{id}`")]
    Unknown { kind: &'static str, id: String },
    #[error("duplicate {kind} id `{id}`")]
    Duplicate { kind: &'static str, id: String },
    #[error("invalid generator parameters: {0}")]
    Generator(String),
    #[error("trials must be at least 1")]
    NoTrials,
}

/// Where a number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Outward-rounded bracket from exact or certified arithmetic.
    Certified,
    /// Numerical estimate without an error bound.
    Numeric,
    /// Supplied by the scenario author.
    Declared,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Certified => "certified",
            Provenance::Numeric => "NUMERIC",
            Provenance::Declared => "declared",
        })
    }
}

/// How a check was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Decided exhaustively or by exact arithmetic.
    Exact,
    /// Tested on finitely many sample points.
    Sampled,
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckMode::Exact => "exact",
            CheckMode::Sampled => "sampled",
        })
    }
}

/// An entropy bracket with its provenance tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub bracket: Bracket,
    pub provenance: Provenance,
}

impl EntropyValue {
    pub fn certified(bracket: Bracket) -> Self {
        EntropyValue { bracket, provenance: Provenance::Certified }
    }

    pub fn numeric(estimate: f64) -> Self {
        EntropyValue { bracket: Bracket::exact(estimate), provenance: Provenance::Numeric }
    }

    pub fn declared(value: f64) -> Self {
        EntropyValue { bracket: Bracket::exact(value), provenance: Provenance::Declared }
    }

    pub fn zero() -> Self {
        Self::certified(Bracket::zero())
    }

    /// The bracket entering comparisons: numeric values are widened by
    /// `band` on each side (never below zero).
    pub fn guarded(&self, band: f64) -> Bracket {
        match self.provenance {
            Provenance::Numeric => {
                let w = self.bracket.widen(band);
                Bracket { lower: w.lower.max(0.0), upper: w.upper }
            }
            _ => self.bracket,
        }
    }

    /// The weaker of two provenance tags (certified < numeric < declared).
    pub fn combine_tag(a: Provenance, b: Provenance) -> Provenance {
        a.max(b)
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.bracket, self.provenance)
    }
}

/// Evaluator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Target width of certified brackets.
    pub tol: f64,
    /// Half-width added around numeric estimates before they are compared.
    pub guard_band: f64,
    pub bowen: BowenParams,
    /// Points checked by sampled verifications.
    pub sample_budget: usize,
    pub sample_seed: u64,
    /// Observed fiber sizes beyond this count as unbounded.
    pub fiber_bound: u64,
    /// Most symbol subsets enumerated for internal entropy of a shift.
    pub max_subsets: usize,
    /// Longest target word used when computing the degree of a code.
    pub degree_length: usize,
    #[serde(skip, default)]
    pub caps: SymbolicCaps,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            tol: 1e-9,
            guard_band: 0.05,
            bowen: BowenParams { horizon: 14, eps: 1.0 / 1024.0, grid_bits: 16 },
            sample_budget: 10_000,
            sample_seed: 0,
            fiber_bound: 64,
            max_subsets: 4096,
            degree_length: 4,
            caps: SymbolicCaps::default(),
        }
    }
}

/// Topological entropy of a compact system: exact zero on finite spaces,
/// a certified bracket for shifts, a numeric estimate for metric maps.
pub fn host_entropy(sys: &SystemDescriptor, cfg: &EvalConfig) -> Result<EntropyValue, EtaleError> {
    match &sys.variant {
        // A finite space has finitely many open covers, so joins cannot grow.
        SystemVariant::FiniteTop(_) => Ok(EntropyValue::zero()),
        SystemVariant::Sft(s) => Ok(EntropyValue::certified(sft_entropy(s, cfg.tol)?.bracket)),
        SystemVariant::Metric { system, bowen } => {
            let params = bowen.unwrap_or(cfg.bowen);
            Ok(EntropyValue::numeric(bowen_entropy_estimate(system, &params)?.estimate))
        }
        SystemVariant::SymbolicAffine(_) => Err(EtaleError::NotCompact(sys.id.clone())),
    }
}

/// Generator for trial `trial` of a seeded run: the master seed selects the
/// key, the trial index the stream, so trials are independent of order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Systems, covers and compactifications keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub systems: BTreeMap<String, SystemDescriptor>,
    pub covers: BTreeMap<String, CoverWitness>,
    pub compactifications: BTreeMap<String, CompactificationWitness>,
}

impl Registry {
    pub fn add_system(&mut self, sys: SystemDescriptor) -> Result<(), EtaleError> {
        if self.systems.contains_key(&sys.id) {
            return Err(EtaleError::Duplicate { kind: "system", id: sys.id });
        }
        self.systems.insert(sys.id.clone(), sys);
        Ok(())
    }

    pub fn add_cover(&mut self, cover: CoverWitness) -> Result<(), EtaleError> {
        for id in [&cover.source, &cover.target] {
            self.system(id)?;
        }
        if self.covers.contains_key(&cover.id) {
            return Err(EtaleError::Duplicate { kind: "cover", id: cover.id });
        }
        self.covers.insert(cover.id.clone(), cover);
        Ok(())
    }

    pub fn add_compactification(&mut self, w: CompactificationWitness) -> Result<(), EtaleError> {
        self.cover(&w.cover)?;
        self.system(&w.host)?;
        if self.compactifications.contains_key(&w.id) {
            return Err(EtaleError::Duplicate { kind: "compactification", id: w.id });
        }
        self.compactifications.insert(w.id.clone(), w);
        Ok(())
    }

    pub fn system(&self, id: &str) -> Result<&SystemDescriptor, EtaleError> {
        self.systems.get(id).ok_or_else(|| EtaleError::Unknown { kind: "system", id: id.to_string() })
    }

    pub fn cover(&self, id: &str) -> Result<&CoverWitness, EtaleError> {
        self.covers.get(id).ok_or_else(|| EtaleError::Unknown { kind: "cover", id: id.to_string() })
    }

    pub fn compactification(&self, id: &str) -> Result<&CompactificationWitness, EtaleError> {
        self.compactifications
            .get(id)
            .ok_or_else(|| EtaleError::Unknown { kind: "compactification", id: id.to_string() })
    }
}
