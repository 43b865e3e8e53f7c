//! Seeded property checks of the basic properties of the entropy on
//! compact shifts: agreement with topological entropy, monotonicity under
//! invariant subsets, comparison along covers, iterates and products.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cover::{CompactificationWitness, CoverWitness, Density, Embedding, HostEntropy, Projection};
use super::hcr::Candidate;
use super::report::h_omega;
use super::{trial_rng, verify_etale_cover, EtaleError, EvalConfig, Registry, SystemDescriptor, SystemVariant};
use crate::bracket::Bracket;
use crate::spectral::{matrix_power, perron_root, tensor_product, NonNegIntMatrix, SpectralCaps};
use crate::symbolic::{group_extension, higher_block, random_cocycle, random_irreducible_sft, sft_entropy, sub_sft, Sft};

/// Tolerance for the equalities of the iterate and product parts.
pub const EQUALITY_TOL: f64 = 1e-6;

/// Shape of the random shifts used by the seeded suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub min_states: usize,
    pub max_states: usize,
    /// Probability of each extra edge beyond a Hamiltonian cycle.
    pub density: f64,
    /// Largest iterate checked.
    pub max_power: u32,
    /// Largest group order for extensions.
    pub max_order: u64,
    /// Largest block length for higher block presentations.
    pub max_block: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams { min_states: 2, max_states: 5, density: 0.4, max_power: 5, max_order: 3, max_block: 3 }
    }
}

impl GeneratorParams {
    pub(crate) fn validate(&self) -> Result<(), EtaleError> {
        if self.min_states == 0
            || self.min_states > self.max_states
            || !(0.0..=1.0).contains(&self.density)
            || self.max_power == 0
            || self.max_order == 0
            || self.max_block == 0
        {
            return Err(EtaleError::Generator(format!("{self:?}")));
        }
        Ok(())
    }

    pub(crate) fn shift<R: Rng>(&self, rng: &mut R) -> Sft {
        let n = rng.gen_range(self.min_states..=self.max_states);
        random_irreducible_sft(n, self.density, rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartOutcome {
    pub part: u8,
    pub name: String,
    pub checks: usize,
    /// One line per failed check, naming the trial and the instance.
    pub failures: Vec<String>,
}

impl PartOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: u64,
    /// Trials that ran to the end.
    pub completed: u64,
    pub parts: Vec<PartOutcome>,
    /// Set when a trial hit a size cap; later trials still run.
    pub errors: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.parts.iter().all(PartOutcome::passed)
    }

    pub fn part(&self, n: u8) -> &PartOutcome {
        &self.parts[n as usize - 1]
    }
}

const PART_NAMES: [&str; 5] = ["compact space", "invariant subspace", "special etale cover", "iterates", "product"];

pub fn theorem1_suite(params: &GeneratorParams, seed: u64, trials: u64, cfg: &EvalConfig) -> Result<SuiteReport, EtaleError> {
    if trials == 0 {
        return Err(EtaleError::NoTrials);
    }
    params.validate()?;
    let mut parts: Vec<PartOutcome> = PART_NAMES
        .iter()
        .enumerate()
        .map(|(i, n)| PartOutcome { part: i as u8 + 1, name: n.to_string(), checks: 0, failures: Vec::new() })
        .collect();
    let mut errors = Vec::new();
    let mut completed = 0;
    for trial in 0..trials {
        match run_trial(params, seed, trial, cfg, &mut parts) {
            Ok(()) => completed += 1,
            Err(e) => errors.push(format!("trial {trial}: {e}")),
        }
    }
    Ok(SuiteReport { seed, trials, completed, parts, errors })
}

/// `h_Ω` of a compact shift through the family consisting of itself.
fn entropy_via_self(s: &Sft, cfg: &EvalConfig) -> Result<(Bracket, bool), EtaleError> {
    let mut reg = Registry::default();
    reg.add_system(SystemDescriptor::new("x", SystemVariant::Sft(s.clone())))?;
    reg.add_cover(CoverWitness { id: "id".into(), source: "x".into(), target: "x".into(), projection: Projection::Identity })?;
    reg.add_compactification(CompactificationWitness {
        id: "self".into(),
        cover: "id".into(),
        host: "x".into(),
        embedding: Embedding::Identity,
        density: Density::Exact,
        host_entropy: HostEntropy::Computed,
    })?;
    let r = h_omega(&reg, "x", &[Candidate::Whole], false, &["self".into()], false, cfg)?;
    Ok((r.value.bracket, r.exact))
}

fn log_root(a: &NonNegIntMatrix, cfg: &EvalConfig) -> Result<Bracket, EtaleError> {
    Ok(perron_root(a, cfg.tol / 4.0)?.bracket().clamp_below(1.0).ln().clamp_below(0.0))
}

fn run_trial(
    params: &GeneratorParams,
    seed: u64,
    trial: u64,
    cfg: &EvalConfig,
    parts: &mut [PartOutcome],
) -> Result<(), EtaleError> {
    let mut rng = trial_rng(seed, trial);
    let a = params.shift(&mut rng);
    let b = params.shift(&mut rng);
    let tag = |what: String| format!("trial {trial} (seed {seed}) A=[{}]: {what}", a.transition());
    let mut record = |part: usize, ok: bool, what: String| {
        parts[part - 1].checks += 1;
        if !ok {
            parts[part - 1].failures.push(tag(what));
        }
    };

    let top = sft_entropy(&a, cfg.tol)?.bracket;
    let (h, exact) = entropy_via_self(&a, cfg)?;
    record(1, h == top && exact, format!("h_omega {h} vs h_top {top}, exact={exact}"));

    let n = a.alphabet_size();
    let mut subset: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    if subset.is_empty() {
        subset.push(rng.gen_range(0..n));
    }
    let sub = sub_sft(&a, &subset)?;
    let hs = match &sub.sft {
        Some(t) => entropy_via_self(t, cfg)?.0,
        None => Bracket::zero(),
    };
    record(2, !hs.certainly_gt(&h), format!("sub_sft {subset:?}: {hs} exceeds {h}"));

    let k = rng.gen_range(2..=params.max_block.max(2));
    let hb = higher_block(&a, k, &cfg.caps)?;
    let order = rng.gen_range(1..=params.max_order);
    let cocycle = random_cocycle(&a, order, &mut rng);
    let ext = group_extension(&a, order, &cocycle, &cfg.caps)?;
    for (label, source, code) in [(format!("{k}-block"), hb.sft, hb.code), (format!("extension of order {order}"), ext.sft, ext.projection)] {
        let mut reg = Registry::default();
        reg.add_system(SystemDescriptor::new("src", SystemVariant::Sft(source.clone())))?;
        reg.add_system(SystemDescriptor::new("tgt", SystemVariant::Sft(a.clone())))?;
        let w = CoverWitness { id: "pi".into(), source: "src".into(), target: "tgt".into(), projection: Projection::BlockCode(code) };
        let verdict = verify_etale_cover(&reg, &w, cfg)?;
        if !verdict.is_verified() {
            record(3, false, format!("{label} cover not verified: {verdict}"));
            continue;
        }
        let hsrc = entropy_via_self(&source, cfg)?.0;
        record(3, !h.certainly_gt(&hsrc), format!("{label}: target {h} exceeds source {hsrc}"));
    }

    let caps = SpectralCaps::default();
    for p in 2..=params.max_power {
        let hp = log_root(&matrix_power(a.transition(), p, &caps)?, cfg)?;
        let scaled = top.scale(p as f64);
        let ok = hp.possibly_le(&scaled, 0.0) && hp.overlaps(&scaled, EQUALITY_TOL);
        record(4, ok, format!("power {p}: {hp} vs {p}·h = {scaled}"));
    }

    let hb_top = sft_entropy(&b, cfg.tol)?.bracket;
    let hab = log_root(&tensor_product(a.transition(), b.transition(), &caps)?, cfg)?;
    let sum = top.add(&hb_top);
    let ok = top.max(&hb_top).possibly_le(&hab, 0.0) && hab.possibly_le(&sum, 0.0) && hab.overlaps(&sum, EQUALITY_TOL);
    record(5, ok, format!("B=[{}]: product {hab}, factors {top} and {hb_top}", b.transition()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_a_few_trials() {
        let r = theorem1_suite(&GeneratorParams::default(), 7, 5, &EvalConfig::default()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.completed, 5);
        assert_eq!(r.part(4).checks, 5 * 4);
        assert_eq!(r.part(3).checks, 10);
    }

    #[test]
    fn rejects_bad_parameters() {
        let cfg = EvalConfig::default();
        assert!(matches!(theorem1_suite(&GeneratorParams::default(), 0, 0, &cfg), Err(EtaleError::NoTrials)));
        let bad = GeneratorParams { min_states: 4, max_states: 3, ..GeneratorParams::default() };
        assert!(theorem1_suite(&bad, 0, 1, &cfg).is_err());
    }
}
