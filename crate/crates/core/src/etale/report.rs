//! The entropy report: internal entropy as the lower end and the least host
//! entropy over a registered family of compactified étale covers above it.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::cover::{verify_compactification, verify_etale_cover, CompactificationCheck, CoverVerdict, Embedding, HostEntropy, Projection};
use super::hcr::{h_cr, Candidate, HcrResult};
use super::{EntropyValue, EtaleError, EvalConfig, Provenance, Registry};
use crate::bracket::Bracket;

pub const EMPTY_FAMILY_CAVEAT: &str =
    "family empty; the infimum over all compactified covers is unbounded above by construction via Stone–Čech (not computed)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyEntry {
    /// Compactification id.
    pub id: String,
    pub cover: String,
    pub host: String,
    pub verdict: CoverVerdict,
    pub check: CompactificationCheck,
    /// Host entropy as it enters the minimum (guard band applied); `None`
    /// when the entry was excluded.
    pub guarded: Option<Bracket>,
}

impl FamilyEntry {
    pub fn contributes(&self) -> bool {
        self.guarded.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub system: String,
    pub h_cr: HcrResult,
    pub family: Vec<FamilyEntry>,
    /// Minimum of the guarded host entropies of the contributing entries.
    pub family_min: Option<EntropyValue>,
    pub value: EntropyValue,
    pub exact: bool,
    pub caveats: Vec<String>,
}

/// Evaluate `max(h_CR, min over the family)` for the system `system`.
///
/// `family` lists compactification ids. Entries whose cover is rejected or
/// whose compactification fails its checks are excluded with a caveat.
/// `complete` records that the scenario declares the family to realize the
/// infimum; the result is flagged exact only when every input is certified
/// and either the family is complete or the bracket collapses onto `h_CR`.
pub fn h_omega(
    reg: &Registry,
    system: &str,
    candidates: &[Candidate],
    auto: bool,
    family: &[String],
    complete: bool,
    cfg: &EvalConfig,
) -> Result<EntropyReport, EtaleError> {
    let sys = reg.system(system)?;
    let hcr = h_cr(sys, candidates, auto, cfg)?;
    let lower = hcr.value.guarded(cfg.guard_band);
    let mut caveats = Vec::new();
    let mut entries = Vec::with_capacity(family.len());
    let mut family_min: Option<EntropyValue> = None;
    let mut collapses = false;
    for id in family {
        let w = reg.compactification(id)?;
        let cover = reg.cover(&w.cover)?;
        let verdict = verify_etale_cover(reg, cover, cfg)?;
        let check = verify_compactification(reg, w, cfg)?;
        let mut guarded = None;
        if cover.target != sys.id {
            caveats.push(format!("{id}: cover `{}` does not cover `{}`; excluded", cover.id, sys.id));
        } else if let CoverVerdict::Rejected { reason } = &verdict {
            caveats.push(format!("{id}: cover `{}` rejected ({reason}); excluded", cover.id));
        } else if let Some(f) = &check.failure {
            caveats.push(format!("{id}: compactification rejected ({f}); excluded"));
        } else if let Some(h) = check.entropy {
            let g = h.guarded(cfg.guard_band);
            guarded = Some(g);
            family_min = Some(match family_min {
                None => EntropyValue { bracket: g, provenance: h.provenance },
                Some(m) => EntropyValue {
                    bracket: m.bracket.min(&g),
                    provenance: EntropyValue::combine_tag(m.provenance, h.provenance),
                },
            });
            // The system compactified by itself: its entropy is a verified
            // candidate of h_CR, so the minimum cannot exceed h_CR.
            if cover.projection == Projection::Identity
                && w.embedding == Embedding::Identity
                && w.host_entropy == HostEntropy::Computed
                && sys.is_compact()
            {
                collapses = true;
            }
        }
        entries.push(FamilyEntry { id: id.clone(), cover: cover.id.clone(), host: w.host.clone(), verdict, check, guarded });
    }
    let value = match family_min {
        None => {
            caveats.push(EMPTY_FAMILY_CAVEAT.to_string());
            EntropyValue { bracket: lower, provenance: hcr.value.provenance }
        }
        Some(m) => {
            collapses |= m.bracket.upper <= lower.lower;
            if collapses {
                EntropyValue { bracket: lower, provenance: hcr.value.provenance }
            } else {
                EntropyValue {
                    bracket: lower.max(&m.bracket),
                    provenance: EntropyValue::combine_tag(hcr.value.provenance, m.provenance),
                }
            }
        }
    };
    let certified = value.provenance == Provenance::Certified
        && family_min.is_none_or(|m| m.provenance == Provenance::Certified);
    let exact = family_min.is_some() && certified && (collapses || complete);
    if family_min.is_some() && !exact {
        caveats.push("value is the least registered host entropy, an upper representative of the infimum".into());
    }
    Ok(EntropyReport { system: sys.id.clone(), h_cr: hcr, family: entries, family_min, value, exact, caveats })
}

impl fmt::Display for EntropyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system {}", self.system)?;
        writeln!(f, "  h_cr    {}", self.h_cr.value)?;
        for e in &self.family {
            match (&e.guarded, &e.check.entropy) {
                (Some(g), Some(h)) => writeln!(f, "  family  {} host={} h_top={} guarded={}", e.id, e.host, h, g)?,
                _ => writeln!(f, "  family  {} host={} excluded", e.id, e.host)?,
            }
        }
        match &self.family_min {
            Some(m) => writeln!(f, "  min     {m}")?,
            None => writeln!(f, "  min     none")?,
        }
        writeln!(f, "  value   {}", self.value)?;
        writeln!(f, "  exact   {}", self.exact)?;
        for c in &self.caveats {
            writeln!(f, "  caveat  {c}")?;
        }
        Ok(())
    }
}
