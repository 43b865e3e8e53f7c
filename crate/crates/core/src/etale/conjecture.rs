//! Search for compact shifts whose entropy exceeds that of a compactified
//! étale cover. Each trial builds a base shift, a finite-to-one cover of it
//! and the closure of the cover, and compares certified entropy brackets.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::theorem1::GeneratorParams;
use super::{trial_rng, EtaleError, EvalConfig};
use crate::bracket::Bracket;
use crate::spectral::NonNegIntMatrix;
use crate::symbolic::{group_extension, higher_block, is_finite_to_one, is_onto, random_cocycle, sft_entropy, Sft, SlidingBlockCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverKind {
    Identity,
    HigherBlock,
    GroupExtension,
    /// A group extension with one periodic orbit removed.
    Punctured,
}

impl fmt::Display for CoverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoverKind::Identity => "identity",
            CoverKind::HigherBlock => "higher_block",
            CoverKind::GroupExtension => "group_extension",
            CoverKind::Punctured => "punctured",
        })
    }
}

/// Everything needed to rebuild and re-check one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub trial: u64,
    pub kind: CoverKind,
    pub base: NonNegIntMatrix,
    /// The cover construction: block length, or group order and cocycle.
    pub cover: String,
    /// The shift the cover lives in (before any puncture).
    pub cover_shift: NonNegIntMatrix,
    /// States of the removed periodic orbit, in cycle order.
    pub removed: Vec<usize>,
    /// The closure of the cover.
    pub closure: NonNegIntMatrix,
    pub h_base: Bracket,
    pub h_closure: Bracket,
    /// The cover was verified onto with finite fibers.
    pub verified: bool,
    pub violation: bool,
    pub note: Option<String>,
}

impl fmt::Display for TrialRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trial {} {} base=[{}] cover={} closure=[{}] h(X)={} h(Z)={} {}",
            self.trial,
            self.kind,
            self.base,
            self.cover,
            self.closure,
            self.h_base,
            self.h_closure,
            if self.violation {
                "VIOLATION"
            } else if self.verified {
                "ok"
            } else {
                "unverified"
            }
        )?;
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub seed: u64,
    pub trials: u64,
    pub records: Vec<TrialRecord>,
    /// Trial indices with a certified violation.
    pub violations: Vec<u64>,
    /// Trials whose cover could not be verified and were not compared.
    pub unverified: u64,
    pub kinds: BTreeMap<CoverKind, u64>,
}

pub fn conjecture1_search(
    params: &GeneratorParams,
    seed: u64,
    trials: u64,
    cfg: &EvalConfig,
) -> Result<ConjectureReport, EtaleError> {
    if trials == 0 {
        return Err(EtaleError::NoTrials);
    }
    params.validate()?;
    let mut records = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        records.push(replay_trial(params, seed, trial, cfg)?);
    }
    let violations = records.iter().filter(|r| r.violation).map(|r| r.trial).collect();
    let unverified = records.iter().filter(|r| !r.verified).count() as u64;
    let mut kinds = BTreeMap::new();
    for r in &records {
        *kinds.entry(r.kind).or_insert(0) += 1;
    }
    Ok(ConjectureReport { seed, trials, records, violations, unverified, kinds })
}

/// Rebuild trial `trial` of the run with master seed `seed`.
pub fn replay_trial(params: &GeneratorParams, seed: u64, trial: u64, cfg: &EvalConfig) -> Result<TrialRecord, EtaleError> {
    params.validate()?;
    let mut rng = trial_rng(seed, trial);
    let base = params.shift(&mut rng);
    let kind = match rng.gen_range(0..4) {
        0 => CoverKind::Identity,
        1 => CoverKind::HigherBlock,
        2 => CoverKind::GroupExtension,
        _ => CoverKind::Punctured,
    };
    let h_base = sft_entropy(&base, cfg.tol)?.bracket;
    let mut rec = TrialRecord {
        seed,
        trial,
        kind,
        base: base.transition().clone(),
        cover: String::new(),
        cover_shift: base.transition().clone(),
        removed: Vec::new(),
        closure: base.transition().clone(),
        h_base,
        h_closure: h_base,
        verified: true,
        violation: false,
        note: None,
    };
    match kind {
        CoverKind::Identity => rec.cover = "identity".into(),
        CoverKind::HigherBlock => {
            let k = rng.gen_range(2..=params.max_block.max(2));
            let hb = higher_block(&base, k, &cfg.caps)?;
            rec.cover = format!("{k}-block");
            rec.verified = verify_code(&hb.code, cfg)?;
            rec.cover_shift = hb.sft.transition().clone();
            rec.closure = hb.sft.transition().clone();
            rec.h_closure = sft_entropy(&hb.sft, cfg.tol)?.bracket;
        }
        CoverKind::GroupExtension | CoverKind::Punctured => {
            let order = rng.gen_range(2..=params.max_order.max(2));
            let cocycle = random_cocycle(&base, order, &mut rng);
            let ext = group_extension(&base, order, &cocycle, &cfg.caps)?;
            let text: Vec<String> = cocycle.iter().map(|((a, b), h)| format!("{a}-{b}:{h}")).collect();
            rec.cover = format!("order {order} cocycle {}", text.join(","));
            rec.verified = verify_code(&ext.projection, cfg)?;
            rec.cover_shift = ext.sft.transition().clone();
            rec.closure = ext.sft.transition().clone();
            if kind == CoverKind::Punctured {
                let start = rng.gen_range(0..ext.sft.alphabet_size());
                match find_puncture(&ext.sft, order as usize, start) {
                    Some(cycle) => {
                        if is_isolated(&ext.sft, &cycle) {
                            let keep: Vec<usize> = (0..ext.sft.alphabet_size()).filter(|s| !cycle.contains(s)).collect();
                            rec.closure = ext.sft.transition().submatrix(&keep)?;
                            rec.note = Some("removed orbit is isolated; closure omits it".into());
                        }
                        rec.removed = cycle;
                    }
                    None => {
                        rec.kind = CoverKind::GroupExtension;
                        rec.note = Some("no periodic orbit can be removed without losing onto".into());
                    }
                }
            }
            rec.h_closure = sft_entropy(&Sft::two_sided(rec.closure.clone())?, cfg.tol)?.bracket;
        }
    }
    rec.violation = rec.verified && rec.h_base.certainly_gt(&rec.h_closure);
    Ok(rec)
}

fn verify_code(code: &SlidingBlockCode, cfg: &EvalConfig) -> Result<bool, EtaleError> {
    Ok(is_finite_to_one(code, &cfg.caps)?.is_finite_to_one() && is_onto(code, &cfg.caps)?)
}

/// A simple cycle of the extension, searched from `start` onwards, whose
/// removal leaves the projection onto: over the projected orbit some lift
/// must survive, i.e. the cycle meets each fiber over that orbit in fewer
/// than `order` points.
fn find_puncture(e: &Sft, order: usize, start: usize) -> Option<Vec<usize>> {
    let n = e.alphabet_size();
    for v in (0..n).map(|i| (start + i) % n) {
        let Some(cycle) = shortest_cycle(e.transition(), v) else { continue };
        let word: Vec<usize> = cycle.iter().map(|&s| s / order).collect();
        let len = word.len();
        let period = (1..=len).find(|&p| len % p == 0 && (0..len).all(|i| word[i] == word[(i + p) % len])).unwrap_or(len);
        if len / period < order {
            return Some(cycle);
        }
    }
    None
}

/// Shortest cycle through `v` by breadth-first search, in cycle order.
fn shortest_cycle(a: &NonNegIntMatrix, v: usize) -> Option<Vec<usize>> {
    let n = a.dim();
    let mut parent = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for w in a.successors(v) {
        if w == v {
            return Some(vec![v]);
        }
        if parent[w] == usize::MAX {
            parent[w] = v;
            queue.push_back(w);
        }
    }
    while let Some(u) = queue.pop_front() {
        for w in a.successors(u) {
            if w == v {
                let mut path = vec![u];
                let mut x = u;
                while parent[x] != v {
                    x = parent[x];
                    path.push(x);
                }
                path.push(v);
                path.reverse();
                return Some(path);
            }
            if parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    None
}

/// No other bi-infinite path shadows the orbit: every state on the cycle
/// has exactly one incoming and one outgoing edge.
fn is_isolated(e: &Sft, cycle: &[usize]) -> bool {
    let a = e.transition();
    cycle.iter().all(|&s| a.successors(s).count() == 1 && a.predecessors(s).count() == 1)
}
