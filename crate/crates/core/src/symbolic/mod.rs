//! Subshifts of finite type, sliding block codes, higher-block presentations,
//! finite group extensions and finite-to-one (diamond) detection.

mod code;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bracket::Bracket;
use crate::spectral::{
    path_count, perron_root_with, scc_decompose, NonNegIntMatrix, PerronConfig, SpectralCaps,
    SpectralError,
};

pub use code::{code_degree, is_finite_to_one, is_onto, DiamondWitness, FiberVerdict, FiniteToOneVerdict, SlidingBlockCode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymbolicError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("transition matrix must have 0/1 entries")]
    NotZeroOne,
    #[error("shift is not essential (has symbols that cannot be extended); trim it first")]
    NotEssential,
    #[error("shift is empty after trimming")]
    Empty,
    #[error("alphabet size {size} exceeds cap {cap}")]
    AlphabetCap { size: usize, cap: usize },
    #[error("state count {count} exceeds cap {cap}")]
    StateCap { count: usize, cap: usize },
    #[error("block map is missing admissible window {window:?}")]
    BlockMapNotTotal { window: Vec<usize> },
    #[error("block map sends {window:?} to symbol {symbol}, outside the target alphabet")]
    BlockMapRange { window: Vec<usize>, symbol: usize },
    #[error("image of admissible word {word:?} is not admissible in the target")]
    ImageNotAdmissible { word: Vec<usize> },
    #[error("cocycle is missing admissible edge {from}->{to}")]
    CocycleNotTotal { from: usize, to: usize },
    #[error("group order must be at least 1")]
    GroupOrder,
    #[error("symbol {0} is outside the alphabet")]
    SymbolRange(usize),
    #[error("empty symbol subset")]
    EmptySubset,
    #[error("higher block length must be at least 1")]
    BlockLength,
}

/// Size limits for symbolic constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolicCaps {
    pub max_alphabet: usize,
    pub max_states: usize,
    /// Longest source word length used when validating a block code's image.
    pub check_length: usize,
}

impl Default for SymbolicCaps {
    fn default() -> Self {
        SymbolicCaps { max_alphabet: 64, max_states: 4096, check_length: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    OneSided,
    TwoSided,
}

/// A vertex shift given by a 0/1 transition matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sft {
    transition: NonNegIntMatrix,
    sided: Sidedness,
}

impl Sft {
    pub fn new(transition: NonNegIntMatrix, sided: Sidedness) -> Result<Self, SymbolicError> {
        if !transition.is_zero_one() {
            return Err(SymbolicError::NotZeroOne);
        }
        Ok(Sft { transition, sided })
    }

    pub fn two_sided(transition: NonNegIntMatrix) -> Result<Self, SymbolicError> {
        Self::new(transition, Sidedness::TwoSided)
    }

    pub fn full_shift(n: usize) -> Self {
        Sft { transition: NonNegIntMatrix::full(n), sided: Sidedness::TwoSided }
    }

    pub fn golden_mean() -> Self {
        Sft {
            transition: NonNegIntMatrix::from_rows(&[[1, 1], [1, 0]]).expect("2x2"),
            sided: Sidedness::TwoSided,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.transition.dim()
    }

    pub fn transition(&self) -> &NonNegIntMatrix {
        &self.transition
    }

    pub fn sided(&self) -> Sidedness {
        self.sided
    }

    pub fn allows(&self, a: usize, b: usize) -> bool {
        self.transition.has_edge(a, b)
    }

    pub fn is_admissible(&self, word: &[usize]) -> bool {
        word.iter().all(|&s| s < self.alphabet_size())
            && word.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// Symbols surviving iterated deletion of dead ends (zero out-degree, and for
    /// two-sided shifts also zero in-degree), ascending.
    pub fn essential_symbols(&self) -> Vec<usize> {
        let n = self.alphabet_size();
        let mut alive = vec![true; n];
        loop {
            let mut changed = false;
            for i in 0..n {
                if !alive[i] {
                    continue;
                }
                let out = (0..n).any(|j| alive[j] && self.allows(i, j));
                let inn = self.sided == Sidedness::OneSided
                    || (0..n).any(|j| alive[j] && self.allows(j, i));
                if !out || !inn {
                    alive[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (0..n).filter(|&i| alive[i]).collect()
    }

    pub fn is_essential(&self) -> bool {
        self.essential_symbols().len() == self.alphabet_size()
    }

    /// The essential presentation, or `None` when the shift is empty.
    pub fn trim(&self) -> Option<Sft> {
        self.restrict(&self.essential_symbols())
    }

    /// Restriction of the transition matrix to `symbols` (not trimmed).
    fn restrict(&self, symbols: &[usize]) -> Option<Sft> {
        if symbols.is_empty() {
            return None;
        }
        let sub = self.transition.submatrix(symbols).ok()?;
        Some(Sft { transition: sub, sided: self.sided })
    }

    /// All admissible words of length `len` in lexicographic order.
    pub fn admissible_words(&self, len: usize, cap: usize) -> Result<Vec<Vec<usize>>, SymbolicError> {
        let n = self.alphabet_size();
        let mut words: Vec<Vec<usize>> = if len == 0 { vec![vec![]] } else { (0..n).map(|s| vec![s]).collect() };
        for _ in 1..len {
            let mut next = Vec::new();
            for w in &words {
                let last = *w.last().expect("nonempty word");
                for s in self.transition.successors(last) {
                    let mut v = w.clone();
                    v.push(s);
                    next.push(v);
                    if next.len() > cap {
                        return Err(SymbolicError::StateCap { count: next.len(), cap });
                    }
                }
            }
            words = next;
        }
        Ok(words)
    }

    /// Entropy of each cyclic strongly connected component, in condensation order.
    pub fn component_entropies(&self, tol: f64) -> Result<Vec<(Vec<usize>, Bracket)>, SymbolicError> {
        let cond = scc_decompose(&self.transition);
        let mut out = Vec::new();
        for (c, comp) in cond.components.iter().enumerate() {
            if !cond.is_cyclic(&self.transition, c) {
                continue;
            }
            let sub = self.transition.submatrix(comp)?;
            let p = perron_root_with(&sub, PerronConfig { tol, ..PerronConfig::default() }, &SpectralCaps::default())?;
            out.push((comp.clone(), log_perron(&p.bracket())));
        }
        Ok(out)
    }

    pub fn is_irreducible(&self) -> bool {
        let cond = scc_decompose(&self.transition);
        cond.components.len() == 1 && cond.is_cyclic(&self.transition, 0)
    }
}

/// `ln ρ` for the Perron root of a nonempty essential shift, where `ρ ≥ 1`.
fn log_perron(rho: &Bracket) -> Bracket {
    rho.clamp_below(1.0).ln().clamp_below(0.0)
}

/// Certified entropy of a shift of finite type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SftEntropy {
    pub bracket: Bracket,
    /// The shift is empty after trimming; entropy is defined as 0.
    pub empty: bool,
}

pub fn sft_entropy(s: &Sft, tol: f64) -> Result<SftEntropy, SymbolicError> {
    let Some(trimmed) = s.trim() else {
        return Ok(SftEntropy { bracket: Bracket::zero(), empty: true });
    };
    let cfg = PerronConfig { tol: tol / 4.0, ..PerronConfig::default() };
    let p = perron_root_with(trimmed.transition(), cfg, &SpectralCaps::default())?;
    Ok(SftEntropy { bracket: log_perron(&p.bracket()), empty: false })
}

/// Number of admissible words of length `n ≥ 1`.
pub fn word_count(s: &Sft, n: u32) -> BigUint {
    assert!(n >= 1, "word length must be positive");
    path_count(s.transition(), n - 1)
}

/// Restriction to a symbol subset, trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSft {
    /// Original symbols kept after trimming, ascending.
    pub kept: Vec<usize>,
    pub sft: Option<Sft>,
}

pub fn sub_sft(s: &Sft, symbols: &[usize]) -> Result<SubSft, SymbolicError> {
    if symbols.is_empty() {
        return Err(SymbolicError::EmptySubset);
    }
    let mut sorted: Vec<usize> = symbols.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.iter().find(|&&x| x >= s.alphabet_size()) {
        return Err(SymbolicError::SymbolRange(bad));
    }
    let restricted = s.restrict(&sorted).expect("nonempty subset");
    let ess = restricted.essential_symbols();
    let kept: Vec<usize> = ess.iter().map(|&i| sorted[i]).collect();
    let sft = restricted.restrict(&ess);
    Ok(SubSft { kept, sft })
}

fn ensure_essential(s: &Sft, caps: &SymbolicCaps) -> Result<(), SymbolicError> {
    if s.alphabet_size() > caps.max_alphabet {
        return Err(SymbolicError::AlphabetCap { size: s.alphabet_size(), cap: caps.max_alphabet });
    }
    if !s.is_essential() {
        return Err(SymbolicError::NotEssential);
    }
    Ok(())
}

/// The `k`-block presentation together with the 1-block conjugacy onto `s`
/// (each `k`-word maps to its first symbol).
#[derive(Debug, Clone)]
pub struct HigherBlock {
    pub sft: Sft,
    /// State `i` of `sft` is the admissible word `words[i]` of `s`.
    pub words: Vec<Vec<usize>>,
    pub code: SlidingBlockCode,
}

pub fn higher_block(s: &Sft, k: usize, caps: &SymbolicCaps) -> Result<HigherBlock, SymbolicError> {
    if k == 0 {
        return Err(SymbolicError::BlockLength);
    }
    ensure_essential(s, caps)?;
    if k == 1 {
        let words = (0..s.alphabet_size()).map(|a| vec![a]).collect();
        return Ok(HigherBlock { sft: s.clone(), words, code: SlidingBlockCode::identity(s) });
    }
    let words = s.admissible_words(k, caps.max_states)?;
    let m = words.len();
    let mut by_prefix: HashMap<&[usize], Vec<usize>> = HashMap::new();
    for (i, w) in words.iter().enumerate() {
        by_prefix.entry(&w[..k - 1]).or_default().push(i);
    }
    let mut t = NonNegIntMatrix::zeros(m);
    for (i, w) in words.iter().enumerate() {
        if let Some(nexts) = by_prefix.get(&w[1..]) {
            for &j in nexts {
                t.set(i, j, BigUint::one());
            }
        }
    }
    let sft = Sft { transition: t, sided: s.sided };
    let labels: Vec<usize> = words.iter().map(|w| w[0]).collect();
    let code = SlidingBlockCode::one_block(sft.clone(), s.clone(), &labels, caps)?;
    Ok(HigherBlock { sft, words, code })
}

/// Edge cocycle with values in ℤ/gℤ.
pub type Cocycle = BTreeMap<(usize, usize), u64>;

/// A skew product over `base` with fiber ℤ/gℤ and its projection code.
#[derive(Debug, Clone)]
pub struct GroupExtension {
    /// State `s·g + h` is the pair `(s, h)`.
    pub sft: Sft,
    pub order: u64,
    pub projection: SlidingBlockCode,
}

impl GroupExtension {
    pub fn state(&self, symbol: usize, element: u64) -> usize {
        symbol * self.order as usize + element as usize
    }
}

/// Extension on pairs `(s, h)` with transitions `(s,h) → (t, h + c(s,t))`.
pub fn group_extension(
    s: &Sft,
    order: u64,
    cocycle: &Cocycle,
    caps: &SymbolicCaps,
) -> Result<GroupExtension, SymbolicError> {
    if order == 0 {
        return Err(SymbolicError::GroupOrder);
    }
    ensure_essential(s, caps)?;
    let n = s.alphabet_size();
    for a in 0..n {
        for b in s.transition.successors(a) {
            if !cocycle.contains_key(&(a, b)) {
                return Err(SymbolicError::CocycleNotTotal { from: a, to: b });
            }
        }
    }
    if order == 1 {
        return Ok(GroupExtension { sft: s.clone(), order, projection: SlidingBlockCode::identity(s) });
    }
    let g = order as usize;
    let m = n * g;
    if m > caps.max_states {
        return Err(SymbolicError::StateCap { count: m, cap: caps.max_states });
    }
    let mut t = NonNegIntMatrix::zeros(m);
    for a in 0..n {
        for b in s.transition.successors(a) {
            let c = (cocycle[&(a, b)] % order) as usize;
            for h in 0..g {
                t.set(a * g + h, b * g + (h + c) % g, BigUint::one());
            }
        }
    }
    let sft = Sft { transition: t, sided: s.sided };
    let labels: Vec<usize> = (0..m).map(|i| i / g).collect();
    let projection = SlidingBlockCode::one_block(sft.clone(), s.clone(), &labels, caps)?;
    Ok(GroupExtension { sft, order, projection })
}

/// Uniformly random cocycle on the admissible edges of `s`.
pub fn random_cocycle<R: Rng>(s: &Sft, order: u64, rng: &mut R) -> Cocycle {
    let mut c = Cocycle::new();
    for a in 0..s.alphabet_size() {
        for b in s.transition.successors(a) {
            c.insert((a, b), rng.gen_range(0..order));
        }
    }
    c
}

/// Random irreducible two-sided shift on `n` symbols: a random Hamiltonian
/// cycle plus independent extra edges with probability `density`.
pub fn random_irreducible_sft<R: Rng>(n: usize, density: f64, rng: &mut R) -> Sft {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let mut t = NonNegIntMatrix::zeros(n);
    for i in 0..n {
        t.set(perm[i], perm[(i + 1) % n], BigUint::one());
    }
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(density) {
                t.set(i, j, BigUint::one());
            }
        }
    }
    Sft { transition: t, sided: Sidedness::TwoSided }
}
