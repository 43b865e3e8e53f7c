//! Sliding block codes between shifts of finite type.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Sft, SymbolicCaps, SymbolicError};

/// A shift-commuting map given by a local rule on windows of
/// `memory + 1 + anticipation` consecutive source symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlidingBlockCode {
    source: Sft,
    target: Sft,
    memory: usize,
    anticipation: usize,
    block_map: BTreeMap<Vec<usize>, usize>,
}

impl SlidingBlockCode {
    pub fn new(
        source: Sft,
        target: Sft,
        memory: usize,
        anticipation: usize,
        block_map: BTreeMap<Vec<usize>, usize>,
        caps: &SymbolicCaps,
    ) -> Result<Self, SymbolicError> {
        let window = memory + 1 + anticipation;
        let windows = source.admissible_words(window, caps.max_states)?;
        for w in &windows {
            match block_map.get(w) {
                None => return Err(SymbolicError::BlockMapNotTotal { window: w.clone() }),
                Some(&b) if b >= target.alphabet_size() => {
                    return Err(SymbolicError::BlockMapRange { window: w.clone(), symbol: b })
                }
                Some(_) => {}
            }
        }
        let code = SlidingBlockCode { source, target, memory, anticipation, block_map };
        // Images of (window + 1)-words cover every adjacent target pair.
        let longest = (window + 1).max(caps.check_length.min(window + 2));
        for len in window + 1..=longest {
            for w in code.source.admissible_words(len, caps.max_states.saturating_mul(4))? {
                let img = code.apply(&w).expect("admissible source word");
                if !code.target.is_admissible(&img) {
                    return Err(SymbolicError::ImageNotAdmissible { word: w });
                }
            }
        }
        Ok(code)
    }

    /// 1-block code sending source symbol `i` to `labels[i]`.
    pub fn one_block(
        source: Sft,
        target: Sft,
        labels: &[usize],
        caps: &SymbolicCaps,
    ) -> Result<Self, SymbolicError> {
        let block_map = labels.iter().enumerate().map(|(i, &l)| (vec![i], l)).collect();
        Self::new(source, target, 0, 0, block_map, caps)
    }

    pub fn identity(s: &Sft) -> Self {
        let block_map = (0..s.alphabet_size()).map(|i| (vec![i], i)).collect();
        SlidingBlockCode { source: s.clone(), target: s.clone(), memory: 0, anticipation: 0, block_map }
    }

    pub fn source(&self) -> &Sft {
        &self.source
    }

    pub fn target(&self) -> &Sft {
        &self.target
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn anticipation(&self) -> usize {
        self.anticipation
    }

    pub fn window(&self) -> usize {
        self.memory + 1 + self.anticipation
    }

    pub fn block_map(&self) -> &BTreeMap<Vec<usize>, usize> {
        &self.block_map
    }

    /// Image of an admissible source word of length `L ≥ window`: a word of
    /// length `L − memory − anticipation`.
    pub fn apply(&self, word: &[usize]) -> Option<Vec<usize>> {
        if word.len() < self.window() || !self.source.is_admissible(word) {
            return None;
        }
        word.windows(self.window()).map(|w| self.block_map.get(w).copied()).collect()
    }

    /// The 1-block recoding on the window-block presentation of the source:
    /// states are admissible windows, labels are the block map values.
    fn recoded(&self, caps: &SymbolicCaps) -> Result<Recoded, SymbolicError> {
        let w = self.window();
        let states = self.source.admissible_words(w, caps.max_states)?;
        if states.len() > caps.max_states {
            return Err(SymbolicError::StateCap { count: states.len(), cap: caps.max_states });
        }
        let mut by_prefix: HashMap<&[usize], Vec<usize>> = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            by_prefix.entry(&s[..w - 1]).or_default().push(i);
        }
        let succ: Vec<Vec<usize>> = states
            .iter()
            .map(|s| {
                if w == 1 {
                    self.source.transition().successors(s[0]).collect()
                } else {
                    by_prefix.get(&s[1..]).cloned().unwrap_or_default()
                }
            })
            .collect();
        let labels = states.iter().map(|s| self.block_map[s]).collect();
        Ok(Recoded { states, succ, labels })
    }
}

struct Recoded {
    states: Vec<Vec<usize>>,
    succ: Vec<Vec<usize>>,
    labels: Vec<usize>,
}

impl Recoded {
    /// Source word spelled by a path of window states.
    fn spell(&self, path: &[usize]) -> Vec<usize> {
        let mut word = self.states[path[0]].clone();
        for &p in &path[1..] {
            word.push(*self.states[p].last().expect("nonempty window"));
        }
        word
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberVerdict {
    FiniteToOne,
    InfiniteFibers,
}

/// Two distinct source words with the same endpoints windows and identical images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiamondWitness {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub image: Vec<usize>,
    /// Window length of the recoding the diamond was found in.
    pub window: usize,
    /// Memory of the original code; the images are shifted by this much.
    pub memory: usize,
}

impl DiamondWitness {
    /// Re-check the witness against the code.
    pub fn replay(&self, code: &SlidingBlockCode) -> bool {
        let w = self.window;
        self.first != self.second
            && self.first.len() == self.second.len()
            && self.first.len() > w
            && self.first[..w] == self.second[..w]
            && self.first[self.first.len() - w..] == self.second[self.second.len() - w..]
            && code.apply(&self.first).as_ref() == Some(&self.image)
            && code.apply(&self.second).as_ref() == Some(&self.image)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteToOneVerdict {
    pub verdict: FiberVerdict,
    pub witness: Option<DiamondWitness>,
}

impl FiniteToOneVerdict {
    pub fn is_finite_to_one(&self) -> bool {
        self.verdict == FiberVerdict::FiniteToOne
    }
}

/// Decide finite-to-one-ness by searching for a diamond in the labeled
/// product graph of the 1-block recoding.
///
/// A diamond is a pair of distinct state paths with equal labels that start at
/// the same state and end at the same state.
pub fn is_finite_to_one(
    code: &SlidingBlockCode,
    caps: &SymbolicCaps,
) -> Result<FiniteToOneVerdict, SymbolicError> {
    let rec = code.recoded(caps)?;
    let n = rec.states.len();
    let mut visited: HashMap<(usize, usize), (usize, usize)> = HashMap::new();

    for start in 0..n {
        let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
        let origin = (start, start);
        // Split immediately: two different successors with the same label.
        for (ia, &a) in rec.succ[start].iter().enumerate() {
            for &b in &rec.succ[start][ia + 1..] {
                let key = if a < b { (a, b) } else { (b, a) };
                if rec.labels[a] == rec.labels[b] && !visited.contains_key(&key) {
                    visited.insert(key, origin);
                    queue.push_back(key);
                }
            }
        }
        while let Some((p, q)) = queue.pop_front() {
            for &a in &rec.succ[p] {
                for &b in &rec.succ[q] {
                    if rec.labels[a] != rec.labels[b] {
                        continue;
                    }
                    if a == b {
                        let witness = build_witness(&rec, code, &visited, origin, (p, q), a);
                        return Ok(FiniteToOneVerdict {
                            verdict: FiberVerdict::InfiniteFibers,
                            witness: Some(witness),
                        });
                    }
                    // Pairs are unordered; store with the smaller state first.
                    let key = if a < b { (a, b) } else { (b, a) };
                    if !visited.contains_key(&key) {
                        visited.insert(key, (p, q));
                        queue.push_back(key);
                    }
                }
            }
        }
    }
    Ok(FiniteToOneVerdict { verdict: FiberVerdict::FiniteToOne, witness: None })
}

fn build_witness(
    rec: &Recoded,
    code: &SlidingBlockCode,
    parents: &HashMap<(usize, usize), (usize, usize)>,
    origin: (usize, usize),
    last: (usize, usize),
    end: usize,
) -> DiamondWitness {
    // Walk back through unordered pairs, re-orienting each step so that the
    // first coordinate always follows an edge of the first path.
    let mut chain = vec![last];
    let mut cur = last;
    while let Some(&prev) = parents.get(&cur) {
        if prev == origin {
            break;
        }
        chain.push(prev);
        cur = prev;
    }
    chain.reverse();
    let start = origin.0;
    let mut first = vec![start];
    let mut second = vec![start];
    for &(p, q) in &chain {
        let a = *first.last().expect("nonempty");
        let b = *second.last().expect("nonempty");
        let straight = rec.succ[a].contains(&p) && rec.succ[b].contains(&q);
        if straight {
            first.push(p);
            second.push(q);
        } else {
            first.push(q);
            second.push(p);
        }
    }
    first.push(end);
    second.push(end);
    let first_word = rec.spell(&first);
    let second_word = rec.spell(&second);
    let image = code.apply(&first_word).expect("admissible path");
    DiamondWitness { first: first_word, second: second_word, image, window: code.window(), memory: code.memory }
}

/// Smallest number of distinct source windows seen at one coordinate among
/// the preimages of a target word, over all admissible target words of
/// length up to `max_len`. For a finite-to-one onto code out of an
/// irreducible shift this is the degree (the fiber size over doubly
/// transitive points) as soon as a magic word of that length exists.
/// `None` when no target word has a preimage.
pub fn code_degree(code: &SlidingBlockCode, max_len: usize, caps: &SymbolicCaps) -> Result<Option<usize>, SymbolicError> {
    let rec = code.recoded(caps)?;
    let n = rec.states.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, succ) in rec.succ.iter().enumerate() {
        for &t in succ {
            pred[t].push(s);
        }
    }
    let mut best: Option<usize> = None;
    for len in 1..=max_len.max(1) {
        let words = code.target().admissible_words(len, caps.max_states)?;
        for w in &words {
            let mut fwd: Vec<Vec<bool>> = Vec::with_capacity(len);
            fwd.push((0..n).map(|s| rec.labels[s] == w[0]).collect());
            for i in 1..len {
                let mut next = vec![false; n];
                for s in (0..n).filter(|&s| fwd[i - 1][s]) {
                    for &t in &rec.succ[s] {
                        next[t] |= rec.labels[t] == w[i];
                    }
                }
                fwd.push(next);
            }
            let mut back: Vec<bool> = (0..n).map(|s| fwd[len - 1][s]).collect();
            for i in (0..len).rev() {
                let alive = back.iter().filter(|&&b| b).count();
                if alive > 0 {
                    best = Some(best.map_or(alive, |b| b.min(alive)));
                }
                if i == 0 {
                    break;
                }
                let mut prev = vec![false; n];
                for t in (0..n).filter(|&t| back[t]) {
                    for &s in &pred[t] {
                        prev[s] |= fwd[i - 1][s];
                    }
                }
                back = prev;
            }
        }
    }
    Ok(best)
}

/// Decide whether the image of the code is the whole target, by subset
/// construction over target words. Both shifts are assumed essential.
pub fn is_onto(code: &SlidingBlockCode, caps: &SymbolicCaps) -> Result<bool, SymbolicError> {
    let rec = code.recoded(caps)?;
    let target = code.target();
    let m = target.alphabet_size();
    let mut seen: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    let mut queue: VecDeque<(usize, Vec<usize>)> = VecDeque::new();
    for t in target.essential_symbols() {
        let set: Vec<usize> = (0..rec.states.len()).filter(|&s| rec.labels[s] == t).collect();
        if set.is_empty() {
            return Ok(false);
        }
        if seen.insert((t, set.clone())) {
            queue.push_back((t, set));
        }
    }
    let budget = caps.max_states.saturating_mul(64);
    while let Some((t, set)) = queue.pop_front() {
        for u in 0..m {
            if !target.allows(t, u) {
                continue;
            }
            let mut next: Vec<usize> = set
                .iter()
                .flat_map(|&s| rec.succ[s].iter().copied())
                .filter(|&s2| rec.labels[s2] == u)
                .collect();
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                return Ok(false);
            }
            if seen.insert((u, next.clone())) {
                if seen.len() > budget {
                    return Err(SymbolicError::StateCap { count: seen.len(), cap: budget });
                }
                queue.push_back((u, next));
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::super::{group_extension, higher_block, Cocycle};
    use super::*;

    fn caps() -> SymbolicCaps {
        SymbolicCaps::default()
    }

    #[test]
    fn higher_block_conjugacy_is_finite_to_one() {
        for k in 1..=4 {
            let hb = higher_block(&Sft::golden_mean(), k, &caps()).unwrap();
            let v = is_finite_to_one(&hb.code, &caps()).unwrap();
            assert!(v.is_finite_to_one() && v.witness.is_none());
            assert!(is_onto(&hb.code, &caps()).unwrap());
        }
    }

    #[test]
    fn group_extension_projection_is_finite_to_one() {
        let f = Sft::full_shift(2);
        let parity: Cocycle = [((0, 0), 0), ((0, 1), 0), ((1, 0), 1), ((1, 1), 1)].into_iter().collect();
        let ext = group_extension(&f, 2, &parity, &caps()).unwrap();
        assert!(is_finite_to_one(&ext.projection, &caps()).unwrap().is_finite_to_one());
        assert!(is_onto(&ext.projection, &caps()).unwrap());
        assert_eq!(code_degree(&ext.projection, 4, &caps()).unwrap(), Some(2));
    }

    #[test]
    fn degree_of_conjugacies_is_one() {
        for k in 1..=3 {
            let hb = higher_block(&Sft::golden_mean(), k, &caps()).unwrap();
            assert_eq!(code_degree(&hb.code, 4, &caps()).unwrap(), Some(1), "k={k}");
        }
    }

    #[test]
    fn collapsing_code_has_diamond() {
        let src = Sft::full_shift(2);
        let tgt = Sft::full_shift(1);
        let code = SlidingBlockCode::one_block(src, tgt, &[0, 0], &caps()).unwrap();
        let v = is_finite_to_one(&code, &caps()).unwrap();
        assert_eq!(v.verdict, FiberVerdict::InfiniteFibers);
        let w = v.witness.expect("diamond witness");
        assert!(w.replay(&code), "{w:?}");
        assert!(is_onto(&code, &caps()).unwrap());
    }

    #[test]
    fn diamond_in_window_recoding() {
        // 2-block code on the full 2-shift: x ↦ x_0 + x_1 mod 2 is 2-to-1, no diamond.
        let src = Sft::full_shift(2);
        let map: BTreeMap<Vec<usize>, usize> =
            [(vec![0, 0], 0), (vec![0, 1], 1), (vec![1, 0], 1), (vec![1, 1], 0)].into_iter().collect();
        let code = SlidingBlockCode::new(src.clone(), src.clone(), 0, 1, map, &caps()).unwrap();
        assert!(is_finite_to_one(&code, &caps()).unwrap().is_finite_to_one());
        // x ↦ x_0 · x_1 collapses: 0?0 patterns are invisible.
        let map: BTreeMap<Vec<usize>, usize> =
            [(vec![0, 0], 0), (vec![0, 1], 0), (vec![1, 0], 0), (vec![1, 1], 1)].into_iter().collect();
        let code = SlidingBlockCode::new(src.clone(), src, 1, 0, map, &caps()).unwrap();
        let v = is_finite_to_one(&code, &caps()).unwrap();
        assert_eq!(v.verdict, FiberVerdict::InfiniteFibers);
        assert!(v.witness.unwrap().replay(&code));
    }

    #[test]
    fn non_onto_code() {
        // Full 2-shift mapped into itself by the constant 0 map misses 1.
        let src = Sft::full_shift(2);
        let code = SlidingBlockCode::one_block(src.clone(), src, &[0, 0], &caps()).unwrap();
        assert!(!is_onto(&code, &caps()).unwrap());
    }

    #[test]
    fn validation_errors() {
        let g = Sft::golden_mean();
        let f = Sft::full_shift(2);
        let missing: BTreeMap<Vec<usize>, usize> = [(vec![0], 0)].into_iter().collect();
        assert!(matches!(
            SlidingBlockCode::new(f.clone(), g.clone(), 0, 0, missing, &caps()),
            Err(SymbolicError::BlockMapNotTotal { .. })
        ));
        // identity from the full shift into the golden mean shift hits "11".
        assert!(matches!(
            SlidingBlockCode::one_block(f.clone(), g.clone(), &[0, 1], &caps()),
            Err(SymbolicError::ImageNotAdmissible { .. })
        ));
        assert!(matches!(
            SlidingBlockCode::one_block(f, g, &[0, 7], &caps()),
            Err(SymbolicError::BlockMapRange { .. })
        ));
    }

    #[test]
    fn apply_shapes() {
        let code = SlidingBlockCode::identity(&Sft::golden_mean());
        assert_eq!(code.apply(&[0, 1, 0]), Some(vec![0, 1, 0]));
        assert_eq!(code.apply(&[1, 1]), None);
        assert_eq!(code.apply(&[]), None);
    }
}
