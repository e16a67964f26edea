//! Sliding-block-code factors of β-shifts: image languages, the induced
//! decomposition on the factor, entropy lemmas for it, and pair automata for
//! points with identical images.
//!
//! The factor `Y` carries the symbolic metric on the output alphabet. A
//! `k`-block code maps a source word of length `n + k - 1` to an output word
//! of length `n`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::beta::BetaSystem;
use crate::decomposition::{min_gluing_time, DecompositionScheme, GluingTime, SpecParams, Split};
use crate::error::{Error, Result};
use crate::linalg::{spectral_radius_f64, strongly_connected_components, submatrix, Matrix};
use crate::mme::{empirical_mme, max_cylinder_difference};
use crate::presentation::Presentation;
use crate::symbolic::{upper_entropy, EntropyEstimate, ScaleIndex, ShiftSpace};
use crate::word::{Symbol, Word};

/// Largest number of subset states built for an image presentation.
pub const SUBSET_CAP: usize = 100_000;

/// A sliding block code with window `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCode {
    window: usize,
    input_size: usize,
    rule: BTreeMap<Word, Symbol>,
    labels: Vec<String>,
}

impl BlockCode {
    /// `rule` maps `k`-blocks to output symbols `0..labels.len()`.
    pub fn new(input_size: usize, rule: BTreeMap<Word, Symbol>, labels: Vec<String>) -> Result<Self> {
        let window = match rule.keys().next() {
            Some(b) => b.len(),
            None => return Err(Error::InvalidInput("block code has no rules".into())),
        };
        if window == 0 {
            return Err(Error::InvalidInput("window must be at least 1".into()));
        }
        if let Some(b) = rule.keys().find(|b| b.len() != window) {
            return Err(Error::InvalidInput(format!("block {b} has length {} instead of {window}", b.len())));
        }
        if let Some(b) = rule.keys().find(|b| b.symbols().iter().any(|&a| a as usize >= input_size)) {
            return Err(Error::InvalidInput(format!("block {b} uses symbols outside the input alphabet")));
        }
        if let Some((_, &s)) = rule.iter().find(|(_, &s)| s as usize >= labels.len()) {
            return Err(Error::InvalidInput(format!("output symbol {s} has no label")));
        }
        Ok(BlockCode { window, input_size, rule, labels })
    }

    /// The 1-block identity on `k` symbols.
    pub fn identity(k: usize) -> Self {
        Self::one_block(&(0..k as Symbol).collect::<Vec<_>>())
    }

    /// The 1-block code `a ↦ map[a]`, labelled by digits.
    pub fn one_block(map: &[Symbol]) -> Self {
        let out = map.iter().map(|&s| s as usize + 1).max().unwrap_or(1);
        let rule = map.iter().enumerate().map(|(a, &s)| (Word::new(vec![a as Symbol]), s)).collect();
        let labels = (0..out).map(|s| s.to_string()).collect();
        Self::new(map.len(), rule, labels).expect("valid 1-block code")
    }

    /// Every symbol of a `k`-letter alphabet to the single output `a`.
    pub fn merge_all(k: usize) -> Self {
        let rule = (0..k as Symbol).map(|a| (Word::new(vec![a]), 0)).collect();
        Self::new(k, rule, vec!["a".into()]).expect("valid merge code")
    }

    /// `x_i + x_{i+1} mod 2` on the binary alphabet.
    pub fn xor() -> Self {
        let rule = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .into_iter()
            .map(|(a, b)| (Word::new(vec![a, b]), a ^ b))
            .collect();
        Self::new(2, rule, vec!["0".into(), "1".into()]).expect("valid xor code")
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rules(&self) -> &BTreeMap<Word, Symbol> {
        &self.rule
    }

    pub fn image_of_block(&self, block: &[Symbol]) -> Option<Symbol> {
        self.rule.get(&Word::new(block.to_vec())).copied()
    }

    /// Errors unless every admissible `k`-block of `shift` has a rule.
    pub fn validate(&self, shift: &dyn ShiftSpace) -> Result<()> {
        if shift.alphabet_size() > self.input_size {
            return Err(Error::InvalidInput(format!(
                "code alphabet {} is smaller than the shift alphabet {}",
                self.input_size,
                shift.alphabet_size()
            )));
        }
        for b in shift.presentation().enumerate(self.window) {
            if !self.rule.contains_key(&b) {
                return Err(Error::InvalidInput(format!("no rule for admissible block {b}")));
            }
        }
        Ok(())
    }

    /// Output word in the code's labels.
    pub fn render(&self, y: &Word) -> String {
        y.symbols().iter().map(|&s| self.labels[s as usize].as_str()).collect()
    }
}

/// Sliding-block image of `v`; its length is `|v| - k + 1`.
pub fn apply_code(code: &BlockCode, v: &Word) -> Result<Word> {
    let k = code.window;
    if v.len() < k {
        return Err(Error::InvalidInput(format!("word of length {} is shorter than the window {k}", v.len())));
    }
    v.symbols()
        .windows(k)
        .map(|b| {
            code.image_of_block(b)
                .ok_or_else(|| Error::InvalidInput(format!("no rule for block {}", Word::new(b.to_vec()))))
        })
        .collect::<Result<Vec<_>>>()
        .map(Word::new)
}

/// `{π(v) : v ∈ L_{n+k-1}}`, sorted and deduplicated.
pub fn factor_language(shift: &dyn ShiftSpace, code: &BlockCode, n: usize) -> Result<Vec<Word>> {
    let words = shift.enumerate(n + code.window - 1)?;
    if n == 0 {
        return Ok(if words.is_empty() { Vec::new() } else { vec![Word::empty()] });
    }
    let set: BTreeSet<Word> = words.iter().map(|v| apply_code(code, v)).collect::<Result<_>>()?;
    Ok(set.into_iter().collect())
}

/// The image shift `Y = π(X)` with a deterministic presentation from the
/// subset construction.
///
/// The underlying nondeterministic automaton has states `(source state, last
/// k-1 source symbols)`; it starts in every state reached by an admissible
/// `(k-1)`-word and emits `π` of each full window.
#[derive(Clone, Debug)]
pub struct FactorShift {
    source: BetaSystem,
    code: BlockCode,
    dfa: Presentation,
    entropy: f64,
}

impl FactorShift {
    pub fn new(source: &BetaSystem, code: &BlockCode) -> Result<Self> {
        if code.window > source.enumeration_cap() {
            return Err(Error::EnumerationCap { requested: code.window, cap: source.enumeration_cap() });
        }
        code.validate(source)?;
        let dfa = image_presentation(source.automaton(), code)?;
        let entropy = spectral_radius_f64(&dfa.adjacency()).ln().max(0.0);
        Ok(FactorShift { source: source.clone(), code: code.clone(), dfa, entropy })
    }

    pub fn source(&self) -> &BetaSystem {
        &self.source
    }

    pub fn code(&self) -> &BlockCode {
        &self.code
    }
}

impl ShiftSpace for FactorShift {
    fn name(&self) -> String {
        format!("factor of {} by a {}-block code", self.source.name(), self.code.window)
    }

    fn presentation(&self) -> &Presentation {
        &self.dfa
    }

    fn horizon(&self) -> Option<usize> {
        self.source.horizon().map(|h| h + 1 - self.code.window)
    }

    fn enumeration_cap(&self) -> usize {
        self.source.enumeration_cap()
    }

    fn entropy(&self) -> f64 {
        self.entropy
    }
}

type NfaState = (usize, Word);

fn image_presentation(src: &Presentation, code: &BlockCode) -> Result<Presentation> {
    let k = code.window;
    let start: BTreeSet<NfaState> = src
        .enumerate(k - 1)
        .into_iter()
        .filter_map(|u| src.run(&u).map(|s| (s, u)))
        .collect();
    let out = code.output_size();
    let mut index: HashMap<BTreeSet<NfaState>, usize> = HashMap::new();
    let mut subsets = vec![start.clone()];
    index.insert(start, 0);
    let mut next = Vec::new();
    let mut i = 0;
    while i < subsets.len() {
        let mut by_output: Vec<BTreeSet<NfaState>> = vec![BTreeSet::new(); out];
        for (s, u) in &subsets[i] {
            for a in 0..src.alphabet_size() as Symbol {
                let Some(t) = src.step(*s, a) else { continue };
                let mut block = u.clone();
                block.push(a);
                let Some(b) = code.image_of_block(block.symbols()) else { continue };
                by_output[b as usize].insert((t, block.suffix_from(1)));
            }
        }
        let mut row = vec![None; out];
        for (b, set) in by_output.into_iter().enumerate() {
            if set.is_empty() {
                continue;
            }
            let id = match index.get(&set) {
                Some(&id) => id,
                None => {
                    if subsets.len() >= SUBSET_CAP {
                        return Err(Error::InvalidInput(format!("image presentation exceeds {SUBSET_CAP} states")));
                    }
                    index.insert(set.clone(), subsets.len());
                    subsets.push(set);
                    subsets.len() - 1
                }
            };
            row[b] = Some(id);
        }
        next.push(row);
        i += 1;
    }
    Presentation::new(out, 0, next)
}

/// The decomposition of `Y` induced by the β-shift decomposition: `P = ∅`,
/// `(y, n) ∈ G` when some preimage `x` has `x_1 … x_n ∈ G̃`, and
/// `(y, n) ∈ S` when some preimage has `x_1 … x_n` a prefix of `w`. A word
/// `y` of length `n` stands for the orbit segments whose first `n` symbols
/// it gives; its preimages are the admissible words `v` of length
/// `n + k - 1` with `π(v) = y`, of which only `v_1 … v_n` is classified.
///
/// `split` uses the preimage with the shortest suffix, so that the core is
/// as long as possible.
#[derive(Clone, Debug)]
pub struct InducedDecomposition {
    factor: FactorShift,
}

impl InducedDecomposition {
    pub fn new(factor: &FactorShift) -> Self {
        InducedDecomposition { factor: factor.clone() }
    }

    pub fn factor(&self) -> &FactorShift {
        &self.factor
    }

    /// Suffix lengths `s(v_1 … v_n)` over all preimages `v` of `y`, ascending.
    pub fn preimage_suffixes(&self, y: &Word) -> Result<Vec<usize>> {
        let sys = &self.factor.source;
        let code = &self.factor.code;
        let (n, k) = (y.len(), code.window);
        self.factor.check_horizon(n)?;
        let a = sys.automaton();
        let mut out = BTreeSet::new();
        // depth-first over source words constrained by y
        let mut stack: Vec<(usize, Word)> = vec![(a.start(), Word::empty())];
        while let Some((state, v)) = stack.pop() {
            if v.len() == n + k - 1 {
                let s = sys.match_length(&v.prefix(n))?.expect("admissible");
                out.insert(s);
                continue;
            }
            for b in 0..a.alphabet_size() as Symbol {
                let Some(t) = a.step(state, b) else { continue };
                let mut u = v.clone();
                u.push(b);
                if u.len() >= k {
                    let i = u.len() - k;
                    if code.image_of_block(&u.symbols()[i..]) != Some(y[i]) {
                        continue;
                    }
                }
                stack.push((t, u));
            }
        }
        Ok(out.into_iter().collect())
    }
}

impl DecompositionScheme for InducedDecomposition {
    fn name(&self) -> String {
        "induced".into()
    }

    fn shift(&self) -> &dyn ShiftSpace {
        &self.factor
    }

    fn split(&self, y: &Word) -> Result<Split> {
        let s = *self
            .preimage_suffixes(y)?
            .first()
            .ok_or_else(|| Error::NotAdmissible(self.factor.code.render(y)))?;
        Ok(Split { p: 0, g: y.len() - s, s })
    }

    fn member_p(&self, y: &Word) -> Result<bool> {
        Ok(y.is_empty())
    }

    fn member_g(&self, y: &Word) -> Result<bool> {
        Ok(self.preimage_suffixes(y)?.first() == Some(&0))
    }

    fn member_s(&self, y: &Word) -> Result<bool> {
        let n = y.len();
        Ok(self.preimage_suffixes(y)?.contains(&n))
    }
}

/// Upper entropy estimate of the induced `P ∪ S`; zero is expected.
pub fn factor_suffix_entropy(scheme: &InducedDecomposition, j: ScaleIndex, n_max: usize) -> Result<EntropyEstimate> {
    upper_entropy(scheme.obstructions().as_ref(), j, n_max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum FactorEntropyVerdict {
    /// Two core words of length `n` whose images differ at depth `j`: their
    /// `2^m` concatenations have distinct images.
    Positive {
        n: usize,
        v1: Word,
        v2: Word,
        rate_lower_bound: f64,
        m: usize,
        distinct_images: usize,
    },
    /// No such pair up to `n_max`; the image may be a single point at this scale.
    SinglePoint { n_max: usize },
    /// The search ran out of budget.
    Inconclusive { reason: String },
}

/// Searches core words `v₁, v₂ ∈ G̃` of equal length `n ≤ n_max` whose images
/// differ at some position `≤ j` inside the window they determine, then
/// checks that all `2^m` concatenations are admissible with distinct images,
/// giving `Λ(Y, nm, 2^-j) ≥ 2^m`.
pub fn factor_entropy_positive(
    sys: &BetaSystem,
    code: &BlockCode,
    j: usize,
    n_max: usize,
    m: usize,
) -> Result<FactorEntropyVerdict> {
    code.validate(sys)?;
    let k = code.window;
    for n in 1..=n_max {
        if n > sys.enumeration_cap() || sys.check_horizon(n * m.max(1)).is_err() {
            return Ok(FactorEntropyVerdict::Inconclusive { reason: format!("budget exhausted at n = {n}") });
        }
        if n < k + j {
            continue;
        }
        let core: Vec<Word> = sys
            .enumerate_language(n)?
            .into_iter()
            .filter(|v| sys.match_length(v).ok().flatten() == Some(0))
            .collect();
        let images: Vec<Word> = core.iter().map(|v| apply_code(code, v)).collect::<Result<_>>()?;
        for a in 0..core.len() {
            for b in a + 1..core.len() {
                if images[a].prefix(j + 1) == images[b].prefix(j + 1) {
                    continue;
                }
                let (v1, v2) = (core[a].clone(), core[b].clone());
                let distinct = concatenation_images(sys, code, &v1, &v2, m)?;
                if distinct == 1usize << m {
                    return Ok(FactorEntropyVerdict::Positive {
                        n,
                        v1,
                        v2,
                        rate_lower_bound: std::f64::consts::LN_2 / n as f64,
                        m,
                        distinct_images: distinct,
                    });
                }
            }
        }
    }
    Ok(FactorEntropyVerdict::SinglePoint { n_max })
}

/// Number of distinct images of the admissible words `v_{i_1} … v_{i_m}`.
fn concatenation_images(sys: &BetaSystem, code: &BlockCode, v1: &Word, v2: &Word, m: usize) -> Result<usize> {
    let mut images = BTreeSet::new();
    for mask in 0u64..(1u64 << m) {
        let word = (0..m).fold(Word::empty(), |acc, i| acc.concat(if mask >> i & 1 == 0 { v1 } else { v2 }));
        if !sys.is_in_language(&word)? {
            return Ok(0);
        }
        images.insert(apply_code(code, &word)?);
    }
    Ok(images.len())
}

/// Pairs of source paths with identical outputs. A state is the pair of
/// source states, the last `k - 1` input symbols on each side, and whether
/// the two inputs have differed yet.
#[derive(Clone, Debug)]
pub struct PairAutomaton {
    states: Vec<PairState>,
    /// Successor lists with the input symbol pair on each edge.
    edges: Vec<Vec<((Symbol, Symbol), usize)>>,
    /// Initial states with their multiplicity (number of `(k-1)`-word pairs).
    initial: Vec<(usize, u64)>,
    window: usize,
    horizon: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PairState {
    pub left: usize,
    pub right: usize,
    pub left_window: Word,
    pub right_window: Word,
    pub diverged: bool,
}

impl PairState {
    pub fn is_diagonal(&self) -> bool {
        !self.diverged
    }
}

impl PairAutomaton {
    pub fn new(sys: &BetaSystem, code: &BlockCode) -> Result<Self> {
        code.validate(sys)?;
        let a = sys.automaton();
        let k = code.window;
        let prefixes: Vec<Word> = a.enumerate(k - 1);
        let mut index: HashMap<PairState, usize> = HashMap::new();
        let mut states = Vec::new();
        let mut initial = Vec::new();
        let mut intern = |st: PairState, states: &mut Vec<PairState>| -> usize {
            *index.entry(st.clone()).or_insert_with(|| {
                states.push(st);
                states.len() - 1
            })
        };
        for u in &prefixes {
            for v in &prefixes {
                let st = PairState {
                    left: a.run(u).expect("admissible"),
                    right: a.run(v).expect("admissible"),
                    left_window: u.clone(),
                    right_window: v.clone(),
                    diverged: u != v,
                };
                initial.push((intern(st, &mut states), 1));
            }
        }
        let mut edges = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let st = states[i].clone();
            let mut out = Vec::new();
            for x in 0..a.alphabet_size() as Symbol {
                let Some(s1) = a.step(st.left, x) else { continue };
                let mut w1 = st.left_window.clone();
                w1.push(x);
                let y1 = code.image_of_block(w1.symbols());
                for y in 0..a.alphabet_size() as Symbol {
                    let Some(s2) = a.step(st.right, y) else { continue };
                    let mut w2 = st.right_window.clone();
                    w2.push(y);
                    if y1 != code.image_of_block(w2.symbols()) {
                        continue;
                    }
                    let next = PairState {
                        left: s1,
                        right: s2,
                        left_window: w1.suffix_from(1),
                        right_window: w2.suffix_from(1),
                        diverged: st.diverged || x != y,
                    };
                    out.push(((x, y), intern(next, &mut states)));
                }
            }
            edges.push(out);
            i += 1;
        }
        Ok(PairAutomaton { states, edges, initial, window: k, horizon: sys.horizon() })
    }

    pub fn states(&self) -> &[PairState] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Certified horizon inherited from a truncated source.
    pub fn horizon(&self) -> Option<usize> {
        self.horizon
    }

    /// Number of pairs `(v, v')` of admissible words of length `n ≥ k - 1`
    /// with `π(v) = π(v')`; with `distinct_only`, pairs with `v ≠ v'`.
    pub fn pair_count(&self, n: usize, distinct_only: bool) -> BigUint {
        if n + 1 < self.window {
            return BigUint::zero();
        }
        let mut v = vec![BigUint::zero(); self.states.len()];
        for &(s, c) in &self.initial {
            v[s] += c;
        }
        for _ in 0..n + 1 - self.window {
            let mut w = vec![BigUint::zero(); self.states.len()];
            for (s, out) in self.edges.iter().enumerate() {
                if v[s].is_zero() {
                    continue;
                }
                for &(_, t) in out {
                    w[t] += &v[s];
                }
            }
            v = w;
        }
        v.iter()
            .enumerate()
            .filter(|(s, _)| !distinct_only || self.states[*s].diverged)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn adjacency(&self) -> Matrix {
        let mut m = vec![vec![0u64; self.states.len()]; self.states.len()];
        for (s, out) in self.edges.iter().enumerate() {
            for &(_, t) in out {
                m[s][t] += 1;
            }
        }
        m
    }

    /// `from,to,left,right,diverged` per edge.
    pub fn edge_list_csv(&self) -> String {
        let mut out = String::from("from,to,left,right,diverged\n");
        for (s, edges) in self.edges.iter().enumerate() {
            for &((x, y), t) in edges {
                out.push_str(&format!("{s},{t},{x},{y},{}\n", self.states[t].diverged));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonexpansiveReport {
    pub scale: usize,
    pub pair_states: usize,
    /// No cycle through a diverged state: distinct points have distinct images.
    pub positively_expansive: bool,
    /// `log` of the spectral radius on diverged states (`None` without cycles).
    pub pair_rate: Option<f64>,
    /// `min(pair_rate, h(X))`: bound for the entropy of non-expansive points.
    pub growth: Option<f64>,
    pub certified_horizon: Option<usize>,
}

/// Pairs of distinct source points with the same image at every time. For
/// the symbolic metric on `Y`, staying within `2^-j` at every time means
/// agreeing everywhere, so the answer does not depend on `j`.
pub fn nonexpansive_growth(sys: &BetaSystem, code: &BlockCode, j: usize) -> Result<(NonexpansiveReport, PairAutomaton)> {
    let pa = PairAutomaton::new(sys, code)?;
    let diverged: Vec<usize> = (0..pa.num_states()).filter(|&s| pa.states[s].diverged).collect();
    let sub = submatrix(&pa.adjacency(), &diverged);
    let cyclic = strongly_connected_components(&sub)
        .iter()
        .any(|c| c.len() > 1 || sub[c[0]][c[0]] > 0);
    let pair_rate = cyclic.then(|| spectral_radius_f64(&sub).ln());
    let report = NonexpansiveReport {
        scale: j,
        pair_states: pa.num_states(),
        positively_expansive: !cyclic,
        pair_rate,
        growth: pair_rate.map(|r| r.min(sys.entropy())),
        certified_horizon: pa.horizon(),
    };
    Ok((report, pa))
}

/// The conditions under which a factor inherits a unique measure of maximal
/// entropy, with a constructive uniqueness check: empirical measures on `Y`
/// at two lengths must agree on depth-3 cylinders.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorMmeReport {
    pub positively_expansive: bool,
    pub suffix_rate: f64,
    pub factor_entropy: f64,
    pub hypotheses_met: bool,
    pub lengths: (usize, usize),
    pub max_difference: Option<f64>,
    pub agreement: Option<bool>,
    pub tolerance: f64,
}

pub fn factor_mme_check(
    sys: &BetaSystem,
    code: &BlockCode,
    suffix_n_max: usize,
    lengths: (usize, usize),
    tolerance: f64,
) -> Result<FactorMmeReport> {
    let factor = FactorShift::new(sys, code)?;
    let scheme = InducedDecomposition::new(&factor);
    let (nonexp, _) = nonexpansive_growth(sys, code, 0)?;
    let suffix = factor_suffix_entropy(&scheme, ScaleIndex(0), suffix_n_max)?;
    let h = factor.entropy();
    let hypotheses_met = nonexp.positively_expansive && suffix.rate < h;
    let (max_difference, agreement) = if hypotheses_met {
        let a = empirical_mme(&factor, lengths.0, 3)?;
        let b = empirical_mme(&factor, lengths.1, 3)?;
        let d = max_cylinder_difference(&a, &b, 3)?;
        (Some(d), Some(d < tolerance))
    } else {
        (None, None)
    };
    Ok(FactorMmeReport {
        positively_expansive: nonexp.positively_expansive,
        suffix_rate: suffix.rate,
        factor_entropy: h,
        hypotheses_met,
        lengths,
        max_difference,
        agreement,
        tolerance,
    })
}

/// Gluing time of the induced `G^M` on `Y` at scale `j`, next to the bound
/// `k - 1 + j + τ_M` from the source gluing time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InducedSpecReport {
    pub m: usize,
    pub scale: usize,
    pub source_tau: Option<usize>,
    pub factor_tau: Option<usize>,
    pub bound: Option<usize>,
    pub within_bound: Option<bool>,
}

pub fn induced_specification(
    sys: &BetaSystem,
    code: &BlockCode,
    m: usize,
    j: usize,
    tau_max: usize,
    params: &SpecParams,
) -> Result<InducedSpecReport> {
    let source = crate::decomposition::BetaDecomposition::new(sys);
    let found = |g: GluingTime| match g {
        GluingTime::Found { tau } => Some(tau),
        _ => None,
    };
    let source_tau = found(min_gluing_time(source.filtration(m).as_ref(), ScaleIndex(j), tau_max, params)?.0);
    let factor = FactorShift::new(sys, code)?;
    let scheme = InducedDecomposition::new(&factor);
    let bound = source_tau.map(|t| code.window - 1 + j + t);
    let factor_tau = found(
        min_gluing_time(scheme.filtration(m).as_ref(), ScaleIndex(j), bound.unwrap_or(tau_max).max(tau_max), params)?.0,
    );
    Ok(InducedSpecReport {
        m,
        scale: j,
        source_tau,
        factor_tau,
        bound,
        within_bound: bound.zip(factor_tau).map(|(b, t)| t <= b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::{parse_beta, PrecisionPolicy};
    use crate::decomposition::BetaDecomposition;

    fn w(s: &str) -> Word {
        Word::from_digits(s)
    }

    #[test]
    fn apply_code_examples() {
        assert_eq!(apply_code(&BlockCode::identity(2), &w("0110")).unwrap(), w("0110"));
        assert_eq!(apply_code(&BlockCode::xor(), &w("0110")).unwrap(), w("101"));
        let merge = BlockCode::merge_all(2);
        assert_eq!(merge.render(&apply_code(&merge, &w("010")).unwrap()), "aaa");
        assert!(apply_code(&BlockCode::xor(), &w("1")).is_err());
    }

    #[test]
    fn factor_language_examples() {
        let f = BetaSystem::full_shift(2);
        let g = BetaSystem::golden_mean();
        assert_eq!(factor_language(&f, &BlockCode::xor(), 3).unwrap().len(), 8);
        assert_eq!(factor_language(&g, &BlockCode::merge_all(2), 5).unwrap().len(), 1);
        assert_eq!(factor_language(&g, &BlockCode::identity(2), 3).unwrap().len(), 5);
    }

    #[test]
    fn image_presentation_matches_enumeration() {
        let g = BetaSystem::golden_mean();
        let b = parse_beta("1+sqrt(2)").unwrap();
        let s = BetaSystem::from_beta(&b, 10, &PrecisionPolicy::default()).unwrap();
        let cases: Vec<(&BetaSystem, BlockCode)> = vec![
            (&g, BlockCode::identity(2)),
            (&g, BlockCode::xor()),
            (&g, BlockCode::merge_all(2)),
            (&s, BlockCode::one_block(&[0, 1, 1])),
        ];
        for (sys, code) in cases {
            let y = FactorShift::new(sys, &code).unwrap();
            for n in 0..=8 {
                let lang = factor_language(sys, &code, n).unwrap();
                assert_eq!(y.enumerate(n).unwrap(), lang, "n = {n}");
            }
        }
    }

    #[test]
    fn image_language_is_factorial() {
        let g = BetaSystem::golden_mean();
        let code = BlockCode::xor();
        for n in 1..=10 {
            let short: BTreeSet<Word> = factor_language(&g, &code, n).unwrap().into_iter().collect();
            for y in factor_language(&g, &code, n + 1).unwrap() {
                assert!(short.contains(&y.prefix(n)) && short.contains(&y.suffix_from(1)));
            }
        }
    }

    #[test]
    fn induced_identity_matches_source() {
        let g = BetaSystem::golden_mean();
        let y = FactorShift::new(&g, &BlockCode::identity(2)).unwrap();
        let induced = InducedDecomposition::new(&y);
        let source = BetaDecomposition::new(&g);
        for n in 0..=10 {
            for v in g.enumerate_language(n).unwrap() {
                assert_eq!(induced.split(&v).unwrap(), source.split(&v).unwrap());
                assert_eq!(induced.member_s(&v).unwrap(), source.member_s(&v).unwrap());
            }
        }
    }

    #[test]
    fn induced_split_is_total_and_consistent() {
        let g = BetaSystem::golden_mean();
        for code in [BlockCode::xor(), BlockCode::merge_all(2), BlockCode::identity(2)] {
            let y = FactorShift::new(&g, &code).unwrap();
            let d = InducedDecomposition::new(&y);
            for n in 0..=10 {
                for v in y.enumerate(n).unwrap() {
                    let sp = d.split(&v).unwrap();
                    let (_, core, suffix) = sp.pieces(&v);
                    assert!(d.member_g(&core).unwrap(), "{v} core {core}");
                    assert!(d.member_s(&suffix).unwrap(), "{v} suffix {suffix}");
                }
            }
        }
    }

    #[test]
    fn one_block_images_of_core_words_are_core() {
        let g = BetaSystem::golden_mean();
        let code = BlockCode::one_block(&[1, 0]);
        let y = FactorShift::new(&g, &code).unwrap();
        let d = InducedDecomposition::new(&y);
        for n in 1..=10 {
            for v in g.enumerate_language(n).unwrap() {
                if g.match_length(&v).unwrap() == Some(0) {
                    assert!(d.member_g(&apply_code(&code, &v).unwrap()).unwrap());
                }
            }
        }
    }

    #[test]
    fn xor_suffix_class() {
        // the suffix words of the full 2-shift are 1^n; with one symbol of
        // lookahead their images are 0^n and 0^{n-1}1
        let f = BetaSystem::full_shift(2);
        let y = FactorShift::new(&f, &BlockCode::xor()).unwrap();
        let d = InducedDecomposition::new(&y);
        for n in 1..=8 {
            let s: Vec<Word> = y.enumerate(n).unwrap().into_iter().filter(|v| d.member_s(v).unwrap()).collect();
            let mut expect = vec![Word::repeat(0, n), Word::repeat(0, n - 1).concat(&w("1"))];
            expect.sort();
            assert_eq!(s, expect);
        }
        let e = factor_suffix_entropy(&d, ScaleIndex(0), 16).unwrap();
        assert_eq!(e.rate, 0.0);
    }

    #[test]
    fn suffix_entropy_is_zero() {
        let g = BetaSystem::golden_mean();
        for code in [BlockCode::identity(2), BlockCode::merge_all(2)] {
            let y = FactorShift::new(&g, &code).unwrap();
            let d = InducedDecomposition::new(&y);
            assert_eq!(d.obstructions().count_at(7, 0).unwrap(), Some(BigUint::from(1u32)));
            assert_eq!(factor_suffix_entropy(&d, ScaleIndex(0), 16).unwrap().rate, 0.0);
        }
    }

    #[test]
    fn entropy_positive_verdicts() {
        let g = BetaSystem::golden_mean();
        match factor_entropy_positive(&g, &BlockCode::identity(2), 0, 8, 4).unwrap() {
            FactorEntropyVerdict::Positive { n, v1, v2, .. } => {
                assert_eq!(n, 3);
                assert_eq!((v1, v2), (w("000"), w("100")));
            }
            v => panic!("{v:?}"),
        }
        assert_eq!(
            factor_entropy_positive(&g, &BlockCode::merge_all(2), 0, 8, 4).unwrap(),
            FactorEntropyVerdict::SinglePoint { n_max: 8 }
        );
        let f = BetaSystem::full_shift(2);
        match factor_entropy_positive(&f, &BlockCode::xor(), 0, 8, 6).unwrap() {
            FactorEntropyVerdict::Positive { n, v1, v2, rate_lower_bound, distinct_images, .. } => {
                assert_eq!((n, v1, v2), (2, w("00"), w("10")));
                assert!((rate_lower_bound - std::f64::consts::LN_2 / 2.0).abs() < 1e-15);
                assert_eq!(distinct_images, 64);
            }
            v => panic!("{v:?}"),
        }
        let tight = BetaSystem::golden_mean().with_enumeration_cap(2);
        assert!(matches!(
            factor_entropy_positive(&tight, &BlockCode::identity(2), 0, 8, 1).unwrap(),
            FactorEntropyVerdict::Inconclusive { .. }
        ));
    }

    #[test]
    fn pair_counts_match_double_enumeration() {
        let g = BetaSystem::golden_mean();
        let f = BetaSystem::full_shift(2);
        let cases = [(&g, BlockCode::identity(2)), (&g, BlockCode::merge_all(2)), (&f, BlockCode::xor()), (&g, BlockCode::xor())];
        for (sys, code) in cases {
            let pa = PairAutomaton::new(sys, &code).unwrap();
            for n in code.window() - 1..=8 {
                let words = sys.enumerate_language(n).unwrap();
                let images: Vec<Word> = words.iter().map(|v| apply_code(&code, v).unwrap_or_default()).collect();
                let mut all = 0u64;
                let mut distinct = 0u64;
                for a in 0..words.len() {
                    for b in 0..words.len() {
                        if images[a] == images[b] {
                            all += 1;
                            distinct += u64::from(a != b);
                        }
                    }
                }
                assert_eq!(pa.pair_count(n, false), BigUint::from(all), "n = {n}");
                assert_eq!(pa.pair_count(n, true), BigUint::from(distinct), "n = {n}");
            }
        }
    }

    #[test]
    fn nonexpansive_verdicts() {
        let g = BetaSystem::golden_mean();
        let (r, _) = nonexpansive_growth(&g, &BlockCode::identity(2), 0).unwrap();
        assert!(r.positively_expansive && r.pair_rate.is_none());
        let (r, _) = nonexpansive_growth(&g, &BlockCode::merge_all(2), 0).unwrap();
        assert!(!r.positively_expansive);
        assert!((r.pair_rate.unwrap() - 2.0 * g.entropy()).abs() < 1e-9);
        assert!((r.growth.unwrap() - g.entropy()).abs() < 1e-12);
    }

    #[test]
    fn identity_factor_has_unique_mme() {
        let g = BetaSystem::golden_mean();
        let r = factor_mme_check(&g, &BlockCode::identity(2), 16, (500, 1000), 0.05).unwrap();
        assert!(r.hypotheses_met);
        assert!(r.agreement.unwrap());
        assert!((r.factor_entropy - g.entropy()).abs() < 1e-9);
    }

    #[test]
    fn induced_gluing_time_within_bound() {
        let g = BetaSystem::golden_mean();
        let params = SpecParams { max_len: 4, ..SpecParams::default() };
        let r = induced_specification(&g, &BlockCode::xor(), 1, 0, 4, &params).unwrap();
        assert_eq!(r.within_bound, Some(true), "{r:?}");
    }
}
