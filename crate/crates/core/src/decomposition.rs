//! Prefix/core/suffix decompositions of words, the filtration `G^M`,
//! specification checks with gap search, and obstruction-entropy bounds.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::beta::BetaSystem;
use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::symbolic::{
    upper_entropy, Ambient, AutomatonCollection, EntropyEstimate, GeneratedCollection, OrbitCollection,
    ScaleIndex, ShiftSpace,
};
use crate::word::{Symbol, Word};

/// Lengths of the prefix, core and suffix of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Split {
    pub p: usize,
    pub g: usize,
    pub s: usize,
}

impl Split {
    pub fn len(&self) -> usize {
        self.p + self.g + self.s
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The three pieces of `v`.
    pub fn pieces(&self, v: &Word) -> (Word, Word, Word) {
        (v.prefix(self.p), v.slice(self.p, self.p + self.g), v.suffix_from(self.p + self.g))
    }
}

/// A rule splitting every admissible word as prefix · core · suffix with the
/// pieces drawn from classes `P`, `G`, `S`. The empty word may belong to
/// any class.
pub trait DecompositionScheme: Sync {
    fn name(&self) -> String;

    fn shift(&self) -> &dyn ShiftSpace;

    fn split(&self, v: &Word) -> Result<Split>;

    fn member_p(&self, v: &Word) -> Result<bool>;

    fn member_g(&self, v: &Word) -> Result<bool>;

    fn member_s(&self, v: &Word) -> Result<bool>;

    /// `v ∈ G^M`: prefix and suffix lengths at most `m`.
    fn member_gm(&self, v: &Word, m: usize) -> Result<bool> {
        let sp = self.split(v)?;
        Ok(sp.p <= m && sp.s <= m)
    }

    /// The collection `G`.
    fn good(&self) -> Box<dyn OrbitCollection + '_> {
        Box::new(GeneratedCollection::from_predicate(
            format!("{} G", self.name()),
            Ambient::of(self.shift()),
            |_| true,
            move |v| self.member_g(v).unwrap_or(false),
        ))
    }

    /// The collection `G^M`.
    fn filtration(&self, m: usize) -> Box<dyn OrbitCollection + '_> {
        Box::new(GeneratedCollection::from_predicate(
            format!("{} G^{m}", self.name()),
            Ambient::of(self.shift()),
            |_| true,
            move |v| self.member_gm(v, m).unwrap_or(false),
        ))
    }

    /// The collection `P ∪ S`.
    fn obstructions(&self) -> Box<dyn OrbitCollection + '_> {
        Box::new(GeneratedCollection::from_predicate(
            format!("{} P∪S", self.name()),
            Ambient::of(self.shift()),
            |_| true,
            move |v| self.member_p(v).unwrap_or(false) || self.member_s(v).unwrap_or(false),
        ))
    }

    /// Whether the scheme could satisfy the entropy-gap hypotheses at all
    /// (`false` for schemes built to be vacuous).
    fn is_degenerate(&self) -> bool {
        false
    }

    /// `Λ(P ∪ S, i, 2^-j)` for all `i`, when it has a closed form.
    fn obstruction_profile(&self, _j: usize) -> Result<Option<ObstructionProfile>> {
        Ok(None)
    }
}

/// The sequence `c_i = Λ(P ∪ S, i, 2^-j)`. With `period = Some((p, q))` it
/// continues periodically: `c_i = c_{p + (i - p) mod q}` for `i ≥ p + q`.
/// Without a period only the stored terms are known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionProfile {
    pub counts: Vec<BigUint>,
    pub period: Option<(usize, usize)>,
}

impl ObstructionProfile {
    pub fn get(&self, i: usize) -> Option<&BigUint> {
        match self.period {
            Some((p, q)) if i >= p + q => self.counts.get(p + (i - p) % q),
            _ => self.counts.get(i),
        }
    }
}

/// The β-shift decomposition: `P = {ε}`, `S` = prefixes of `w`, `G` = words
/// ending in no nonempty prefix of `w`. The suffix is the longest suffix of `v`
/// that is a prefix of `w`.
#[derive(Clone, Debug)]
pub struct BetaDecomposition {
    sys: BetaSystem,
}

impl BetaDecomposition {
    pub fn new(sys: &BetaSystem) -> Self {
        BetaDecomposition { sys: sys.clone() }
    }

    pub fn system(&self) -> &BetaSystem {
        &self.sys
    }

    fn match_length(&self, v: &Word) -> Result<usize> {
        self.sys
            .match_length(v)?
            .ok_or_else(|| Error::NotAdmissible(v.render(self.sys.alphabet_size())))
    }

    /// Presentation whose states are `(automaton state, min(match length, cap))`,
    /// accepting the same language; the second coordinate of each state is
    /// returned alongside.
    pub fn capped_match_presentation(&self, cap: usize) -> Result<(Presentation, Vec<usize>)> {
        let base = self.sys.automaton();
        let b = base.alphabet_size();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut states = vec![(base.start(), 0usize)];
        index.insert((base.start(), 0), 0);
        let mut next: Vec<Vec<Option<usize>>> = Vec::new();
        let mut i = 0;
        while i < states.len() {
            let (f, c) = states[i];
            let mut row = vec![None; b];
            if let Some(d) = self.sys.w_digit(f) {
                for (a, slot) in row.iter_mut().enumerate() {
                    let Some(t) = base.step(f, a as Symbol) else { continue };
                    let key = if (a as Symbol) < d { (0, 0) } else { (t, (c + 1).min(cap)) };
                    let id = *index.entry(key).or_insert_with(|| {
                        states.push(key);
                        states.len() - 1
                    });
                    *slot = Some(id);
                }
            }
            next.push(row);
            i += 1;
        }
        let caps = states.iter().map(|&(_, c)| c).collect();
        Ok((Presentation::new(b, 0, next)?, caps))
    }

    fn capped_collection(&self, label: String, m: usize) -> Result<AutomatonCollection> {
        let (presentation, caps) = self.capped_match_presentation(m + 1)?;
        let ambient = Ambient { presentation, ..Ambient::of(&self.sys) };
        AutomatonCollection::new(label, ambient, caps.iter().map(|&c| c <= m).collect())
    }
}

impl DecompositionScheme for BetaDecomposition {
    fn name(&self) -> String {
        "beta".into()
    }

    fn shift(&self) -> &dyn ShiftSpace {
        &self.sys
    }

    fn split(&self, v: &Word) -> Result<Split> {
        let s = self.match_length(v)?;
        Ok(Split { p: 0, g: v.len() - s, s })
    }

    fn member_p(&self, v: &Word) -> Result<bool> {
        Ok(v.is_empty())
    }

    fn member_g(&self, v: &Word) -> Result<bool> {
        Ok(self.sys.match_length(v)? == Some(0))
    }

    fn member_s(&self, v: &Word) -> Result<bool> {
        Ok(self.sys.w_prefix(v.len())? == *v)
    }

    fn good(&self) -> Box<dyn OrbitCollection + '_> {
        self.filtration(0)
    }

    fn filtration(&self, m: usize) -> Box<dyn OrbitCollection + '_> {
        let label = if m == 0 { "beta G".to_string() } else { format!("beta G^{m}") };
        Box::new(self.capped_collection(label, m).expect("capped presentation is valid"))
    }

    fn obstruction_profile(&self, j: usize) -> Result<Option<ObstructionProfile>> {
        // the only word of P ∪ S of length i is w_1..w_i, ending in state fold(i)
        let a = self.sys.automaton();
        let (len, period) = match (self.sys.period_structure(), self.sys.horizon()) {
            (Some((p, q)), _) => (p + q, Some((p, q))),
            (None, Some(h)) if h >= j => (h - j + 1, None),
            _ => return Ok(None),
        };
        let counts = (0..len).map(|i| a.paths_from(self.sys.fold(i), j)).collect();
        Ok(Some(ObstructionProfile { counts, period }))
    }

    fn obstructions(&self) -> Box<dyn OrbitCollection + '_> {
        Box::new(GeneratedCollection::new("beta P∪S", Ambient::of(&self.sys), move |n| {
            if n == 0 {
                Ok(Some(vec![Word::empty()]))
            } else {
                Ok(Some(vec![self.sys.w_prefix(n)?]))
            }
        }))
    }
}

/// The vacuous scheme `P = ∅`, `G = {ε}`, `S = L`: every word is all suffix.
pub struct DegenerateDecomposition<'a> {
    shift: &'a dyn ShiftSpace,
}

impl<'a> DegenerateDecomposition<'a> {
    pub fn new(shift: &'a dyn ShiftSpace) -> Self {
        DegenerateDecomposition { shift }
    }
}

impl DecompositionScheme for DegenerateDecomposition<'_> {
    fn name(&self) -> String {
        "degenerate".into()
    }

    fn shift(&self) -> &dyn ShiftSpace {
        self.shift
    }

    fn split(&self, v: &Word) -> Result<Split> {
        if !self.shift.contains(v)? {
            return Err(Error::NotAdmissible(v.render(self.shift.alphabet_size())));
        }
        Ok(Split { p: 0, g: 0, s: v.len() })
    }

    fn member_p(&self, v: &Word) -> Result<bool> {
        Ok(v.is_empty())
    }

    fn member_g(&self, v: &Word) -> Result<bool> {
        Ok(v.is_empty())
    }

    fn member_s(&self, v: &Word) -> Result<bool> {
        self.shift.contains(v)
    }

    fn good(&self) -> Box<dyn OrbitCollection + '_> {
        Box::new(GeneratedCollection::new("degenerate G", Ambient::of(self.shift), |n| {
            Ok(Some(if n == 0 { vec![Word::empty()] } else { Vec::new() }))
        }))
    }

    fn filtration(&self, m: usize) -> Box<dyn OrbitCollection + '_> {
        let whole = AutomatonCollection::whole_shift(self.shift);
        let ambient = Ambient::of(self.shift);
        Box::new(GeneratedCollection::new(format!("degenerate G^{m}"), ambient, move |n| {
            if n <= m {
                whole.words_at(n)
            } else {
                Ok(Some(Vec::new()))
            }
        }))
    }

    fn obstructions(&self) -> Box<dyn OrbitCollection + '_> {
        Box::new(AutomatonCollection::whole_shift(self.shift))
    }

    fn is_degenerate(&self) -> bool {
        true
    }
}

/// `|G^M_n| / |L_n|`.
pub fn filtration_coverage(scheme: &dyn DecompositionScheme, m: usize, n: usize) -> Result<BigRational> {
    let total = scheme.shift().count(n)?;
    if total.is_zero() {
        return Err(Error::InvalidInput(format!("L_{n} is empty")));
    }
    let good = scheme.filtration(m).count_at(n, 0)?.unwrap_or_default();
    Ok(BigRational::new(BigInt::from(good), BigInt::from(total)))
}

/// Upper estimate of the entropy of `P ∪ S` at scale `2^-j`, an upper bound
/// for the specification-obstruction entropy at that scale.
pub fn obstruction_entropy_upper(
    scheme: &dyn DecompositionScheme,
    j: ScaleIndex,
    n_max: usize,
) -> Result<EntropyEstimate> {
    upper_entropy(scheme.obstructions().as_ref(), j, n_max)
}

/// The scale-free quantity: the limit over `j → ∞` of the fixed-scale bound,
/// evaluated as the maximum over `j = 0..=j_max` (the bound is nondecreasing
/// in `j`). Returns the per-scale estimates.
pub fn obstruction_entropy_limit(
    scheme: &dyn DecompositionScheme,
    j_max: usize,
    n_max: usize,
) -> Result<(f64, Vec<EntropyEstimate>)> {
    let per_scale = (0..=j_max)
        .map(|j| obstruction_entropy_upper(scheme, ScaleIndex(j), n_max))
        .collect::<Result<Vec<_>>>()?;
    let limit = per_scale.iter().map(|e| e.rate).fold(0.0, f64::max);
    Ok((limit, per_scale))
}

/// Controls which tuples a specification check visits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct SpecParams {
    /// Longest orbit-segment length `n` drawn from the collection.
    pub max_len: usize,
    /// Longest tuple.
    pub k_max: usize,
    /// Tuple count per tuple length above which sampling replaces exhaustion.
    pub budget: u64,
    /// Tuples drawn per tuple length when sampling.
    pub samples: u64,
    pub seed: u64,
    /// Failing tuples and passing witnesses kept in the report.
    pub keep: usize,
}

impl Default for SpecParams {
    fn default() -> Self {
        SpecParams { max_len: 6, k_max: 2, budget: 100_000, samples: 20_000, seed: 0x5eed, keep: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GluingWitness {
    pub tuple: Vec<Word>,
    /// The `k - 1` transition words of length `τ` following each segment.
    pub gaps: Vec<Word>,
    pub glued: Word,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecificationReport {
    pub collection: String,
    pub scale: ScaleIndex,
    pub gap: usize,
    pub max_len: usize,
    pub k_max: usize,
    pub exhaustive: bool,
    pub sample_description: String,
    pub tuples_tested: u64,
    pub failures_total: u64,
    pub pass: bool,
    /// The first failing tuples, in enumeration order.
    pub failures: Vec<Vec<Word>>,
    /// The first passing tuples with their gluing words.
    pub witnesses: Vec<GluingWitness>,
}

/// Lexicographically least admissible word meeting the positional
/// constraints, if any.
fn fill_constraints(p: &Presentation, constraints: &[Option<Symbol>]) -> Option<Word> {
    let b = p.alphabet_size() as Symbol;
    let mut out = Vec::with_capacity(constraints.len());
    // stack of (state before position, next symbol to try)
    let mut stack: Vec<(usize, Symbol)> = vec![(p.start(), 0)];
    while let Some(&(state, try_from)) = stack.last() {
        let pos = stack.len() - 1;
        if pos == constraints.len() {
            return Some(Word::new(out));
        }
        let candidates = match constraints[pos] {
            Some(a) if try_from <= a => a..a + 1,
            Some(_) => 0..0,
            None => try_from..b,
        };
        let found = candidates
            .into_iter()
            .find_map(|a| p.step(state, a).map(|t| (a, t)));
        match found {
            Some((a, t)) => {
                stack.last_mut().expect("nonempty").1 = a + 1;
                out.push(a);
                stack.push((t, 0));
            }
            None => {
                stack.pop();
                out.pop();
            }
        }
    }
    None
}

/// Tries to shadow the segments `tuple[i]` (each of core length `cores[i]`,
/// extended by `j` symbols) with gaps of `tau` symbols.
fn glue(p: &Presentation, tuple: &[&Word], cores: &[usize], j: usize, tau: usize) -> Option<GluingWitness> {
    let mut offsets = Vec::with_capacity(tuple.len());
    let mut at = 0;
    for &n in cores {
        offsets.push(at);
        at += n + tau;
    }
    let total = offsets.last().unwrap() + cores.last().unwrap() + j;
    let mut constraints: Vec<Option<Symbol>> = vec![None; total];
    for (e, &o) in tuple.iter().zip(&offsets) {
        for (i, &a) in e.symbols().iter().enumerate() {
            match constraints[o + i] {
                Some(c) if c != a => return None,
                _ => constraints[o + i] = Some(a),
            }
        }
    }
    let glued = fill_constraints(p, &constraints)?;
    let gaps = offsets
        .windows(2)
        .zip(cores)
        .map(|(o, &n)| glued.slice(o[0] + n, o[1]))
        .collect();
    Some(GluingWitness { tuple: tuple.iter().map(|w| (*w).clone()).collect(), gaps, glued })
}

/// Checks that every tuple of segments from `collection` (lengths
/// `1..=max_len`, up to `k_max` segments, depth `j`) can be glued with
/// transition words of length `tau`.
pub fn check_specification(
    collection: &dyn OrbitCollection,
    j: ScaleIndex,
    tau: usize,
    params: &SpecParams,
) -> Result<SpecificationReport> {
    let p = &collection.ambient().presentation;
    let mut pool: Vec<(Word, usize)> = Vec::new();
    for n in 1..=params.max_len {
        if let Some(ws) = collection.extended_words_at(n, j.0)? {
            pool.extend(ws.into_iter().map(|w| (w, n)));
        }
    }
    let mut report = SpecificationReport {
        collection: collection.label(),
        scale: j,
        gap: tau,
        max_len: params.max_len,
        k_max: params.k_max,
        exhaustive: true,
        sample_description: String::new(),
        tuples_tested: 0,
        failures_total: 0,
        pass: true,
        failures: Vec::new(),
        witnesses: Vec::new(),
    };
    let mut descriptions = Vec::new();
    let size = pool.len() as u64;
    for k in 2..=params.k_max.max(2) {
        let total = size.checked_pow(k as u32).unwrap_or(u64::MAX);
        let indices: Vec<u64> = if total <= params.budget {
            descriptions.push(format!("k={k}: all {total} tuples"));
            (0..total).collect()
        } else {
            report.exhaustive = false;
            descriptions.push(format!(
                "k={k}: {} of {total} tuples sampled uniformly (seed {})",
                params.samples, params.seed
            ));
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ k as u64);
            (0..params.samples).map(|_| rng.gen_range(0..total)).collect()
        };
        let outcomes: Vec<(Vec<&Word>, Option<GluingWitness>)> = indices
            .par_iter()
            .map(|&idx| {
                let mut rest = idx;
                let mut tuple = Vec::with_capacity(k);
                let mut cores = Vec::with_capacity(k);
                for _ in 0..k {
                    let (w, n) = &pool[(rest % size) as usize];
                    rest /= size;
                    tuple.push(w);
                    cores.push(*n);
                }
                tuple.reverse();
                cores.reverse();
                let witness = glue(p, &tuple, &cores, j.0, tau);
                (tuple, witness)
            })
            .collect();
        for (tuple, witness) in outcomes {
            report.tuples_tested += 1;
            match witness {
                Some(w) => {
                    if report.witnesses.len() < params.keep {
                        report.witnesses.push(w);
                    }
                }
                None => {
                    report.pass = false;
                    report.failures_total += 1;
                    if report.failures.len() < params.keep {
                        report.failures.push(tuple.into_iter().cloned().collect());
                    }
                }
            }
        }
    }
    report.sample_description = descriptions.join("; ");
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum GluingTime {
    /// Smallest gap with an exhaustive passing report.
    Found { tau: usize },
    /// Every gap up to the limit fails; carries a failing tuple at the largest gap.
    Failed { tau_max: usize, witness: Vec<Word> },
    /// Some gap passed, but only on a sample.
    Inconclusive { tau: usize },
}

/// Smallest `τ ≤ tau_max` for which `check_specification` passes exhaustively.
pub fn min_gluing_time(
    collection: &dyn OrbitCollection,
    j: ScaleIndex,
    tau_max: usize,
    params: &SpecParams,
) -> Result<(GluingTime, Vec<SpecificationReport>)> {
    let mut reports = Vec::new();
    for tau in 0..=tau_max {
        let r = check_specification(collection, j, tau, params)?;
        let (pass, exhaustive) = (r.pass, r.exhaustive);
        reports.push(r);
        if pass {
            let verdict = if exhaustive { GluingTime::Found { tau } } else { GluingTime::Inconclusive { tau } };
            return Ok((verdict, reports));
        }
    }
    let witness = reports.last().and_then(|r| r.failures.first().cloned()).unwrap_or_default();
    Ok((GluingTime::Failed { tau_max, witness }, reports))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub holds: bool,
    pub checked: u64,
    /// For the zero-padding property: the largest padding needed.
    pub max_witness: usize,
    pub counterexample: Option<Vec<Word>>,
}

/// For every `v ∈ L_n`, `n ≤ n_max`: the least `k` with `v 0^k` in the
/// good-core class. Returns the report and the per-word witnesses.
pub fn zero_padding_property(sys: &BetaSystem, n_max: usize) -> Result<(PropertyReport, Vec<(Word, usize)>)> {
    let bound = n_max + sys.automaton().num_states() + 1;
    let mut witnesses = Vec::new();
    let mut counterexample = None;
    for n in 0..=n_max {
        for v in sys.enumerate_language(n)? {
            let mut padded = v.clone();
            let mut found = None;
            for k in 0..=bound {
                if sys.horizon().is_some_and(|h| padded.len() > h) {
                    break;
                }
                if sys.match_length(&padded)? == Some(0) {
                    found = Some(k);
                    break;
                }
                padded.push(0);
            }
            match found {
                Some(k) => witnesses.push((v, k)),
                None => {
                    counterexample.get_or_insert_with(|| vec![v.clone()]);
                }
            }
        }
    }
    let report = PropertyReport {
        holds: counterexample.is_none(),
        checked: witnesses.len() as u64 + u64::from(counterexample.is_some()),
        max_witness: witnesses.iter().map(|(_, k)| *k).max().unwrap_or(0),
        counterexample,
    };
    Ok((report, witnesses))
}

/// For all `u` in the good-core class and `v ∈ L` with `|u| + |v| ≤ max_total`:
/// `uv ∈ L`.
pub fn free_concatenation_property(scheme: &dyn DecompositionScheme, max_total: usize) -> Result<PropertyReport> {
    let shift = scheme.shift();
    let good = scheme.good();
    let mut goods: Vec<Word> = Vec::new();
    let mut lang: Vec<Vec<Word>> = Vec::new();
    for n in 0..=max_total {
        goods.extend(good.words_at(n)?.unwrap_or_default());
        lang.push(shift.enumerate(n)?);
    }
    let p = shift.presentation();
    let results: Vec<(u64, Option<Vec<Word>>)> = goods
        .par_iter()
        .map(|u| {
            let mut checked = 0;
            let Some(s) = p.run(u) else { return (0, Some(vec![u.clone()])) };
            for vs in &lang[..=max_total - u.len()] {
                for v in vs {
                    checked += 1;
                    if p.run_from(s, v.symbols()).is_none() {
                        return (checked, Some(vec![u.clone(), v.clone()]));
                    }
                }
            }
            (checked, None)
        })
        .collect();
    let checked = results.iter().map(|r| r.0).sum();
    let counterexample = results.into_iter().find_map(|r| r.1);
    Ok(PropertyReport { holds: counterexample.is_none(), checked, max_witness: 0, counterexample })
}

/// `|G_n|` for `n = 0..=n_max` from a scheme's good collection.
pub fn good_counts(scheme: &dyn DecompositionScheme, n_max: usize) -> Result<Vec<BigUint>> {
    let good = scheme.good();
    let mut out = vec![good.count_at(0, 0)?.unwrap_or_default()];
    out.extend(good.counts_up_to(n_max, 0)?.into_iter().map(Option::unwrap_or_default));
    Ok(out)
}
