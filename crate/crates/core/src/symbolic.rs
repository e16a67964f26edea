//! Shift spaces, orbit collections, separated-set counts and entropy
//! estimates at symbolic scales.
//!
//! Points are one-sided sequences with `d(x, y) = 2^-min{k : x_k != y_k}`.
//! A scale `ε = 2^-j` is represented by its [`ScaleIndex`] `j`; two points are
//! within `ε` in the Bowen metric `d_n` iff their first `n + j` symbols agree.
//! Hence an `(n, 2^-j)`-separated set of maximal size picks one point from
//! each `(n + j)`-cylinder, and `Λ(D, n, 2^-j)` is the number of distinct
//! `(n + j)`-prefixes of points of `D_n`.
//!
//! Multiplying a scale by a constant `c` moves the depth by at most
//! `⌈log2 c⌉` symbols:
//!
//! | scale | depth |
//! |-------|-------|
//! | `δ`   | `j`   |
//! | `c·δ`, `1 ≤ c < 8` | `≥ j - 3` |
//! | `3δ`  | `≥ j - 2` |
//! | `6δ`, `7δ` | `≥ j - 3` |
//! | `14δ` | `≥ j - 4` |
//! | `28δ` | `≥ j - 5` |

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta::BetaValue;
use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::word::Word;

/// Longest word length that may be materialized by enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;
/// Longest word length for exact path counting.
pub const COUNT_CAP: usize = 1_000_000;

/// A one-sided shift space with a deterministic presentation.
pub trait ShiftSpace: Send + Sync {
    fn name(&self) -> String;

    fn presentation(&self) -> &Presentation;

    /// Longest word length for which answers are certified; `None` when unbounded.
    fn horizon(&self) -> Option<usize> {
        None
    }

    fn enumeration_cap(&self) -> usize {
        DEFAULT_ENUMERATION_CAP
    }

    /// Topological entropy in nats.
    fn entropy(&self) -> f64;

    /// The β of a β-shift, when known.
    fn beta_value(&self) -> Option<&BetaValue> {
        None
    }

    fn alphabet_size(&self) -> usize {
        self.presentation().alphabet_size()
    }

    fn check_horizon(&self, n: usize) -> Result<()> {
        match self.horizon() {
            Some(h) if n > h => Err(Error::HorizonExceeded { requested: n, horizon: h }),
            _ => Ok(()),
        }
    }

    fn contains(&self, v: &Word) -> Result<bool> {
        if let Some(&a) = v.symbols().iter().find(|&&a| a as usize >= self.alphabet_size()) {
            return Err(Error::InvalidInput(format!(
                "symbol {a} outside alphabet of size {}",
                self.alphabet_size()
            )));
        }
        self.check_horizon(v.len())?;
        Ok(self.presentation().accepts(v))
    }

    /// `|L_n|`.
    fn count(&self, n: usize) -> Result<BigUint> {
        self.check_horizon(n)?;
        if n > COUNT_CAP {
            return Err(Error::InvalidInput(format!("length {n} exceeds counting cap {COUNT_CAP}")));
        }
        Ok(self.presentation().count_words(n))
    }

    /// `L_n`, sorted.
    fn enumerate(&self, n: usize) -> Result<Vec<Word>> {
        if n > self.enumeration_cap() {
            return Err(Error::EnumerationCap { requested: n, cap: self.enumeration_cap() });
        }
        self.check_horizon(n)?;
        Ok(self.presentation().enumerate(n))
    }
}

/// A scale `ε = 2^-j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScaleIndex(pub usize);

impl ScaleIndex {
    pub fn new(j: usize) -> Self {
        ScaleIndex(j)
    }

    /// `j(ε) = ⌈log2(1/ε)⌉`.
    pub fn from_epsilon(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidInput(format!("scale {eps} outside (0, 1]")));
        }
        // nudge so that exact powers of two do not round up
        Ok(ScaleIndex((-eps.log2() - 1e-12).ceil().max(0.0) as usize))
    }

    pub fn epsilon(self) -> f64 {
        0.5f64.powi(self.0 as i32)
    }

    pub fn depth(self) -> usize {
        self.0
    }
}

/// The `(n + j)`-prefix of `x_prefix`: the cylinder equal to the Bowen ball
/// `B_n(x, 2^-j)`.
pub fn bowen_cylinder(x_prefix: &Word, n: usize, j: ScaleIndex) -> Result<Word> {
    let need = n + j.0;
    if x_prefix.len() < need {
        return Err(Error::PrefixTooShort { have: x_prefix.len(), need });
    }
    Ok(x_prefix.prefix(need))
}

/// A shift's presentation with its certified horizon and enumeration cap, owned
/// by collections so they do not borrow the shift.
#[derive(Clone, Debug)]
pub struct Ambient {
    pub presentation: Presentation,
    pub horizon: Option<usize>,
    pub enumeration_cap: usize,
}

impl Ambient {
    pub fn of(shift: &dyn ShiftSpace) -> Self {
        Ambient {
            presentation: shift.presentation().clone(),
            horizon: shift.horizon(),
            enumeration_cap: shift.enumeration_cap(),
        }
    }

    pub fn check_horizon(&self, n: usize) -> Result<()> {
        match self.horizon {
            Some(h) if n > h => Err(Error::HorizonExceeded { requested: n, horizon: h }),
            _ => Ok(()),
        }
    }

    pub fn enumerate(&self, n: usize) -> Result<Vec<Word>> {
        if n > self.enumeration_cap {
            return Err(Error::EnumerationCap { requested: n, cap: self.enumeration_cap });
        }
        self.check_horizon(n)?;
        Ok(self.presentation.enumerate(n))
    }

    /// Number of `(|v| + j)`-words extending `v`.
    fn extension_count(&self, v: &Word, j: usize) -> BigUint {
        self.presentation
            .run(v)
            .map_or_else(BigUint::zero, |s| self.presentation.paths_from(s, j))
    }

    /// All admissible `(|v| + j)`-words extending `v`, sorted.
    fn extensions(&self, v: &Word, j: usize) -> Vec<Word> {
        match self.presentation.run(v) {
            Some(s) => self.presentation.enumerate_from(s, j).iter().map(|t| v.concat(t)).collect(),
            None => Vec::new(),
        }
    }
}

/// A collection `D ⊂ X × ℕ` of orbit segments, described by the words
/// `x_1 .. x_n` of its members `(x, n)`.
pub trait OrbitCollection: Sync {
    fn label(&self) -> String;

    fn ambient(&self) -> &Ambient;

    /// The `n`-words of `D_n`, sorted; `None` when `D_n` is undefined.
    fn words_at(&self, n: usize) -> Result<Option<Vec<Word>>>;

    /// `Λ(D_n, n, 2^-j)`; `None` when `D_n` is undefined.
    fn count_at(&self, n: usize, j: usize) -> Result<Option<BigUint>> {
        self.ambient().check_horizon(n + j)?;
        Ok(self
            .words_at(n)?
            .map(|ws| ws.iter().map(|v| self.ambient().extension_count(v, j)).sum()))
    }

    /// `count_at(n, j)` for `n = 1..=n_max`.
    fn counts_up_to(&self, n_max: usize, j: usize) -> Result<Vec<Option<BigUint>>> {
        (1..=n_max).into_par_iter().map(|n| self.count_at(n, j)).collect()
    }

    /// The `(n + j)`-prefixes of points of `D_n`, sorted.
    fn extended_words_at(&self, n: usize, j: usize) -> Result<Option<Vec<Word>>> {
        self.ambient().check_horizon(n + j)?;
        Ok(self
            .words_at(n)?
            .map(|ws| ws.iter().flat_map(|v| self.ambient().extensions(v, j)).collect()))
    }
}

/// Members are words whose path through a (refined) presentation ends in an
/// accepting state.
#[derive(Clone, Debug)]
pub struct AutomatonCollection {
    label: String,
    ambient: Ambient,
    accepting: Vec<bool>,
    min_len: usize,
}

impl AutomatonCollection {
    /// `ambient.presentation` must present the same language as the shift.
    pub fn new(label: impl Into<String>, ambient: Ambient, accepting: Vec<bool>) -> Result<Self> {
        if accepting.len() != ambient.presentation.num_states() {
            return Err(Error::InvalidInput("accepting flags do not match the state count".into()));
        }
        Ok(AutomatonCollection { label: label.into(), ambient, accepting, min_len: 0 })
    }

    /// `X × ℕ`: every admissible word.
    pub fn whole_shift(shift: &dyn ShiftSpace) -> Self {
        let ambient = Ambient::of(shift);
        let accepting = vec![true; ambient.presentation.num_states()];
        AutomatonCollection { label: "whole shift".into(), ambient, accepting, min_len: 0 }
    }

    /// Treat `D_n` as undefined for `n < min_len`.
    pub fn with_min_len(mut self, min_len: usize) -> Self {
        self.min_len = min_len;
        self
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    fn forward_sum(&self, forward: &[BigUint], tails: &[BigUint]) -> BigUint {
        forward
            .iter()
            .zip(tails)
            .zip(&self.accepting)
            .filter(|(_, &acc)| acc)
            .map(|((f, t), _)| f * t)
            .sum()
    }
}

impl OrbitCollection for AutomatonCollection {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    fn words_at(&self, n: usize) -> Result<Option<Vec<Word>>> {
        if n < self.min_len {
            return Ok(None);
        }
        let p = &self.ambient.presentation;
        Ok(Some(
            self.ambient
                .enumerate(n)?
                .into_iter()
                .filter(|v| p.run(v).is_some_and(|s| self.accepting[s]))
                .collect(),
        ))
    }

    fn count_at(&self, n: usize, j: usize) -> Result<Option<BigUint>> {
        Ok(self.counts_range(n, n, j)?.pop().flatten())
    }

    fn counts_up_to(&self, n_max: usize, j: usize) -> Result<Vec<Option<BigUint>>> {
        self.counts_range(1, n_max, j)
    }
}

impl AutomatonCollection {
    fn counts_range(&self, from: usize, to: usize, j: usize) -> Result<Vec<Option<BigUint>>> {
        self.ambient.check_horizon(to + j)?;
        let p = &self.ambient.presentation;
        let tails = p.backward_counts(j).pop().expect("nonempty");
        let forward = p.forward_counts(to);
        Ok((from..=to)
            .map(|n| (n >= self.min_len).then(|| self.forward_sum(&forward[n], &tails)))
            .collect())
    }
}

type WordGenerator<'a> = dyn Fn(usize) -> Result<Option<Vec<Word>>> + Send + Sync + 'a;

/// Members listed per length by a generator function.
pub struct GeneratedCollection<'a> {
    label: String,
    ambient: Ambient,
    generator: Box<WordGenerator<'a>>,
}

impl<'a> GeneratedCollection<'a> {
    pub fn new(
        label: impl Into<String>,
        ambient: Ambient,
        generator: impl Fn(usize) -> Result<Option<Vec<Word>>> + Send + Sync + 'a,
    ) -> Self {
        GeneratedCollection { label: label.into(), ambient, generator: Box::new(generator) }
    }

    /// Explicit word sets; lengths absent from the map are undefined.
    /// Inadmissible words are rejected.
    pub fn from_words(label: impl Into<String>, ambient: Ambient, words: Vec<Word>) -> Result<Self> {
        let mut map: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
        for v in words {
            ambient.check_horizon(v.len())?;
            if !ambient.presentation.accepts(&v) {
                return Err(Error::NotAdmissible(v.to_string()));
            }
            map.entry(v.len()).or_default().push(v);
        }
        for ws in map.values_mut() {
            ws.sort();
            ws.dedup();
        }
        Ok(Self::new(label, ambient, move |n| Ok(map.get(&n).cloned())))
    }

    /// Admissible words satisfying `pred`, for lengths accepted by `lengths`.
    pub fn from_predicate(
        label: impl Into<String>,
        ambient: Ambient,
        lengths: impl Fn(usize) -> bool + Send + Sync + 'a,
        pred: impl Fn(&Word) -> bool + Send + Sync + 'a,
    ) -> Self {
        let inner = ambient.clone();
        Self::new(label, ambient, move |n| {
            if !lengths(n) {
                return Ok(None);
            }
            Ok(Some(inner.enumerate(n)?.into_iter().filter(|v| pred(v)).collect()))
        })
    }
}

impl OrbitCollection for GeneratedCollection<'_> {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    fn words_at(&self, n: usize) -> Result<Option<Vec<Word>>> {
        (self.generator)(n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatedCount {
    pub count: BigUint,
    /// Set when `D_n` is undefined and the count was taken as 0.
    pub warning: Option<String>,
}

/// `Λ(D_n, n, 2^-j)`: the number of distinct `(n + j)`-prefixes of `D_n`.
pub fn count_separated(d: &dyn OrbitCollection, n: usize, j: ScaleIndex) -> Result<SeparatedCount> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    Ok(match d.count_at(n, j.0)? {
        Some(count) => SeparatedCount { count, warning: None },
        None => SeparatedCount {
            count: BigUint::zero(),
            warning: Some(format!("{}: D_{n} is undefined; counted as empty", d.label())),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    Regression,
    LimsupTail,
    LiminfTail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    /// Nats per symbol; finite and non-negative.
    pub rate: f64,
    /// `(n, log Λ)` for every `n` with a nonzero count.
    pub samples: Vec<(usize, f64)>,
    pub method: EstimateMethod,
    pub depth: ScaleIndex,
    /// First `n` of the tail window (the last half of `1..=n_max`).
    pub window_start: usize,
    /// Least-squares slope of `log Λ` against `n` over the tail window.
    pub regression: f64,
    /// `max (1/n) log Λ` over the tail window.
    pub tail_sup: f64,
    /// `min (1/n) log Λ` over the tail window; 0 when some `D_n` is empty there.
    pub tail_inf: f64,
    /// Lengths with `Λ = 0` or undefined `D_n`.
    pub empty_lengths: Vec<usize>,
}

impl EntropyEstimate {
    /// `max (1/n) log Λ` over `n >= start`; nonincreasing in `start`.
    pub fn tail_sup_from(&self, start: usize) -> f64 {
        self.samples
            .iter()
            .filter(|(n, _)| *n >= start)
            .map(|(n, l)| l / *n as f64)
            .fold(0.0, f64::max)
    }
}

/// Natural logarithm of a positive big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Estimates built from counts at `n = 1..=n_max`.
pub fn entropy_from_counts(counts: &[Option<BigUint>], j: ScaleIndex, lower: bool) -> Result<EntropyEstimate> {
    let n_max = counts.len();
    if n_max < 8 {
        return Err(Error::InvalidInput(format!("n_max = {n_max} is below the minimum of 8")));
    }
    let mut samples = Vec::new();
    let mut empty_lengths = Vec::new();
    for (i, c) in counts.iter().enumerate() {
        let n = i + 1;
        match c {
            Some(c) if !c.is_zero() => samples.push((n, ln_big(c))),
            _ => empty_lengths.push(n),
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptyCollection);
    }
    let window_start = (n_max / 2).max(1);
    let window: Vec<(usize, f64)> = samples.iter().copied().filter(|(n, _)| *n >= window_start).collect();
    let gap_in_window = empty_lengths.iter().any(|&n| n >= window_start);
    let per_symbol: Vec<f64> = window.iter().map(|(n, l)| l / *n as f64).collect();
    let tail_sup = per_symbol.iter().copied().fold(0.0, f64::max);
    let tail_inf = if gap_in_window || per_symbol.is_empty() {
        0.0
    } else {
        per_symbol.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let points: Vec<(f64, f64)> = window.iter().map(|&(n, l)| (n as f64, l)).collect();
    let regression = slope(&points).unwrap_or(tail_sup).max(0.0);
    // a slope of 1e-17 from rounding is reported as 0
    let regression = if regression < 1e-12 { 0.0 } else { regression };
    let rate = if lower && gap_in_window { 0.0 } else { regression };
    Ok(EntropyEstimate {
        rate,
        samples,
        method: EstimateMethod::Regression,
        depth: j,
        window_start,
        regression,
        tail_sup,
        tail_inf,
        empty_lengths,
    })
}

/// `h̄(D, 2^-j)` estimated from `n = 1..=n_max`.
pub fn upper_entropy(d: &dyn OrbitCollection, j: ScaleIndex, n_max: usize) -> Result<EntropyEstimate> {
    if n_max < 8 {
        return Err(Error::InvalidInput(format!("n_max = {n_max} is below the minimum of 8")));
    }
    entropy_from_counts(&d.counts_up_to(n_max, j.0)?, j, false)
}

/// `h(D, 2^-j)` (lower) estimated from `n = 1..=n_max`: 0 when `D_n` is empty
/// for some `n` in the tail window.
pub fn lower_entropy(d: &dyn OrbitCollection, j: ScaleIndex, n_max: usize) -> Result<EntropyEstimate> {
    if n_max < 8 {
        return Err(Error::InvalidInput(format!("n_max = {n_max} is below the minimum of 8")));
    }
    entropy_from_counts(&d.counts_up_to(n_max, j.0)?, j, true)
}
