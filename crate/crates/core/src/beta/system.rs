//! The β-shift as a language with a follower automaton.

use num_bigint::BigUint;

use super::expansion::{greedy_expansion, quasi_greedy, BetaExpansion, PrecisionPolicy, Tail};
use super::number::BetaValue;
use crate::error::{Error, Result};
use crate::presentation::Presentation;
use crate::symbolic::{ShiftSpace, DEFAULT_ENUMERATION_CAP};
use crate::word::{Symbol, Word};

/// Digits requested from the greedy iteration when nothing else is specified.
pub const DEFAULT_EXPANSION_DIGITS: usize = 64;

/// A β-shift: sequences `z` with `σ^n z ⪯ w` for every `n`, where `w` is the
/// quasi-greedy expansion of 1.
///
/// Automaton state `k` means the word read so far ends in `w_1 .. w_k` and in
/// no longer prefix of `w`. Reading `a` from state `k` moves to `0` when
/// `a < w_{k+1}`, to `k + 1` when `a = w_{k+1}`, and is forbidden otherwise.
/// For eventually periodic `w = u v^∞` the states `|u| + |v|` and `|u|` have
/// identical futures and are merged; for truncated `w` the last state has no
/// outgoing edges and marks the end of the certified horizon.
#[derive(Clone, Debug)]
pub struct BetaSystem {
    greedy: BetaExpansion,
    w: BetaExpansion,
    alphabet_size: usize,
    automaton: Presentation,
    enumeration_cap: usize,
}

impl BetaSystem {
    /// Builds the shift from an expansion of 1 (greedy or already
    /// quasi-greedy).
    pub fn from_expansion(expansion: BetaExpansion) -> Result<Self> {
        let w = quasi_greedy(&expansion);
        let top = w.digits()[0];
        if top == 0 {
            return Err(Error::InvalidInput("first digit of w must be at least 1".into()));
        }
        if !w.is_self_admissible(2 * w.digits().len() + 2) {
            return Err(Error::InvalidInput(format!(
                "expansion {} is not self-admissible (some shift exceeds it)",
                w.render()
            )));
        }
        let alphabet_size = top as usize + 1;
        let automaton = follower_automaton(&w, alphabet_size)?;
        Ok(BetaSystem {
            greedy: expansion,
            w,
            alphabet_size,
            automaton,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    /// Expands 1 in base `beta` to at most `digits` digits and builds the shift.
    pub fn from_beta(beta: &BetaValue, digits: usize, policy: &PrecisionPolicy) -> Result<Self> {
        Self::from_expansion(greedy_expansion(beta, digits, policy)?)
    }

    pub fn golden_mean() -> Self {
        Self::from_beta(&BetaValue::golden(), 8, &PrecisionPolicy::default()).expect("golden mean")
    }

    /// The full shift on `k` symbols (integer β = k).
    pub fn full_shift(k: u32) -> Self {
        Self::from_beta(&BetaValue::integer(k), 4, &PrecisionPolicy::default()).expect("full shift")
    }

    pub fn with_enumeration_cap(mut self, cap: usize) -> Self {
        self.enumeration_cap = cap;
        self
    }

    pub fn beta(&self) -> &BetaValue {
        self.w.beta()
    }

    /// The expansion this system was built from.
    pub fn greedy(&self) -> &BetaExpansion {
        &self.greedy
    }

    /// The quasi-greedy expansion `w` defining the shift.
    pub fn expansion(&self) -> &BetaExpansion {
        &self.w
    }

    /// `w_{i+1}` (0-based index `i`), `None` past a truncation horizon.
    pub fn w_digit(&self, i: usize) -> Option<Symbol> {
        self.w.digit(i)
    }

    pub fn w_prefix(&self, n: usize) -> Result<Word> {
        self.check_horizon(n)?;
        Ok(Word::new(self.w.prefix(n)))
    }

    pub fn automaton(&self) -> &Presentation {
        &self.automaton
    }

    /// `(preperiod, period)` of `w` when it is eventually periodic.
    pub fn period_structure(&self) -> Option<(usize, usize)> {
        match *self.w.tail() {
            Tail::EventuallyPeriodic { preperiod, period } => Some((preperiod, period)),
            _ => None,
        }
    }

    /// Automaton state for an unbounded match length.
    pub fn fold(&self, k: usize) -> usize {
        match self.period_structure() {
            Some((p, q)) if k >= p + q => p + (k - p) % q,
            _ => k,
        }
    }

    /// Length of the longest suffix of `v` that is a prefix of `w`, or `None`
    /// when `v` is not admissible.
    pub fn match_length(&self, v: &Word) -> Result<Option<usize>> {
        self.check_word(v)?;
        let mut k = 0usize;
        for &a in v.symbols() {
            let d = self.w.digit(k).ok_or(Error::HorizonExceeded {
                requested: v.len(),
                horizon: self.w.digits().len(),
            })?;
            if a < d {
                k = 0;
            } else if a == d {
                k += 1;
            } else {
                return Ok(None);
            }
        }
        Ok(Some(k))
    }

    pub fn is_in_language(&self, v: &Word) -> Result<bool> {
        self.contains(v)
    }

    /// Exactly the admissible words of length `n`, sorted.
    pub fn enumerate_language(&self, n: usize) -> Result<Vec<Word>> {
        self.enumerate(n)
    }

    /// `|L_n|` by path counting.
    pub fn count_language(&self, n: usize) -> Result<BigUint> {
        self.count(n)
    }

    fn check_word(&self, v: &Word) -> Result<()> {
        if let Some(&a) = v.symbols().iter().find(|&&a| a as usize >= self.alphabet_size) {
            return Err(Error::InvalidInput(format!(
                "symbol {a} outside alphabet of size {}",
                self.alphabet_size
            )));
        }
        self.check_horizon(v.len())
    }
}

fn follower_automaton(w: &BetaExpansion, alphabet_size: usize) -> Result<Presentation> {
    let (states, wrap) = match *w.tail() {
        Tail::EventuallyPeriodic { preperiod, period } => (preperiod + period, Some(preperiod)),
        Tail::Truncated { horizon, .. } => (horizon + 1, None),
        Tail::Finite => unreachable!("quasi-greedy expansions are infinite"),
    };
    let mut next = vec![vec![None; alphabet_size]; states];
    for (k, row) in next.iter_mut().enumerate() {
        let Some(d) = w.digit(k) else { continue };
        for (a, slot) in row.iter_mut().enumerate() {
            let a = a as Symbol;
            *slot = if a < d {
                Some(0)
            } else if a == d {
                Some(if k + 1 == states { wrap.unwrap_or(k + 1) } else { k + 1 })
            } else {
                None
            };
        }
    }
    Presentation::new(alphabet_size, 0, next)
}

impl ShiftSpace for BetaSystem {
    fn name(&self) -> String {
        format!("beta-shift w={}", self.w.render())
    }

    fn presentation(&self) -> &Presentation {
        &self.automaton
    }

    fn horizon(&self) -> Option<usize> {
        self.w.horizon()
    }

    fn enumeration_cap(&self) -> usize {
        self.enumeration_cap
    }

    fn entropy(&self) -> f64 {
        self.beta().ln()
    }

    fn beta_value(&self) -> Option<&BetaValue> {
        Some(self.beta())
    }
}
