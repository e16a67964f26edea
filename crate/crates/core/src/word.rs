//! Finite words over a small integer alphabet.

use std::fmt;

use serde::{Deserialize, Serialize};

pub type Symbol = u8;

/// A finite word. Symbols are alphabet indices; the empty word is allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// `symbol` repeated `n` times.
    pub fn repeat(symbol: Symbol, n: usize) -> Self {
        Word(vec![symbol; n])
    }

    /// Parses a string of decimal digits, e.g. `"10100"`.
    ///
    /// Panics on non-digit characters; use [`crate::formats::parse_word`] for
    /// untrusted input.
    pub fn from_digits(s: &str) -> Self {
        Word(
            s.chars()
                .map(|c| c.to_digit(10).expect("digit") as Symbol)
                .collect(),
        )
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word(self.0[start.min(self.0.len())..].to_vec())
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn max_symbol(&self) -> Option<Symbol> {
        self.0.iter().copied().max()
    }

    /// Text form: concatenated digits when `alphabet_size <= 10`, otherwise
    /// space-separated integers.
    pub fn render(&self, alphabet_size: usize) -> String {
        if alphabet_size <= 10 {
            self.0.iter().map(|s| char::from(b'0' + s)).collect()
        } else {
            self.0
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        }
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(v: &[Symbol]) -> Self {
        Word(v.to_vec())
    }
}

impl std::ops::Index<usize> for Word {
    type Output = Symbol;
    fn index(&self, i: usize) -> &Symbol {
        &self.0[i]
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alphabet = self.max_symbol().map_or(0, |m| m as usize + 1);
        f.write_str(&self.render(alphabet))
    }
}

/// All words of length `n` over `{0, .., alphabet_size - 1}`, lexicographic.
pub fn all_words(alphabet_size: usize, n: usize) -> impl Iterator<Item = Word> {
    let total = (alphabet_size as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    (0..total).map(move |mut idx| {
        let mut v = vec![0 as Symbol; n];
        for slot in v.iter_mut().rev() {
            *slot = (idx % alphabet_size as u128) as Symbol;
            idx /= alphabet_size as u128;
        }
        Word(v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_small_and_large_alphabets() {
        let w = Word::new(vec![1, 0, 1]);
        assert_eq!(w.render(2), "101");
        assert_eq!(Word::new(vec![11, 3]).render(12), "11 3");
        assert_eq!(Word::empty().render(2), "");
    }

    #[test]
    fn all_words_is_lexicographic() {
        let ws: Vec<_> = all_words(2, 2).map(|w| w.render(2)).collect();
        assert_eq!(ws, ["00", "01", "10", "11"]);
        assert_eq!(all_words(3, 0).count(), 1);
    }
}
