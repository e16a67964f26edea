//! Deterministic labeled graphs with a distinguished start state.
//!
//! Every shift handled by this crate is presented by such a graph: the
//! language is exactly the set of labels of paths leaving the start state.
//! Because the graph is deterministic, distinct words are distinct paths and
//! word counts are path counts.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qfield::gcd_usize;
use crate::word::{Symbol, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    alphabet_size: usize,
    start: usize,
    next: Vec<Vec<Option<usize>>>,
}

impl Presentation {
    pub fn new(alphabet_size: usize, start: usize, next: Vec<Vec<Option<usize>>>) -> Result<Self> {
        if start >= next.len() {
            return Err(Error::InvalidInput(format!(
                "start state {start} out of range ({} states)",
                next.len()
            )));
        }
        for (s, row) in next.iter().enumerate() {
            if row.len() != alphabet_size {
                return Err(Error::InvalidInput(format!(
                    "state {s} has {} transition slots, expected {alphabet_size}",
                    row.len()
                )));
            }
            if let Some(t) = row.iter().flatten().find(|&&t| t >= next.len()) {
                return Err(Error::InvalidInput(format!("edge {s} -> {t} leaves the state set")));
            }
        }
        Ok(Presentation { alphabet_size, start, next })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn num_states(&self) -> usize {
        self.next.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    #[inline]
    pub fn step(&self, state: usize, symbol: Symbol) -> Option<usize> {
        self.next
            .get(state)
            .and_then(|row| row.get(symbol as usize))
            .copied()
            .flatten()
    }

    pub fn run_from(&self, state: usize, symbols: &[Symbol]) -> Option<usize> {
        symbols.iter().try_fold(state, |s, &a| self.step(s, a))
    }

    pub fn run(&self, word: &Word) -> Option<usize> {
        self.run_from(self.start, word.symbols())
    }

    pub fn accepts(&self, word: &Word) -> bool {
        self.run(word).is_some()
    }

    /// `(from, symbol, to)` triples in state-then-symbol order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, Symbol, usize)> + '_ {
        self.next.iter().enumerate().flat_map(|(s, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(a, t)| t.map(|t| (s, a as Symbol, t)))
        })
    }

    /// Edge multiplicities `A[s][t]`.
    pub fn adjacency(&self) -> Vec<Vec<u64>> {
        let n = self.num_states();
        let mut a = vec![vec![0u64; n]; n];
        for (s, _, t) in self.edges() {
            a[s][t] += 1;
        }
        a
    }

    /// `F[k][s]`: number of words of length `k` leading from the start to `s`,
    /// for `k = 0..=n`.
    pub fn forward_counts(&self, n: usize) -> Vec<Vec<BigUint>> {
        let mut init = vec![BigUint::zero(); self.num_states()];
        init[self.start] = BigUint::one();
        self.forward_counts_from(init, n)
    }

    pub fn forward_counts_from(&self, init: Vec<BigUint>, n: usize) -> Vec<Vec<BigUint>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(init);
        for k in 0..n {
            let cur = &out[k];
            let mut nxt = vec![BigUint::zero(); self.num_states()];
            for (s, _, t) in self.edges() {
                if !cur[s].is_zero() {
                    nxt[t] += &cur[s];
                }
            }
            out.push(nxt);
        }
        out
    }

    /// `B[m][s]`: number of words of length `m` readable from `s`, `m = 0..=n`.
    pub fn backward_counts(&self, n: usize) -> Vec<Vec<BigUint>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(vec![BigUint::one(); self.num_states()]);
        for m in 0..n {
            let cur = &out[m];
            let mut nxt = vec![BigUint::zero(); self.num_states()];
            for (s, _, t) in self.edges() {
                nxt[s] += &cur[t];
            }
            out.push(nxt);
        }
        out
    }

    /// Number of words of length `n` readable from `state`.
    pub fn paths_from(&self, state: usize, n: usize) -> BigUint {
        let mut cur = vec![BigUint::one(); self.num_states()];
        for _ in 0..n {
            let mut nxt = vec![BigUint::zero(); self.num_states()];
            for (s, _, t) in self.edges() {
                nxt[s] += &cur[t];
            }
            cur = nxt;
        }
        cur.swap_remove(state)
    }

    /// `|L_n|`, the number of words of length `n`.
    pub fn count_words(&self, n: usize) -> BigUint {
        self.paths_from(self.start, n)
    }

    /// Words of length `n` readable from `state`, lexicographically sorted.
    pub fn enumerate_from(&self, state: usize, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(n);
        self.dfs(state, n, &mut buf, &mut out);
        out
    }

    pub fn enumerate(&self, n: usize) -> Vec<Word> {
        self.enumerate_from(self.start, n)
    }

    fn dfs(&self, state: usize, remaining: usize, buf: &mut Vec<Symbol>, out: &mut Vec<Word>) {
        if remaining == 0 {
            out.push(Word::new(buf.clone()));
            return;
        }
        for a in 0..self.alphabet_size {
            if let Some(t) = self.step(state, a as Symbol) {
                buf.push(a as Symbol);
                self.dfs(t, remaining - 1, buf, out);
                buf.pop();
            }
        }
    }

    /// Canonical continuation: from `state`, repeatedly follow the smallest
    /// symbol that has an edge. Returns the first `len` symbols.
    pub fn canonical_tail(&self, state: usize, len: usize) -> Option<Word> {
        let mut s = state;
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let (a, t) = (0..self.alphabet_size)
                .find_map(|a| self.step(s, a as Symbol).map(|t| (a as Symbol, t)))?;
            out.push(a);
            s = t;
        }
        Some(Word::new(out))
    }

    pub fn reachable_from(&self, state: usize) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([state]);
        seen[state] = true;
        while let Some(s) = queue.pop_front() {
            for t in self.next[s].iter().flatten() {
                if !seen[*t] {
                    seen[*t] = true;
                    queue.push_back(*t);
                }
            }
        }
        seen
    }

    /// True when every state reaches every other state.
    pub fn is_irreducible(&self) -> bool {
        (0..self.num_states()).all(|s| self.reachable_from(s).iter().all(|&r| r))
    }

    /// Period of an irreducible graph: gcd of all cycle lengths.
    pub fn period(&self) -> usize {
        // BFS levels from state 0; period = gcd of level(s) + 1 - level(t) over edges.
        let n = self.num_states();
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(s) = queue.pop_front() {
            for t in self.next[s].iter().flatten() {
                if level[*t] == usize::MAX {
                    level[*t] = level[s] + 1;
                    queue.push_back(*t);
                }
            }
        }
        let mut g = 0usize;
        for (s, _, t) in self.edges() {
            if level[s] != usize::MAX && level[t] != usize::MAX {
                let diff = (level[s] as i64 + 1 - level[t] as i64).unsigned_abs() as usize;
                g = gcd_usize(g, diff);
            }
        }
        g
    }

    /// Irreducible and aperiodic.
    pub fn is_primitive(&self) -> bool {
        self.is_irreducible() && self.period() == 1
    }

    /// CSV edge list `state,symbol,state` with a header line.
    pub fn edge_list_csv(&self) -> String {
        let mut s = String::from("state,symbol,state\n");
        for (from, a, to) in self.edges() {
            s.push_str(&format!("{from},{a},{to}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> Presentation {
        Presentation::new(2, 0, vec![vec![Some(0), Some(1)], vec![Some(0), None]]).unwrap()
    }

    #[test]
    fn fibonacci_counts() {
        let g = golden();
        let counts: Vec<u64> = (1..=6)
            .map(|n| g.count_words(n).try_into().unwrap())
            .collect();
        assert_eq!(counts, [2, 3, 5, 8, 13, 21]);
        let f = g.forward_counts(4);
        let total: BigUint = f[4].iter().sum();
        assert_eq!(total, BigUint::from(8u32));
    }

    #[test]
    fn enumeration_sorted_and_matches_count() {
        let g = golden();
        let words = g.enumerate(4);
        assert_eq!(words.len(), 8);
        assert!(words.windows(2).all(|w| w[0] < w[1]));
        assert!(words.iter().all(|w| !w.render(2).contains("11")));
    }

    #[test]
    fn primitivity() {
        assert!(golden().is_primitive());
        let cycle = Presentation::new(1, 0, vec![vec![Some(1)], vec![Some(0)]]).unwrap();
        assert!(cycle.is_irreducible());
        assert_eq!(cycle.period(), 2);
        assert!(!cycle.is_primitive());
    }

    #[test]
    fn canonical_tail_takes_smallest_symbol() {
        let g = golden();
        assert_eq!(g.canonical_tail(1, 3).unwrap(), Word::from_digits("000"));
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Presentation::new(1, 0, vec![vec![Some(3)]]).is_err());
        assert!(Presentation::new(2, 0, vec![vec![Some(0)]]).is_err());
    }
}
