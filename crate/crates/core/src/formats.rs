//! Text formats: word files, expansion files, block codes, measures, and CSV
//! emitters.
//!
//! Words are written as concatenated decimal digits when the alphabet has at
//! most ten symbols and as space-separated integers otherwise. Lines starting
//! with `#` and blank lines are ignored by every parser.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::beta::{beta_from_digits, parse_beta, BetaExpansion, BetaValue, Certificate, Tail};
use crate::error::{Error, Result};
use crate::factors::BlockCode;
use crate::mme::{CylinderMeasure, Mass, Provenance};
use crate::word::{Symbol, Word};

/// Bits used to pin down β from the digits of an expansion file.
pub const EXPANSION_FILE_BITS: u32 = 128;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses one word: digits, or integers separated by whitespace.
pub fn parse_word(s: &str) -> Result<Word> {
    let s = s.trim();
    if s.split_whitespace().count() > 1 {
        return s
            .split_whitespace()
            .map(|t| t.parse::<Symbol>().map_err(|_| Error::InvalidInput(format!("bad symbol {t:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(Word::new);
    }
    if s == "ε" || s == "-" {
        return Ok(Word::empty());
    }
    s.chars()
        .map(|c| c.to_digit(10).map(|d| d as Symbol).ok_or_else(|| Error::InvalidInput(format!("bad symbol {c:?}"))))
        .collect::<Result<Vec<_>>>()
        .map(Word::new)
}

/// Word file: one word per line. An `alphabet=<k>` header with `k > 10`
/// makes every line a list of whitespace-separated integers, so a single
/// symbol such as `10` is not read as two digits.
pub fn parse_word_file(text: &str) -> Result<Vec<Word>> {
    let mut integers = false;
    let mut words = Vec::new();
    for (line, l) in content_lines(text) {
        if let Some(k) = l.strip_prefix("alphabet=") {
            let k: usize = k.trim().parse().map_err(|_| parse_err(line, format!("bad alphabet size {k:?}")))?;
            integers = k > 10;
            continue;
        }
        let word = if integers && l != "-" && l != "ε" {
            l.split_whitespace()
                .map(|t| t.parse::<Symbol>().map_err(|_| parse_err(line, format!("bad symbol {t:?}"))))
                .collect::<Result<Vec<_>>>()
                .map(Word::new)?
        } else {
            parse_word(l).map_err(|e| parse_err(line, e.to_string()))?
        };
        words.push(word);
    }
    Ok(words)
}

pub fn write_word_file(words: &[Word], alphabet_size: usize) -> String {
    let header = if alphabet_size > 10 { format!("alphabet={alphabet_size}\n") } else { String::new() };
    words.iter().fold(header, |mut out, w| {
        let _ = writeln!(out, "{}", if w.is_empty() { "-".to_string() } else { w.render(alphabet_size) });
        out
    })
}

/// Expansion of 1 read from a file: digit lines plus optional headers
/// `period=<p>` (the last `p` digits repeat forever), `tail=finite` and
/// `beta=<literal>`. Without `period` or `tail` the digits are a truncation.
/// β is recovered from the digits when no `beta` header is given.
pub fn parse_expansion_file(text: &str) -> Result<BetaExpansion> {
    let mut digits = Vec::new();
    let mut period = None;
    let mut finite = false;
    let mut beta = None;
    for (line, l) in content_lines(text) {
        if let Some((key, value)) = l.split_once('=') {
            match key.trim() {
                "period" => {
                    let p: usize = value.trim().parse().map_err(|_| parse_err(line, "period must be an integer"))?;
                    period = Some(p);
                }
                "tail" if value.trim() == "finite" => finite = true,
                "beta" => beta = Some(parse_beta(value.trim()).map_err(|e| parse_err(line, e.to_string()))?),
                other => return Err(parse_err(line, format!("unknown header {other:?}"))),
            }
        } else {
            digits.extend_from_slice(parse_word(l).map_err(|e| parse_err(line, e.to_string()))?.symbols());
        }
    }
    if digits.is_empty() {
        return Err(parse_err(0, "no digits"));
    }
    let tail = match (period, finite) {
        (Some(_), true) => return Err(parse_err(0, "period and tail=finite are exclusive")),
        (Some(p), false) => {
            if p == 0 || p > digits.len() {
                return Err(parse_err(0, format!("period {p} out of range for {} digits", digits.len())));
            }
            Tail::EventuallyPeriodic { preperiod: digits.len() - p, period: p }
        }
        (None, true) => Tail::Finite,
        (None, false) => Tail::Truncated { horizon: digits.len(), certificate: Certificate::Supplied },
    };
    let beta = match beta {
        Some(b) => b,
        None => beta_from_digits(&digits, &tail, EXPANSION_FILE_BITS)?,
    };
    BetaExpansion::new(digits, tail, beta)
}

pub fn write_expansion_file(e: &BetaExpansion) -> String {
    // an enclosure recovered from exact digits is recovered again on reading
    let recoverable = matches!(e.beta(), BetaValue::Interval { .. }) && !matches!(e.tail(), Tail::Truncated { .. });
    let mut out = if recoverable { String::new() } else { format!("beta={}\n", beta_literal(e.beta())) };
    match e.tail() {
        Tail::EventuallyPeriodic { period, .. } => {
            let _ = writeln!(out, "period={period}");
        }
        Tail::Finite => out.push_str("tail=finite\n"),
        Tail::Truncated { .. } => {}
    }
    let size = e.digits().iter().max().map_or(2, |&d| d as usize + 1);
    let _ = writeln!(out, "{}", Word::new(e.digits().to_vec()).render(size));
    out
}

/// A literal that `parse_beta` maps back to the same value.
pub fn beta_literal(b: &BetaValue) -> String {
    match b {
        BetaValue::Exact(q) => {
            let (a, s) = (q.rational_part(), q.surd_part());
            if q.is_rational() {
                format!("({a})")
            } else {
                format!("({a})+({s})*sqrt({})", q.radicand())
            }
        }
        // an enclosure has no literal; its midpoint, marked approximate
        BetaValue::Interval { lo, hi } => {
            let mid: BigRational = (lo + hi) / BigInt::from(2);
            format!("~{}", decimal(&mid, 40))
        }
    }
}

fn decimal(r: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10).pow(places as u32);
    let scaled = (r * BigRational::from_integer(scale.clone())).round().to_integer();
    let (int, frac) = (&scaled / &scale, (&scaled % &scale).abs());
    format!("{int}.{frac:0>places$}")
}

/// Block code file: one line per block, `block -> symbol`. Output symbols
/// that are all integers keep their values; otherwise labels are numbered in
/// sorted order.
pub fn parse_block_code(text: &str) -> Result<BlockCode> {
    let mut entries: Vec<(usize, Word, String)> = Vec::new();
    for (line, l) in content_lines(text) {
        let (block, symbol) = l.split_once("->").ok_or_else(|| parse_err(line, "expected `block -> symbol`"))?;
        let block = parse_word(block).map_err(|e| parse_err(line, e.to_string()))?;
        let symbol = symbol.trim();
        if symbol.is_empty() || symbol.contains(char::is_whitespace) {
            return Err(parse_err(line, "output symbol must be a single token"));
        }
        entries.push((line, block, symbol.to_string()));
    }
    if entries.is_empty() {
        return Err(parse_err(0, "no rules"));
    }
    let numeric: Option<Vec<Symbol>> = entries.iter().map(|(_, _, s)| s.parse::<Symbol>().ok()).collect();
    let labels: Vec<String> = match &numeric {
        Some(values) => (0..=*values.iter().max().expect("nonempty")).map(|v| v.to_string()).collect(),
        None => {
            let mut l: Vec<String> = entries.iter().map(|(_, _, s)| s.clone()).collect();
            l.sort();
            l.dedup();
            l
        }
    };
    if labels.len() > Symbol::MAX as usize + 1 {
        return Err(parse_err(0, "too many output symbols"));
    }
    let mut rule = BTreeMap::new();
    for (i, (line, block, s)) in entries.iter().enumerate() {
        let out = match &numeric {
            Some(values) => values[i],
            None => labels.binary_search(s).expect("collected") as Symbol,
        };
        if let Some(prev) = rule.insert(block.clone(), out) {
            if prev != out {
                return Err(parse_err(*line, format!("block {block} mapped twice")));
            }
        }
    }
    let input_size = rule.keys().flat_map(|b| b.symbols().iter().copied()).max().map_or(1, |m| m as usize + 1);
    BlockCode::new(input_size, rule, labels).map_err(|e| parse_err(0, e.to_string()))
}

pub fn write_block_code(code: &BlockCode) -> String {
    let size = code.input_size();
    code.rules().iter().fold(String::new(), |mut out, (b, &s)| {
        let _ = writeln!(out, "{} -> {}", b.render(size), code.labels()[s as usize]);
        out
    })
}

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    depth: usize,
    alphabet_size: usize,
    entries: Vec<MeasureEntry>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureEntry {
    word: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_num: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_den: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_float: Option<f64>,
    /// Exact value in a quadratic field, informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_exact: Option<String>,
}

/// Tolerance on normalization and consistency for float masses read from a file.
pub const MEASURE_FILE_TOLERANCE: f64 = 1e-9;

/// `{depth, alphabet_size, entries: [{word, mass_num, mass_den | mass_float}], provenance}`.
pub fn measure_to_json(m: &CylinderMeasure) -> String {
    let entries = m
        .table()
        .iter()
        .map(|(w, mass)| {
            let word = w.render(m.alphabet_size());
            match mass {
                Mass::Rational(r) => MeasureEntry {
                    word,
                    mass_num: Some(r.numer().to_string()),
                    mass_den: Some(r.denom().to_string()),
                    mass_float: None,
                    mass_exact: None,
                },
                Mass::Quadratic(q) => MeasureEntry {
                    word,
                    mass_num: None,
                    mass_den: None,
                    mass_float: Some(q.to_f64()),
                    mass_exact: Some(q.to_string()),
                },
                Mass::Float(x) => {
                    MeasureEntry { word, mass_num: None, mass_den: None, mass_float: Some(*x), mass_exact: None }
                }
            }
        })
        .collect();
    let file = MeasureFile { depth: m.depth(), alphabet_size: m.alphabet_size(), entries, provenance: m.provenance().clone() };
    serde_json::to_string_pretty(&file).expect("measure serializes")
}

/// Reads a measure and checks that it is a consistent cylinder measure.
pub fn measure_from_json(text: &str) -> Result<CylinderMeasure> {
    let file: MeasureFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if file.alphabet_size == 0 || file.alphabet_size > Symbol::MAX as usize + 1 {
        return Err(Error::Schema(format!("alphabet size {} out of range", file.alphabet_size)));
    }
    let mut table = BTreeMap::new();
    for e in file.entries {
        let word = if e.word.is_empty() { Word::empty() } else { parse_word(&e.word).map_err(|x| Error::Schema(x.to_string()))? };
        let mass = match (e.mass_num, e.mass_den, e.mass_float) {
            (Some(n), Some(d), None) => {
                let n: BigInt = n.parse().map_err(|_| Error::Schema(format!("bad numerator for {}", e.word)))?;
                let d: BigUint = d.parse().map_err(|_| Error::Schema(format!("bad denominator for {}", e.word)))?;
                if d.is_zero() || n.is_negative() {
                    return Err(Error::Schema(format!("mass of {} is not a probability", e.word)));
                }
                Mass::Rational(BigRational::new(n, BigInt::from(d)))
            }
            (None, None, Some(x)) => {
                if !(x.is_finite() && x >= 0.0) {
                    return Err(Error::Schema(format!("mass of {} is not a probability", e.word)));
                }
                Mass::Float(x)
            }
            _ => return Err(Error::Schema(format!("entry {} needs mass_num and mass_den, or mass_float", e.word))),
        };
        if table.insert(word, mass).is_some() {
            return Err(Error::Schema(format!("word {} listed twice", e.word)));
        }
    }
    let m = CylinderMeasure::new(file.depth, file.alphabet_size, table, file.provenance)?;
    let norm = m.normalization_error();
    if norm > MEASURE_FILE_TOLERANCE {
        return Err(Error::Schema(format!("masses do not sum to 1 (off by {norm:e})")));
    }
    let cons = m.extension_error(false);
    if cons > MEASURE_FILE_TOLERANCE {
        return Err(Error::Schema(format!("masses are not consistent under extension (off by {cons:e})")));
    }
    Ok(m)
}

/// `n,count` rows.
pub fn counts_csv(counts: &[(usize, BigUint)]) -> String {
    counts.iter().fold(String::from("n,count\n"), |mut out, (n, c)| {
        let _ = writeln!(out, "{n},{c}");
        out
    })
}

/// `n,j,count` rows; absent counts are left empty.
pub fn scaled_counts_csv(j: usize, counts: &[Option<BigUint>]) -> String {
    counts.iter().enumerate().fold(String::from("n,j,count\n"), |mut out, (n, c)| {
        let _ = writeln!(out, "{n},{j},{}", c.as_ref().map(|c| c.to_string()).unwrap_or_default());
        out
    })
}

/// `n,word,mass` rows for every entry of a measure.
pub fn measure_csv(m: &CylinderMeasure) -> String {
    m.table().iter().fold(String::from("n,word,mass\n"), |mut out, (w, mass)| {
        let _ = writeln!(out, "{},{},{:.17e}", w.len(), w.render(m.alphabet_size()), mass.to_f64());
        out
    })
}
