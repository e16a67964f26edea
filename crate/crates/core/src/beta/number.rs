//! Values of β: exact elements of a quadratic field, or rational intervals
//! for approximately known reals.
//!
//! Accepted literal syntax (see [`parse_beta`]):
//!
//! | form | meaning |
//! |------|---------|
//! | `1.5`, `3/2`, `2` | exact rational |
//! | `phi`, `golden` | `(1+sqrt(5))/2` |
//! | `(1+sqrt(5))/2`, `1+sqrt(2)` | exact quadratic irrational |
//! | `~1.8392867552` | real known to ±½ unit in the last decimal place |

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::qfield::{rat, rational_to_f64, Quadratic};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BetaValue {
    Exact(Quadratic),
    /// A real known only to lie in `[lo, hi]`.
    Interval { lo: BigRational, hi: BigRational },
}

impl BetaValue {
    pub fn exact(q: Quadratic) -> Self {
        BetaValue::Exact(q)
    }

    pub fn integer(n: u32) -> Self {
        BetaValue::Exact(Quadratic::from_int(n as i64))
    }

    pub fn golden() -> Self {
        BetaValue::Exact(golden_ratio())
    }

    pub fn as_exact(&self) -> Option<&Quadratic> {
        match self {
            BetaValue::Exact(q) => Some(q),
            BetaValue::Interval { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            BetaValue::Exact(q) => q.to_f64(),
            BetaValue::Interval { lo, hi } => (rational_to_f64(lo) + rational_to_f64(hi)) / 2.0,
        }
    }

    pub fn ln(&self) -> f64 {
        self.to_f64().ln()
    }

    /// Exact integer value, if β is an integer.
    pub fn as_integer(&self) -> Option<u64> {
        let q = self.as_exact()?;
        let r = q.as_rational()?;
        r.is_integer().then(|| r.to_integer().try_into().ok()).flatten()
    }

    /// Digits used by the shift: `{0, .., ceil(β) - 1}`.
    pub fn alphabet_size(&self) -> Result<usize> {
        let ceil = match self {
            BetaValue::Exact(q) => {
                let f = q.floor();
                if q.is_rational() && q.as_rational().is_some_and(|r| r.is_integer()) {
                    f
                } else {
                    f + 1
                }
            }
            BetaValue::Interval { lo, hi } => {
                let c_lo = lo.ceil().to_integer();
                let c_hi = hi.ceil().to_integer();
                if c_lo != c_hi {
                    return Err(Error::UncertifiedDigit { index: 0, bits: 0 });
                }
                c_hi
            }
        };
        usize::try_from(ceil)
            .map_err(|_| Error::InvalidInput("beta too large".into()))
            .and_then(|c| {
                if (2..=256).contains(&c) {
                    Ok(c)
                } else {
                    Err(Error::InvalidInput(format!("alphabet size {c} outside 2..=256")))
                }
            })
    }

    /// Rational enclosure `[lo, hi]` with endpoints on the dyadic grid `2^-bits`.
    pub fn enclosure(&self, bits: u32) -> (BigRational, BigRational) {
        match self {
            BetaValue::Exact(q) => quadratic_enclosure(q, bits),
            BetaValue::Interval { lo, hi } => (round_down(lo, bits), round_up(hi, bits)),
        }
    }

    /// Compares the integer `count` with `β^n`. `None` when an interval value
    /// cannot decide.
    pub fn cmp_count_with_power(&self, count: &BigUint, n: u32) -> Option<Ordering> {
        let c = BigRational::from_integer(BigInt::from(count.clone()));
        match self {
            BetaValue::Exact(q) => Some(Quadratic::rational(c).cmp(&q.pow(n))),
            BetaValue::Interval { lo, hi } => {
                let plo = num_traits::pow(lo.clone(), n as usize);
                let phi = num_traits::pow(hi.clone(), n as usize);
                if c < plo {
                    Some(Ordering::Less)
                } else if c > phi {
                    Some(Ordering::Greater)
                } else if plo == phi {
                    Some(Ordering::Equal)
                } else {
                    None
                }
            }
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BetaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaValue::Exact(q) => write!(f, "{q}"),
            BetaValue::Interval { lo, hi } => write!(f, "[{lo}, {hi}]"),
        }
    }
}

pub fn golden_ratio() -> Quadratic {
    let half = BigRational::new(1.into(), 2.into());
    Quadratic::new(half.clone(), half, 5)
}

pub(crate) fn round_down(r: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    BigRational::new((r * BigRational::from_integer(scale.clone())).floor().to_integer(), scale)
}

pub(crate) fn round_up(r: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits;
    BigRational::new((r * BigRational::from_integer(scale.clone())).ceil().to_integer(), scale)
}

fn quadratic_enclosure(q: &Quadratic, bits: u32) -> (BigRational, BigRational) {
    if q.is_rational() {
        return (round_down(q.rational_part(), bits), round_up(q.rational_part(), bits));
    }
    // floor(sqrt(d) * 2^(bits+2)) brackets sqrt(d) to within 2^-(bits+2)
    let p = bits + 2;
    let scaled = BigUint::from(q.radicand()) << (2 * p as usize);
    let s = scaled.sqrt();
    let scale = BigInt::one() << p;
    let s_lo = BigRational::new(BigInt::from(s.clone()), scale.clone());
    let s_hi = BigRational::new(BigInt::from(s) + 1, scale);
    let b = q.surd_part();
    let (lo, hi) = if b.is_negative() {
        (q.rational_part() + b * &s_hi, q.rational_part() + b * &s_lo)
    } else {
        (q.rational_part() + b * &s_lo, q.rational_part() + b * &s_hi)
    };
    (round_down(&lo, bits), round_up(&hi, bits))
}

/// Parses a β literal. The value must exceed 1.
pub fn parse_beta(input: &str) -> Result<BetaValue> {
    let s = input.trim();
    if s.is_empty() {
        return Err(Error::InvalidInput("empty beta literal".into()));
    }
    let value = if let Some(rest) = s.strip_prefix('~') {
        let (mid, ulp) = parse_decimal_with_ulp(rest.trim())?;
        let half = ulp / rat(2);
        BetaValue::Interval { lo: &mid - &half, hi: &mid + &half }
    } else {
        let mut p = ExprParser { src: s.as_bytes(), pos: 0, depth: 0 };
        let q = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing characters"));
        }
        BetaValue::Exact(q)
    };
    let above_one = match &value {
        BetaValue::Exact(q) => *q > Quadratic::one(),
        BetaValue::Interval { lo, .. } => *lo > BigRational::one(),
    };
    if !above_one {
        return Err(Error::InvalidInput(format!("beta must exceed 1, got {s}")));
    }
    Ok(value)
}

fn parse_decimal_with_ulp(s: &str) -> Result<(BigRational, BigRational)> {
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    let valid = |t: &str| t.bytes().all(|c| c.is_ascii_digit());
    if int_part.is_empty() && frac_part.is_empty() || !valid(int_part) || !valid(frac_part) {
        return Err(Error::InvalidInput(format!("malformed decimal {s:?}")));
    }
    if frac_part.len() > 4096 {
        return Err(Error::InvalidInput("decimal literal too long".into()));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().unwrap_or_default();
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok((BigRational::new(numer, denom.clone()), BigRational::new(BigInt::one(), denom)))
}

const MAX_NESTING: usize = 64;

struct ExprParser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl ExprParser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::InvalidInput(format!("beta literal: {msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn combine(&self, l: &Quadratic, r: &Quadratic) -> Result<()> {
        if l.radicand() != 0 && r.radicand() != 0 && l.radicand() != r.radicand() {
            return Err(self.error("only one square root may appear"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Quadratic> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let t = self.term()?;
                self.combine(&acc, &t)?;
                acc = acc + t;
            } else if self.eat(b'-') {
                let t = self.term()?;
                self.combine(&acc, &t)?;
                acc = acc - t;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Quadratic> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                let f = self.factor()?;
                self.combine(&acc, &f)?;
                acc = acc * f;
            } else if self.eat(b'/') {
                let f = self.factor()?;
                self.combine(&acc, &f)?;
                if f.is_zero() {
                    return Err(self.error("division by zero"));
                }
                acc = acc / f;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Quadratic> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.error("nesting too deep"));
        }
        let out = self.factor_inner();
        self.depth -= 1;
        out
    }

    fn factor_inner(&mut self) -> Result<Quadratic> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                match ident {
                    "phi" | "golden" => Ok(golden_ratio()),
                    "sqrt" => {
                        if !self.eat(b'(') {
                            return Err(self.error("expected '(' after sqrt"));
                        }
                        let arg = self.number()?;
                        if !self.eat(b')') {
                            return Err(self.error("expected ')'"));
                        }
                        let n = arg
                            .as_rational()
                            .filter(|r| r.is_integer() && !r.is_negative())
                            .and_then(|r| u64::try_from(r.to_integer()).ok())
                            .filter(|&n| n <= 1 << 40)
                            .ok_or_else(|| self.error("sqrt takes a non-negative integer"))?;
                        Ok(Quadratic::sqrt(n))
                    }
                    _ => Err(self.error("unknown identifier")),
                }
            }
            _ => Err(self.error("expected a number")),
        }
    }

    fn number(&mut self) -> Result<Quadratic> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        if text.matches('.').count() > 1 {
            return Err(self.error("malformed number"));
        }
        let (value, _) = parse_decimal_with_ulp(text).map_err(|_| self.error("malformed number"))?;
        Ok(Quadratic::rational(value))
    }
}
