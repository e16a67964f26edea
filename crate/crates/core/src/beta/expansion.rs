//! Greedy and quasi-greedy β-expansions of 1.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::number::{round_down, round_up, BetaValue};
use crate::error::{Error, Result};
use crate::qfield::{rat, Quadratic};
use crate::word::Symbol;

/// How far the stored digits can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Certificate {
    /// Every digit came from exact field arithmetic.
    ExactArithmetic,
    /// Every digit was certified by interval arithmetic at this precision.
    Interval { bits: u32 },
    /// Digits were supplied by the user (expansion file).
    Supplied,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Tail {
    /// The digits are the whole expansion; all later digits are 0.
    Finite,
    /// `digits = u v` with `|u| = preperiod`, `|v| = period`, expansion `u v v v ...`.
    EventuallyPeriodic { preperiod: usize, period: usize },
    /// Only the first `horizon` digits are known.
    Truncated { horizon: usize, certificate: Certificate },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaExpansion {
    digits: Vec<Symbol>,
    tail: Tail,
    beta: BetaValue,
}

/// Working precision for the interval route: start at `initial_bits`, double
/// on failure, give up beyond `max_bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct PrecisionPolicy {
    pub initial_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { initial_bits: 128, max_bits: 4096 }
    }
}

impl PrecisionPolicy {
    pub fn fixed(bits: u32) -> Self {
        PrecisionPolicy { initial_bits: bits, max_bits: bits }
    }
}

impl BetaExpansion {
    pub fn new(digits: Vec<Symbol>, tail: Tail, beta: BetaValue) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::InvalidInput("expansion has no digits".into()));
        }
        match tail {
            Tail::EventuallyPeriodic { preperiod, period } => {
                if period == 0 || preperiod + period != digits.len() {
                    return Err(Error::InvalidInput(format!(
                        "period structure {preperiod}+{period} does not match {} digits",
                        digits.len()
                    )));
                }
                if digits[preperiod..].iter().all(|&d| d == 0) {
                    return Err(Error::InvalidInput("periodic part is all zeros".into()));
                }
            }
            Tail::Truncated { horizon, .. } if horizon != digits.len() => {
                return Err(Error::InvalidInput("truncation horizon must equal digit count".into()));
            }
            Tail::Finite if *digits.last().unwrap() == 0 => {
                return Err(Error::InvalidInput("finite expansion must end in a nonzero digit".into()));
            }
            _ => {}
        }
        Ok(BetaExpansion { digits, tail, beta }.normalized())
    }

    pub fn digits(&self) -> &[Symbol] {
        &self.digits
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn beta(&self) -> &BetaValue {
        &self.beta
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.tail, Tail::Finite)
    }

    /// Number of digits that are known; `None` when all are.
    pub fn horizon(&self) -> Option<usize> {
        match self.tail {
            Tail::Truncated { horizon, .. } => Some(horizon),
            _ => None,
        }
    }

    /// The `i`-th digit (0-based), `None` beyond a truncation horizon.
    pub fn digit(&self, i: usize) -> Option<Symbol> {
        match self.tail {
            Tail::Finite => Some(self.digits.get(i).copied().unwrap_or(0)),
            Tail::EventuallyPeriodic { preperiod, period } => Some(if i < preperiod {
                self.digits[i]
            } else {
                self.digits[preperiod + (i - preperiod) % period]
            }),
            Tail::Truncated { .. } => self.digits.get(i).copied(),
        }
    }

    /// First `n` digits (shorter only past a truncation horizon).
    pub fn prefix(&self, n: usize) -> Vec<Symbol> {
        (0..n).map_while(|i| self.digit(i)).collect()
    }

    /// True when no shift of the expansion exceeds it lexicographically,
    /// comparing the first `len` digits.
    pub fn is_self_admissible(&self, len: usize) -> bool {
        let w = self.prefix(len);
        (1..w.len()).all(|s| w[s..] <= w[..w.len() - s])
    }

    /// Shortest equivalent preperiod/period description.
    fn normalized(mut self) -> Self {
        if let Tail::EventuallyPeriodic { mut preperiod, period } = self.tail {
            let cycle = &self.digits[preperiod..];
            let period = (1..=period)
                .find(|&q| period % q == 0 && (q..period).all(|i| cycle[i] == cycle[i - q]))
                .unwrap_or(period);
            self.digits.truncate(preperiod + period);
            while preperiod > 0 && self.digits[preperiod - 1] == self.digits[preperiod + period - 1] {
                // rotate the cycle left across the preperiod boundary
                self.digits.pop();
                preperiod -= 1;
            }
            self.tail = Tail::EventuallyPeriodic { preperiod, period };
        }
        self
    }

    /// Human-readable form: `11`, `(10)^∞`, `2(01)^∞`, `1^∞`, `1011…`.
    pub fn render(&self) -> String {
        let base = self.digits.iter().copied().max().unwrap_or(0) as usize + 1;
        let show = |d: &[Symbol]| crate::word::Word::from(d).render(base.max(2));
        match self.tail {
            Tail::Finite => show(&self.digits),
            Tail::EventuallyPeriodic { preperiod, period } => {
                let cycle = show(&self.digits[preperiod..]);
                let cycle = if period == 1 { cycle } else { format!("({cycle})") };
                format!("{}{cycle}^∞", show(&self.digits[..preperiod]))
            }
            Tail::Truncated { .. } => format!("{}…", show(&self.digits)),
        }
    }
}

impl fmt::Display for BetaExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// First `n` digits of the greedy expansion of 1, detecting termination and
/// eventual periodicity. Exact values use field arithmetic; intervals use the
/// precision policy.
pub fn greedy_expansion(beta: &BetaValue, n: usize, policy: &PrecisionPolicy) -> Result<BetaExpansion> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one digit".into()));
    }
    match beta {
        BetaValue::Exact(q) => greedy_exact(q, n),
        BetaValue::Interval { .. } => greedy_with_policy(beta, n, policy),
    }
}

fn greedy_exact(beta: &Quadratic, n: usize) -> Result<BetaExpansion> {
    let mut x = Quadratic::one();
    let mut digits = Vec::new();
    let mut seen: BTreeMap<Quadratic, usize> = BTreeMap::new();
    for i in 0..n {
        let y = beta * &x;
        let d = y.floor();
        digits.push(digit_from(&d, i)?);
        x = y - Quadratic::rational(BigRational::from_integer(d));
        if x.is_zero() {
            return BetaExpansion::new(digits, Tail::Finite, BetaValue::Exact(beta.clone()));
        }
        if let Some(&j) = seen.get(&x) {
            let tail = Tail::EventuallyPeriodic { preperiod: j, period: i + 1 - j };
            return BetaExpansion::new(digits, tail, BetaValue::Exact(beta.clone()));
        }
        seen.insert(x.clone(), i + 1);
    }
    let tail = Tail::Truncated { horizon: n, certificate: Certificate::ExactArithmetic };
    BetaExpansion::new(digits, tail, BetaValue::Exact(beta.clone()))
}

fn digit_from(d: &BigInt, index: usize) -> Result<Symbol> {
    d.to_u8()
        .filter(|&d| d < 255)
        .ok_or_else(|| Error::InvalidInput(format!("digit {index} = {d} does not fit the alphabet")))
}

fn greedy_with_policy(beta: &BetaValue, n: usize, policy: &PrecisionPolicy) -> Result<BetaExpansion> {
    let mut bits = policy.initial_bits.max(8);
    loop {
        match greedy_interval(beta, n, bits) {
            Err(Error::UncertifiedDigit { .. }) if bits < policy.max_bits => {
                bits = bits.saturating_mul(2).min(policy.max_bits);
            }
            other => return other,
        }
    }
}

/// Greedy digits computed with outward-rounded dyadic intervals at `bits`
/// bits. Fails at the first digit whose interval straddles an integer.
pub fn greedy_interval(beta: &BetaValue, n: usize, bits: u32) -> Result<BetaExpansion> {
    let (b_lo, b_hi) = beta.enclosure(bits);
    let (mut x_lo, mut x_hi) = (BigRational::one(), BigRational::one());
    let mut digits = Vec::with_capacity(n);
    for i in 0..n {
        let y_lo = round_down(&(&b_lo * &x_lo), bits);
        let y_hi = round_up(&(&b_hi * &x_hi), bits);
        let d = y_lo.floor().to_integer();
        let d_hi = y_hi.floor().to_integer();
        // y_hi on an integer boundary is fine only if the interval is a point
        if d != d_hi || (y_hi.is_integer() && y_lo != y_hi) {
            return Err(Error::UncertifiedDigit { index: i, bits });
        }
        digits.push(digit_from(&d, i)?);
        let d = BigRational::from_integer(d);
        x_lo = &y_lo - &d;
        x_hi = &y_hi - &d;
        if x_hi.is_zero() {
            return BetaExpansion::new(digits, Tail::Finite, beta.clone());
        }
    }
    let tail = Tail::Truncated { horizon: n, certificate: Certificate::Interval { bits } };
    BetaExpansion::new(digits, tail, beta.clone())
}

/// Replaces a finite expansion `d_1 .. d_k` by `(d_1 .. d_{k-1} (d_k - 1))^∞`;
/// infinite expansions are returned unchanged.
pub fn quasi_greedy(e: &BetaExpansion) -> BetaExpansion {
    match e.tail {
        Tail::Finite => {
            let mut digits = e.digits.clone();
            *digits.last_mut().expect("nonempty") -= 1;
            let period = digits.len();
            BetaExpansion {
                digits,
                tail: Tail::EventuallyPeriodic { preperiod: 0, period },
                beta: e.beta.clone(),
            }
            .normalized()
        }
        _ => e.clone(),
    }
}

/// Value of `sum_i w_i x^{-i} - 1` for the digit sequence of `e` (exact tail
/// sum for periodic and finite expansions, partial sum when truncated).
fn expansion_defect(e: &BetaExpansion, x: &BigRational) -> BigRational {
    let inv = x.recip();
    let partial = |ds: &[Symbol]| {
        let mut acc = BigRational::zero();
        let mut pw = BigRational::one();
        for &d in ds {
            pw = &pw * &inv;
            acc += &pw * rat(d as i64);
        }
        (acc, pw)
    };
    let total = match e.tail {
        Tail::EventuallyPeriodic { preperiod, period } => {
            let (head, pw_head) = partial(&e.digits[..preperiod]);
            let (cycle, pw_cycle) = partial(&e.digits[preperiod..preperiod + period]);
            head + pw_head * cycle / (BigRational::one() - pw_cycle)
        }
        _ => partial(&e.digits).0,
    };
    total - BigRational::one()
}

/// Encloses the β determined by an expansion (the root `x > 1` of
/// `sum_i w_i x^{-i} = 1`) in an interval of width at most `2^-bits`.
pub fn beta_from_digits(digits: &[Symbol], tail: &Tail, bits: u32) -> Result<BetaValue> {
    if matches!(tail, Tail::Truncated { .. }) {
        return Err(Error::InvalidInput(
            "a truncated expansion does not determine beta; supply a beta= header".into(),
        ));
    }
    // the placeholder value is never read by expansion_defect
    let e = BetaExpansion::new(digits.to_vec(), tail.clone(), BetaValue::integer(2))?;
    if digits[0] == 0 {
        return Err(Error::InvalidInput("an expansion of 1 starts with floor(beta) >= 1".into()));
    }
    let mut lo = BigRational::one();
    let mut hi = rat(digits[0] as i64 + 1);
    if expansion_defect(&e, &hi).is_positive() {
        return Err(Error::InvalidInput("digits do not describe an expansion of 1".into()));
    }
    // the defect is decreasing in x; bisect on the dyadic grid
    let width = BigRational::new(BigInt::one(), BigInt::one() << bits);
    while &hi - &lo > width {
        let mid = round_down(&((&lo + &hi) / rat(2)), bits + 1);
        if expansion_defect(&e, &mid).is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= BigRational::one() {
        return Err(Error::InvalidInput("digits describe beta <= 1".into()));
    }
    Ok(BetaValue::Interval { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::number::parse_beta;

    fn exact(s: &str, n: usize) -> BetaExpansion {
        greedy_expansion(&parse_beta(s).unwrap(), n, &PrecisionPolicy::default()).unwrap()
    }

    #[test]
    fn leading_zero_digits_are_rejected() {
        let tail = Tail::EventuallyPeriodic { preperiod: 1, period: 1 };
        assert!(beta_from_digits(&[0, 5], &tail, 64).is_err());
    }

    #[test]
    fn golden_is_finite_11_and_quasi_greedy_10() {
        let e = exact("phi", 20);
        assert_eq!(e.digits(), &[1, 1]);
        assert_eq!(e.tail(), &Tail::Finite);
        let w = quasi_greedy(&e);
        assert_eq!(w.render(), "(10)^∞");
        assert_eq!(w.prefix(5), vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn integer_beta_gives_full_shift_expansion() {
        let e = exact("2", 10);
        assert_eq!(e.digits(), &[2]);
        let w = quasi_greedy(&e);
        assert_eq!(w.render(), "1^∞");
        assert_eq!(quasi_greedy(&exact("3", 4)).render(), "2^∞");
    }

    #[test]
    fn three_halves_digits() {
        // independent oracle: iterate x -> (3/2)x - floor((3/2)x) on plain rationals
        let mut x = BigRational::one();
        let mut oracle = Vec::new();
        for _ in 0..13 {
            let y = x * BigRational::new(3.into(), 2.into());
            let d = y.floor();
            oracle.push(d.to_integer().to_u8().unwrap());
            x = y - d;
        }
        let e = exact("3/2", 13);
        assert_eq!(e.digits(), &oracle[..]);
        assert_eq!(e.digits(), &[1, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0]);
        assert!(matches!(e.tail(), Tail::Truncated { horizon: 13, .. }));
        assert_eq!(quasi_greedy(&e), e);
    }

    #[test]
    fn one_plus_sqrt2() {
        let e = exact("1+sqrt(2)", 10);
        assert_eq!(e.digits(), &[2, 1]);
        assert_eq!(quasi_greedy(&e).render(), "(20)^∞");
    }

    #[test]
    fn detects_eventual_periodicity() {
        // smallest Pisot number's relative: beta^2 = 3 beta - 1 has expansion 2(1)^∞
        let e = exact("(3+sqrt(5))/2", 20);
        assert_eq!(e.tail(), &Tail::EventuallyPeriodic { preperiod: 1, period: 1 });
        assert_eq!(e.render(), "21^∞");
    }

    #[test]
    fn interval_route_matches_exact_and_flags_boundaries() {
        let b = parse_beta("3/2").unwrap();
        let iv = greedy_interval(&b, 40, 128).unwrap();
        assert_eq!(iv.digits(), exact("3/2", 40).digits());
        // phi * (phi - 1) = 1 exactly: an enclosure cannot decide the second digit
        let err = greedy_interval(&BetaValue::golden(), 5, 128).unwrap_err();
        assert_eq!(err, Error::UncertifiedDigit { index: 1, bits: 128 });
    }

    #[test]
    fn approximate_input_runs_out_of_precision() {
        let e = greedy_expansion(&parse_beta("~1.9").unwrap(), 3, &PrecisionPolicy::default()).unwrap();
        assert_eq!(e.digits(), &[1, 1, 1]);
        let b = parse_beta("~1.8392867552").unwrap();
        let err = greedy_expansion(&b, 200, &PrecisionPolicy { initial_bits: 64, max_bits: 256 });
        assert!(matches!(err, Err(Error::UncertifiedDigit { bits: 256, .. })));
    }

    #[test]
    fn normalization_shrinks_period_descriptions() {
        let e = BetaExpansion::new(
            vec![1, 0, 1, 0, 1, 0],
            Tail::EventuallyPeriodic { preperiod: 2, period: 4 },
            BetaValue::golden(),
        )
        .unwrap();
        assert_eq!(e.tail(), &Tail::EventuallyPeriodic { preperiod: 0, period: 2 });
        assert_eq!(e.digits(), &[1, 0]);
    }

    #[test]
    fn beta_recovered_from_digits() {
        let w = quasi_greedy(&exact("phi", 5));
        let b = beta_from_digits(w.digits(), w.tail(), 60).unwrap();
        assert!((b.to_f64() - 1.618_033_988_749_895).abs() < 1e-15);
        let tribonacci = beta_from_digits(&[1, 1, 1], &Tail::Finite, 50).unwrap();
        assert!((tribonacci.to_f64() - 1.839_286_755_214_161).abs() < 1e-13);
    }
}
