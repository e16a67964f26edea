//! Exact arithmetic in real quadratic fields `Q(sqrt(d))`.
//!
//! A [`Quadratic`] is `a + b*sqrt(d)` with rational `a`, `b` and a squarefree
//! radicand `d > 1`. Rationals are the special case `b = 0` and mix freely with
//! any field. Two irrational values with different radicands cannot be
//! combined; doing so is a programming error and panics.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quadratic {
    a: BigRational,
    b: BigRational,
    /// Radicand; 0 whenever `b == 0`.
    d: u64,
}

impl Quadratic {
    pub fn rational(a: BigRational) -> Self {
        Quadratic { a, b: BigRational::zero(), d: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n.clone())))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `a + b*sqrt(n)`; square factors of `n` are pulled out so the stored
    /// radicand is squarefree.
    pub fn new(a: BigRational, b: BigRational, n: u64) -> Self {
        let (outside, radicand) = squarefree_split(n);
        let b = b * BigRational::from_integer(BigInt::from(outside));
        if radicand <= 1 {
            Quadratic::rational(a + b * BigRational::from_integer(BigInt::from(radicand)))
        } else {
            Quadratic { a, b, d: radicand }.normalized()
        }
    }

    /// `sqrt(n)` as an exact element.
    pub fn sqrt(n: u64) -> Self {
        Self::new(BigRational::zero(), BigRational::one(), n)
    }

    fn normalized(mut self) -> Self {
        if self.b.is_zero() {
            self.d = 0;
        }
        self
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    fn common_radicand(&self, other: &Self) -> u64 {
        match (self.d, other.d) {
            (0, d) | (d, 0) => d,
            (x, y) if x == y => x,
            (x, y) => panic!("mixing quadratic fields Q(sqrt({x})) and Q(sqrt({y}))"),
        }
    }

    pub fn conjugate(&self) -> Self {
        Quadratic { a: self.a.clone(), b: -self.b.clone(), d: self.d }
    }

    /// Field norm `a^2 - d b^2`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * rat(self.d as i64)
    }

    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 with d b^2
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * rat(self.d as i64);
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "division by zero in Q(sqrt(d))");
        let n = self.norm();
        Quadratic { a: &self.a / &n, b: -(&self.b / &n), d: self.d }.normalized()
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Quadratic::one();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        let approx = self.to_f64().floor();
        let mut k = if approx.is_finite() {
            BigInt::from(approx as i64)
        } else {
            self.a.floor().to_integer()
        };
        // f64 can be off by one near integers; settle it exactly.
        loop {
            let kq = Quadratic::rational(BigRational::from_integer(k.clone()));
            if (self - &kq).signum() < 0 {
                k -= 1;
                continue;
            }
            let k1 = Quadratic::rational(BigRational::from_integer(&k + 1));
            if (self - &k1).signum() >= 0 {
                k += 1;
                continue;
            }
            return k;
        }
    }

    pub fn to_f64(&self) -> f64 {
        let root = (self.d as f64).sqrt();
        if sign_of(&self.a) * sign_of(&self.b) < 0 {
            // a + b√d = (a² - d b²) / (a - b√d); the denominator does not cancel
            rational_to_f64(&self.norm()) / (rational_to_f64(&self.a) - rational_to_f64(&self.b) * root)
        } else {
            rational_to_f64(&self.a) + rational_to_f64(&self.b) * root
        }
    }

    /// Natural logarithm, computed in floating point.
    pub fn ln(&self) -> f64 {
        self.to_f64().ln()
    }
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn sign_of(r: &BigRational) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// `n = outside^2 * radicand` with `radicand` squarefree.
fn squarefree_split(n: u64) -> (u64, u64) {
    let mut outside = 1u64;
    let mut rest = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= rest {
        while rest.is_multiple_of(p * p) {
            rest /= p * p;
            outside *= p;
        }
        p += 1;
    }
    (outside, rest)
}

/// Correctly scaled conversion that survives numerators beyond f64 range.
pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = nb - db - 60;
    let scaled = if shift > 0 {
        r.numer() / (r.denom() << (shift as usize))
    } else {
        (r.numer() << ((-shift) as usize)) / r.denom()
    };
    scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

impl PartialOrd for Quadratic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quadratic {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Quadratic> for Quadratic {
            type Output = Quadratic;
            fn $method(self, rhs: Quadratic) -> Quadratic {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Quadratic> for Quadratic {
            type Output = Quadratic;
            fn $method(self, rhs: &'a Quadratic) -> Quadratic {
                (&self).$method(rhs)
            }
        }
    };
}

impl<'a> Add<&'a Quadratic> for &'a Quadratic {
    type Output = Quadratic;
    fn add(self, rhs: &Quadratic) -> Quadratic {
        let d = self.common_radicand(rhs);
        Quadratic { a: &self.a + &rhs.a, b: &self.b + &rhs.b, d }.normalized()
    }
}

impl<'a> Sub<&'a Quadratic> for &'a Quadratic {
    type Output = Quadratic;
    fn sub(self, rhs: &Quadratic) -> Quadratic {
        let d = self.common_radicand(rhs);
        Quadratic { a: &self.a - &rhs.a, b: &self.b - &rhs.b, d }.normalized()
    }
}

impl<'a> Mul<&'a Quadratic> for &'a Quadratic {
    type Output = Quadratic;
    fn mul(self, rhs: &Quadratic) -> Quadratic {
        let d = self.common_radicand(rhs);
        let a = &self.a * &rhs.a + &self.b * &rhs.b * rat(d as i64);
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Quadratic { a, b, d }.normalized()
    }
}

impl<'a> Div<&'a Quadratic> for &'a Quadratic {
    type Output = Quadratic;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &Quadratic) -> Quadratic {
        self * &rhs.recip()
    }
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Quadratic {
    type Output = Quadratic;
    fn neg(self) -> Quadratic {
        Quadratic { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Neg for &Quadratic {
    type Output = Quadratic;
    fn neg(self) -> Quadratic {
        -(self.clone())
    }
}

impl fmt::Display for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            write!(f, "{}*sqrt({})", self.b, self.d)
        } else if self.b.is_negative() {
            write!(f, "{}-{}*sqrt({})", self.a, -self.b.clone(), self.d)
        } else {
            write!(f, "{}+{}*sqrt({})", self.a, self.b, self.d)
        }
    }
}

/// Greatest common divisor helper kept local to avoid exposing num-integer.
pub(crate) fn gcd_usize(a: usize, b: usize) -> usize {
    a.gcd(&b)
}
