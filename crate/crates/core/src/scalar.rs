//! Exact arithmetic in the quadratic field Q[√2].
//!
//! Every spectrality condition in this crate is an integrality test, so the
//! geometry is carried exactly and only converted to floats for Fourier
//! evaluation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// `rat + sq2·√2` with both coefficients reduced rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    rat: BigRational,
    sq2: BigRational,
}

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(big(n), big(d))
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Only reachable for absurdly large magnitudes.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

impl ExactScalar {
    pub fn new(rat: BigRational, sq2: BigRational) -> Self {
        ExactScalar { rat, sq2 }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(n: i64) -> Self {
        Self::new(BigRational::from_integer(big(n)), BigRational::zero())
    }

    /// `n/d`; panics on `d == 0` like `BigRational::new`.
    pub fn ratio(n: i64, d: i64) -> Self {
        Self::new(rational(n, d), BigRational::zero())
    }

    pub fn sqrt2() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    /// `a/b + (c/d)·√2` from small integers.
    pub fn from_parts(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self::new(rational(a, b), rational(c, d))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::new(r, BigRational::zero())
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_rational(BigRational::from_integer(n))
    }

    pub fn rat(&self) -> &BigRational {
        &self.rat
    }

    pub fn sq2(&self) -> &BigRational {
        &self.sq2
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.sq2.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.sq2.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.rat)
    }

    /// Galois conjugate `rat − sq2·√2`.
    pub fn conjugate(&self) -> Self {
        Self::new(self.rat.clone(), -self.sq2.clone())
    }

    /// Field norm `rat² − 2·sq2²`, zero only for zero.
    pub fn norm(&self) -> BigRational {
        &self.rat * &self.rat - BigRational::from_integer(big(2)) * &self.sq2 * &self.sq2
    }

    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.rat);
        let sb = sign_of(&self.sq2);
        if sa == 0 {
            return sb;
        }
        if sb == 0 || sa == sb {
            return sa;
        }
        // Opposite signs: compare a² with 2b²; equality is impossible.
        if self.norm().is_positive() {
            sa
        } else {
            sb
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::new(&self.rat / &n, -(&self.sq2 / &n)))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.rat) + rational_to_f64(&self.sq2) * std::f64::consts::SQRT_2
    }

    /// Exact floor.  `floor(sq2·√2)` is computed with an integer square root
    /// and the sum is off by at most one, which an exact comparison fixes.
    pub fn floor(&self) -> BigInt {
        let fa = self.rat.floor().to_integer();
        let fb = floor_sqrt2_multiple(&self.sq2);
        let g = fa + fb;
        let next = Self::from_bigint(&g + 1);
        if next <= *self {
            g + 1
        } else {
            g
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// Nearest integer, ties rounded up.
    pub fn round(&self) -> BigInt {
        (self + &Self::ratio(1, 2)).floor()
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        (self.is_rational() && self.rat.is_integer()).then(|| self.rat.to_integer())
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.rat.is_integer()
    }

    pub fn is_even_integer(&self) -> bool {
        self.as_integer().is_some_and(|n| n.is_even())
    }

    /// Representative of `self` modulo a positive rational `q`, in `[0, q)`.
    /// `None` flags an irrational input (no rational residue exists).
    pub fn residue_mod(&self, q: &BigRational) -> Option<BigRational> {
        assert!(q.is_positive(), "modulus must be positive");
        if !self.is_rational() {
            return None;
        }
        let k = (&self.rat / q).floor();
        Some(&self.rat - &k * q)
    }

    pub fn integrality(&self) -> Integrality {
        Integrality {
            is_integer: self.is_integer(),
            is_even_integer: self.is_even_integer(),
            is_rational: self.is_rational(),
        }
    }

    /// Square root inside Q[√2] if one exists, returned non-negative.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let p = &self.rat;
        let q = &self.sq2;
        if q.is_zero() {
            if let Some(r) = rational_sqrt(p) {
                return Some(Self::from_rational(r));
            }
            let half = p / BigRational::from_integer(big(2));
            return rational_sqrt(&half).map(|b| Self::new(BigRational::zero(), b));
        }
        // (a + b√2)² = a² + 2b² + 2ab√2, so a² = (p ± √(p² − 2q²))/2.
        let d = rational_sqrt(&(p * p - BigRational::from_integer(big(2)) * q * q))?;
        let two = BigRational::from_integer(big(2));
        for a2 in [(p + &d) / &two, (p - &d) / &two] {
            if let Some(a) = rational_sqrt(&a2) {
                if a.is_zero() {
                    continue;
                }
                let b = q / (&two * &a);
                let cand = Self::new(a, b);
                if cand.square() == *self {
                    return Some(cand.abs());
                }
            }
        }
        None
    }
}

fn sign_of(r: &BigRational) -> i32 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

fn floor_sqrt2_multiple(b: &BigRational) -> BigInt {
    if b.is_zero() {
        return BigInt::zero();
    }
    // |b|√2 = √(2p²)/q; floor(x/q) = floor(floor(x)/q) for integer q > 0.
    let p = b.numer().abs();
    let q = b.denom();
    let s = (BigInt::from(2) * &p * &p).sqrt();
    let fl = s.div_floor(q);
    if b.is_positive() {
        fl
    } else {
        // |b|√2 is irrational, so ceil = floor + 1.
        -(fl + BigInt::one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Integrality {
    pub is_integer: bool,
    pub is_even_integer: bool,
    pub is_rational: bool,
}

impl PartialOrd for ExactScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::new(-self.rat, -self.sq2)
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::new(-self.rat.clone(), -self.sq2.clone())
    }
}

fn add_ref(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    ExactScalar::new(&a.rat + &b.rat, &a.sq2 + &b.sq2)
}

fn sub_ref(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    ExactScalar::new(&a.rat - &b.rat, &a.sq2 - &b.sq2)
}

fn mul_ref(a: &ExactScalar, b: &ExactScalar) -> ExactScalar {
    let two = BigRational::from_integer(big(2));
    ExactScalar::new(
        &a.rat * &b.rat + two * &a.sq2 * &b.sq2,
        &a.rat * &b.sq2 + &a.sq2 * &b.rat,
    )
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &ExactScalar) -> ExactScalar {
                $f(self, rhs)
            }
        }
        impl $tr<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                $f(&self, &rhs)
            }
        }
        impl $tr<&ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &ExactScalar) -> ExactScalar {
                $f(&self, rhs)
            }
        }
        impl $tr<ExactScalar> for &ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                $f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        self.rat += &rhs.rat;
        self.sq2 += &rhs.sq2;
    }
}

impl SubAssign<&ExactScalar> for ExactScalar {
    fn sub_assign(&mut self, rhs: &ExactScalar) {
        self.rat -= &rhs.rat;
        self.sq2 -= &rhs.sq2;
    }
}

impl MulAssign<&ExactScalar> for ExactScalar {
    fn mul_assign(&mut self, rhs: &ExactScalar) {
        *self = mul_ref(self, rhs);
    }
}

impl std::iter::Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |a, b| a + b)
    }
}

impl<'a> std::iter::Sum<&'a ExactScalar> for ExactScalar {
    fn sum<I: Iterator<Item = &'a ExactScalar>>(iter: I) -> Self {
        iter.fold(ExactScalar::zero(), |a, b| a + b)
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        ExactScalar::int(n)
    }
}

impl From<BigInt> for ExactScalar {
    fn from(n: BigInt) -> Self {
        ExactScalar::from_bigint(n)
    }
}

impl From<BigRational> for ExactScalar {
    fn from(r: BigRational) -> Self {
        ExactScalar::from_rational(r)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sq2.is_zero() {
            return write!(f, "{}", self.rat);
        }
        if self.rat.is_zero() {
            return write!(f, "{}*sqrt2", self.sq2);
        }
        if self.sq2.is_negative() {
            write!(f, "{}-{}*sqrt2", self.rat, -self.sq2.clone())
        } else {
            write!(f, "{}+{}*sqrt2", self.rat, self.sq2)
        }
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// ---------------------------------------------------------------------------
// Parsing: a tiny recursive-descent grammar over + - * / ( ), decimals,
// and the atoms `sqrt2`, `sqrt(2)`, `√2`.

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!(
            "{msg} at offset {} in {:?}",
            self.pos,
            String::from_utf8_lossy(self.s)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<ExactScalar> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ExactScalar> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc * self.factor()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.factor()?;
                    acc = acc.checked_div(&d)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<ExactScalar> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(_) => {
                let rest = &self.s[self.pos..];
                for tok in ["sqrt(2)", "sqrt2", "√2"] {
                    if rest.starts_with(tok.as_bytes()) {
                        self.pos += tok.len();
                        return Ok(ExactScalar::sqrt2());
                    }
                }
                Err(self.err("unexpected token"))
            }
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<ExactScalar> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len: i64 = 0;
        let mut seen_dot = false;
        while let Some(&c) = self.s.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    frac_len += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            self.pos = start;
            return Err(self.err("expected digits"));
        }
        let mut exp: i64 = -frac_len;
        if matches!(self.s.get(self.pos), Some(b'e') | Some(b'E')) {
            self.pos += 1;
            let mut sign = 1;
            match self.s.get(self.pos) {
                Some(b'-') => {
                    sign = -1;
                    self.pos += 1;
                }
                Some(b'+') => self.pos += 1,
                _ => {}
            }
            let es = self.pos;
            while matches!(self.s.get(self.pos), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
            let e: i64 = std::str::from_utf8(&self.s[es..self.pos])
                .ok()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| self.err("bad exponent"))?;
            exp += sign * e;
        }
        let n: BigInt = digits.parse().map_err(|_| self.err("bad number"))?;
        let ten = BigInt::from(10);
        let r = if exp >= 0 {
            BigRational::from_integer(n * num_traits::pow(ten, exp as usize))
        } else {
            BigRational::new(n, num_traits::pow(ten, (-exp) as usize))
        };
        Ok(ExactScalar::from_rational(r))
    }
}

impl FromStr for ExactScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            s: s.as_bytes(),
            pos: 0,
        };
        let v = p.expr()?;
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(v)
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        if self.is_rational() {
            serializer.serialize_str(&self.rat.to_string())
        } else {
            let mut m = serializer.serialize_map(Some(2))?;
            m.serialize_entry("rat", &self.rat.to_string())?;
            m.serialize_entry("sqrt2", &self.sq2.to_string())?;
            m.end()
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Text(String),
    Int(i64),
    Parts { rat: String, sqrt2: String },
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match ScalarRepr::deserialize(deserializer)? {
            ScalarRepr::Text(s) => s.parse().map_err(D::Error::custom),
            ScalarRepr::Int(n) => Ok(ExactScalar::int(n)),
            ScalarRepr::Parts { rat, sqrt2 } => {
                let a: ExactScalar = rat.parse().map_err(D::Error::custom)?;
                let b: ExactScalar = sqrt2.parse().map_err(D::Error::custom)?;
                Ok(a + b * ExactScalar::sqrt2())
            }
        }
    }
}
