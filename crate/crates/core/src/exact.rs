//! Exact arithmetic kernel: big rationals, 2-adic valuations, and elements of
//! a real quadratic field `Q(sqrt(D))`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use num_rational::BigRational as Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("expected a nonnegative integer, got {0}")]
    Negative(BigInt),
    #[error("totient is only defined for positive integers, got {0}")]
    NonPositive(i64),
    #[error("radicand {0} is not a square-free integer greater than 1")]
    BadRadicand(u64),
    #[error("cannot combine surds with radicands {0} and {1}")]
    RadicandMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("multinomial valuation needs a positive total")]
    EmptyMultinomial,
    #[error("multinomial valuation bound violated for part {part}: {valuation} < -{bound}")]
    MultinomialBound { part: u64, valuation: i64, bound: i64 },
    #[error("cannot parse number {0:?}")]
    Parse(String),
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rat {
    Rat::from_integer(n.into())
}

/// 2-adic valuation, `Infinite` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Val2 {
    Finite(i64),
    Infinite,
}

impl Val2 {
    pub fn finite(self) -> Option<i64> {
        match self {
            Val2::Finite(v) => Some(v),
            Val2::Infinite => None,
        }
    }
}

impl PartialOrd for Val2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val2 {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Val2::Infinite, Val2::Infinite) => Ordering::Equal,
            (Val2::Infinite, _) => Ordering::Greater,
            (_, Val2::Infinite) => Ordering::Less,
            (Val2::Finite(a), Val2::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for Val2 {
    type Output = Val2;
    fn add(self, rhs: Val2) -> Val2 {
        match (self, rhs) {
            (Val2::Finite(a), Val2::Finite(b)) => Val2::Finite(a + b),
            _ => Val2::Infinite,
        }
    }
}

impl fmt::Display for Val2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val2::Finite(v) => write!(f, "{v}"),
            Val2::Infinite => write!(f, "inf"),
        }
    }
}

pub fn nu2_int(a: &BigInt) -> Val2 {
    match a.trailing_zeros() {
        Some(z) => Val2::Finite(z as i64),
        None => Val2::Infinite,
    }
}

/// For `a/b` in lowest terms this is `-nu2(b)` when `b` is even and `nu2(a)`
/// otherwise.
pub fn nu2(q: &Rat) -> Val2 {
    if q.is_zero() {
        return Val2::Infinite;
    }
    let den = q.denom().trailing_zeros().unwrap_or(0) as i64;
    if den > 0 {
        Val2::Finite(-den)
    } else {
        nu2_int(q.numer())
    }
}

/// Number of ones in the binary expansion of `a`.
pub fn binary_ones(a: &BigInt) -> Result<u64, ExactError> {
    if a.is_negative() {
        return Err(ExactError::Negative(a.clone()));
    }
    Ok(a.magnitude().count_ones())
}

/// Euler's totient.
pub fn totient(a: i64) -> Result<u64, ExactError> {
    if a < 1 {
        return Err(ExactError::NonPositive(a));
    }
    let mut n = a as u64;
    let mut result = n;
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    Ok(result)
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Exact value and 2-adic valuation of `(m_1+...+m_l-1)!/(m_1!...m_l!)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultinomialVal {
    pub value: Rat,
    pub valuation: Val2,
}

/// Computes the quotient exactly and checks `nu2 >= -nu2(m)` for every
/// nonzero part `m`.
pub fn multinomial_val2(parts: &[u64]) -> Result<MultinomialVal, ExactError> {
    let total: u64 = parts.iter().sum();
    if total == 0 {
        return Err(ExactError::EmptyMultinomial);
    }
    let den = parts.iter().fold(BigInt::one(), |acc, &m| acc * factorial(m));
    let value = Rat::new(factorial(total - 1), den);
    let valuation = nu2(&value);
    for &m in parts.iter().filter(|&&m| m != 0) {
        let bound = m.trailing_zeros() as i64;
        if valuation < Val2::Finite(-bound) {
            return Err(ExactError::MultinomialBound {
                part: m,
                valuation: valuation.finite().unwrap_or(i64::MAX),
                bound,
            });
        }
    }
    Ok(MultinomialVal { value, valuation })
}

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Writes a positive integer as `s^2 * D` with `D` square-free.
pub fn square_free_decomposition(n: &BigInt) -> (BigInt, BigInt) {
    assert!(n.is_positive());
    let mut rest = n.clone();
    let mut square = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let pp = &p * &p;
        while (&rest % &pp).is_zero() {
            rest /= &pp;
            square *= &p;
        }
        p += 1;
    }
    (square, rest)
}

/// An element `rational + surd * sqrt(radicand)` of a real quadratic field.
///
/// Rational values carry `radicand == 1` and a zero surd part.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadNum {
    rational: Rat,
    surd: Rat,
    radicand: u64,
}

impl QuadNum {
    pub fn new(rational: Rat, surd: Rat, radicand: u64) -> Result<Self, ExactError> {
        if radicand == 1 {
            return Ok(Self::from_rat(rational + surd));
        }
        if radicand < 2 || !is_squarefree(radicand) {
            return Err(ExactError::BadRadicand(radicand));
        }
        if surd.is_zero() {
            return Ok(Self::from_rat(rational));
        }
        Ok(QuadNum { rational, surd, radicand })
    }

    pub fn from_rat(rational: Rat) -> Self {
        QuadNum { rational, surd: Rat::zero(), radicand: 1 }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(rat_int(n))
    }

    /// `sqrt(D)` itself.
    pub fn sqrt(radicand: u64) -> Result<Self, ExactError> {
        Self::new(Rat::zero(), Rat::one(), radicand)
    }

    pub fn rational_part(&self) -> &Rat {
        &self.rational
    }

    pub fn surd_part(&self) -> &Rat {
        &self.surd
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        self.is_rational().then_some(&self.rational)
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }

    fn common_radicand(&self, other: &QuadNum) -> Result<u64, ExactError> {
        match (self.radicand, other.radicand) {
            (1, d) | (d, 1) => Ok(d),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(ExactError::RadicandMismatch(a, b)),
        }
    }

    pub fn checked_add(&self, other: &QuadNum) -> Result<QuadNum, ExactError> {
        let d = self.common_radicand(other)?;
        QuadNum::new(&self.rational + &other.rational, &self.surd + &other.surd, d)
    }

    pub fn checked_sub(&self, other: &QuadNum) -> Result<QuadNum, ExactError> {
        self.checked_add(&-other.clone())
    }

    pub fn checked_mul(&self, other: &QuadNum) -> Result<QuadNum, ExactError> {
        let d = self.common_radicand(other)?;
        let dd = rat_int(d);
        let rational = &self.rational * &other.rational + &self.surd * &other.surd * dd;
        let surd = &self.rational * &other.surd + &self.surd * &other.rational;
        QuadNum::new(rational, surd, d)
    }

    /// Galois conjugate `a - b sqrt(D)`.
    pub fn conjugate(&self) -> QuadNum {
        QuadNum { rational: self.rational.clone(), surd: -self.surd.clone(), radicand: self.radicand }
    }

    /// Field norm `a^2 - b^2 D`.
    pub fn norm(&self) -> Rat {
        &self.rational * &self.rational - &self.surd * &self.surd * rat_int(self.radicand)
    }

    pub fn recip(&self) -> Result<QuadNum, ExactError> {
        let n = self.norm();
        if n.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let c = self.conjugate();
        QuadNum::new(c.rational / &n, c.surd / &n, self.radicand)
    }

    pub fn checked_div(&self, other: &QuadNum) -> Result<QuadNum, ExactError> {
        self.checked_mul(&other.recip()?)
    }

    pub fn scale(&self, k: &Rat) -> QuadNum {
        QuadNum::new(&self.rational * k, &self.surd * k, self.radicand).expect("radicand already valid")
    }

    pub fn pow(&self, e: u32) -> QuadNum {
        let mut acc = QuadNum::from_int(1);
        for _ in 0..e {
            acc = acc.checked_mul(self).expect("same radicand");
        }
        acc
    }

    /// Exact sign of the real number this represents.
    pub fn sign(&self) -> i32 {
        quad_sign(self)
    }

    /// Floor as an integer, exact.
    pub fn floor(&self) -> BigInt {
        if let Some(r) = self.as_rat() {
            return r.floor().to_integer();
        }
        // bracket with the floor of a rational approximation, then correct
        let approx = self.to_f64().floor();
        let mut k = BigInt::from(approx as i64);
        while QuadNum::from_rat(rat_int(k.clone())) > *self {
            k -= 1;
        }
        while QuadNum::from_rat(rat_int(k.clone() + 1)) <= *self {
            k += 1;
        }
        k
    }

    pub fn ceil(&self) -> BigInt {
        -(-self.clone()).floor()
    }

    /// Approximate value, for diagnostics and as a starting guess only.
    pub fn to_f64(&self) -> f64 {
        let r = self.rational.to_f64().unwrap_or(f64::NAN);
        let s = self.surd.to_f64().unwrap_or(f64::NAN);
        r + s * (self.radicand as f64).sqrt()
    }
}

/// Sign of `a + b sqrt(D)` decided by comparing `a^2` with `b^2 D`.
pub fn quad_sign(x: &QuadNum) -> i32 {
    let sa = sign_of(&x.rational);
    let sb = sign_of(&x.surd);
    if sb == 0 {
        return sa;
    }
    if sa == 0 || sa == sb {
        return if sa == 0 { sb } else { sa };
    }
    // opposite signs: compare magnitudes
    let a2 = &x.rational * &x.rational;
    let b2d = &x.surd * &x.surd * rat_int(x.radicand);
    match a2.cmp(&b2d) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => 0,
    }
}

fn sign_of(r: &Rat) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl PartialOrd for QuadNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadNum {
    /// Panics when the radicands differ and both values are irrational.
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.checked_sub(other).expect("comparison across different radicands");
        quad_sign(&diff).cmp(&0)
    }
}

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum { rational: -self.rational, surd: -self.surd, radicand: self.radicand }
    }
}

macro_rules! quad_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&QuadNum> for &QuadNum {
            type Output = QuadNum;
            fn $method(self, rhs: &QuadNum) -> QuadNum {
                self.$checked(rhs).expect("mixed-radicand arithmetic")
            }
        }
        impl $tr for QuadNum {
            type Output = QuadNum;
            fn $method(self, rhs: QuadNum) -> QuadNum {
                (&self).$checked(&rhs).expect("mixed-radicand arithmetic")
            }
        }
    };
}

quad_binop!(Add, add, checked_add);
quad_binop!(Sub, sub, checked_sub);
quad_binop!(Mul, mul, checked_mul);

impl From<Rat> for QuadNum {
    fn from(r: Rat) -> Self {
        QuadNum::from_rat(r)
    }
}

impl From<i64> for QuadNum {
    fn from(n: i64) -> Self {
        QuadNum::from_int(n)
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for QuadNum {
    /// Canonical form `a/b+c/d*sqrt(D)`; rationals print as `a/b`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", fmt_rat(&self.rational));
        }
        let surd = fmt_rat(&self.surd.abs());
        let op = if self.surd.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}*sqrt({})", fmt_rat(&self.rational), op, surd, self.radicand)
    }
}

fn parse_rat(s: &str) -> Result<Rat, ExactError> {
    let err = || ExactError::Parse(s.to_string());
    let s = s.trim();
    if s.is_empty() {
        return Err(err());
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(rat_int(BigInt::from_str(s).map_err(|_| err())?)),
    }
}

impl FromStr for QuadNum {
    type Err = ExactError;

    /// Accepts `a`, `a/b`, `sqrt(D)`, `a+sqrt(D)`, `a-c/d*sqrt(D)`,
    /// `10-sqrt(5)` and similar sums of one rational and one surd term.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ExactError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(pos) = compact.find("sqrt(") else {
            return Ok(QuadNum::from_rat(parse_rat(&compact)?));
        };
        let close = compact[pos..].find(')').ok_or_else(err)? + pos;
        let radicand: u64 = compact[pos + 5..close].parse().map_err(|_| err())?;
        if close + 1 != compact.len() {
            return Err(err());
        }
        let head = &compact[..pos];
        let head = head.strip_suffix('*').unwrap_or(head);
        // split head into "rational" and signed surd coefficient
        let split = head.char_indices().rev().find(|&(i, c)| (c == '+' || c == '-') && i > 0).map(|(i, _)| i);
        let (rational, coeff) = match split {
            Some(i) => (parse_rat(&head[..i])?, &head[i..]),
            None => (Rat::zero(), head),
        };
        let coeff = match coeff {
            "" | "+" => Rat::one(),
            "-" => -Rat::one(),
            c => parse_rat(c.strip_prefix('+').unwrap_or(c))?,
        };
        let (square, d) = square_free_decomposition(&BigInt::from(radicand));
        let coeff = coeff * Rat::from_integer(square);
        QuadNum::new(rational, coeff, d.to_u64().ok_or_else(err)?)
    }
}

/// Integer square root (floor) for nonnegative big integers.
pub fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative());
    n.sqrt()
}

/// `gcd` of a list of integers, zero for an empty list.
pub fn gcd_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}
