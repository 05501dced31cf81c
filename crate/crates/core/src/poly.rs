//! Univariate integer polynomials: ring operations, calculus, exact real root
//! counting on intervals with quadratic-surd endpoints, residues modulo
//! `2^e`, and sign-split factorisations of `g((x-c)^2)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{binomial, quad_sign, rat_int, QuadNum, Rat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("division is not exact; remainder {remainder}")]
    Inexact { remainder: IntPoly },
    #[error("division by the zero polynomial")]
    DivideByZero,
    #[error("derivative order r = {r} out of range 1..={d}")]
    OrderOutOfRange { r: usize, d: usize },
    #[error("polynomial must be monic: {0}")]
    NotMonic(IntPoly),
    #[error("polynomial is not totally positive: {0}")]
    NotTotallyPositive(IntPoly),
    #[error("modulus exponent must be in 1..=63, got {0}")]
    BadExponent(u32),
    #[error("numeric refinement did not converge at {bits} bits")]
    PrecisionExhausted { bits: u32 },
    #[error("cannot parse polynomial {0:?}")]
    Parse(String),
    #[error("interval endpoints out of order: {lo} > {hi}")]
    BadInterval { lo: String, hi: String },
}

/// Integer polynomial, coefficients in ascending degree order with no
/// trailing zeros. The zero polynomial has an empty coefficient list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    /// `x - c`.
    pub fn linear(c: impl Into<BigInt>) -> Self {
        Self::new(vec![-c.into(), BigInt::one()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    /// Coefficient `a_i` of `x^(d-i)` in the descending convention
    /// `p = x^d + a_1 x^(d-1) + ... + a_d`.
    pub fn desc(&self, i: usize) -> BigInt {
        let d = self.degree();
        if i > d {
            BigInt::zero()
        } else {
            self.coeffs[d - i].clone()
        }
    }

    /// Sum of roots of a monic polynomial.
    pub fn trace(&self) -> BigInt {
        -self.desc(1)
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn scale(&self, k: &BigInt) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, e: u32) -> IntPoly {
        let mut acc = IntPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn product<'a>(polys: impl IntoIterator<Item = &'a IntPoly>) -> IntPoly {
        polys.into_iter().fold(IntPoly::one(), |acc, p| acc.mul(p))
    }

    /// Quotient and remainder over the rationals, scaled back to integers
    /// only when the quotient is integral.
    pub fn div_rem(&self, divisor: &IntPoly) -> Result<(IntPoly, IntPoly), PolyError> {
        if divisor.is_zero() {
            return Err(PolyError::DivideByZero);
        }
        let mut rem: Vec<Rat> = self.coeffs.iter().map(|c| rat_int(c.clone())).collect();
        let dd = divisor.degree();
        let lc = rat_int(divisor.leading());
        if self.is_zero() || self.degree() < dd {
            return Ok((IntPoly::zero(), self.clone()));
        }
        let mut quot = vec![Rat::zero(); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let q = &rem[k + dd] / &lc;
            if !q.is_zero() {
                for (j, c) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &q * rat_int(c.clone());
                }
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        let to_int = |v: Vec<Rat>| -> Option<IntPoly> {
            v.into_iter().map(|r| r.is_integer().then(|| r.to_integer())).collect::<Option<Vec<_>>>().map(IntPoly::new)
        };
        match (to_int(quot), to_int(rem)) {
            (Some(q), Some(r)) => Ok((q, r)),
            _ => Err(PolyError::Inexact { remainder: self.clone() }),
        }
    }

    /// Exact division; fails with the remainder when it does not divide.
    pub fn exact_div(&self, divisor: &IntPoly) -> Result<IntPoly, PolyError> {
        let (q, r) = self.div_rem(divisor)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(PolyError::Inexact { remainder: r })
        }
    }

    pub fn divides(&self, other: &IntPoly) -> bool {
        matches!(other.div_rem(self), Ok((_, r)) if r.is_zero())
    }

    /// `p(x - c)`.
    pub fn shift(&self, c: &BigInt) -> IntPoly {
        self.compose(&IntPoly::new(vec![-c.clone(), BigInt::one()]))
    }

    /// `p((x - c)^2)`.
    pub fn compose_square_shift(&self, c: &BigInt) -> IntPoly {
        let inner = IntPoly::new(vec![-c.clone(), BigInt::one()]).pow(2);
        self.compose(&inner)
    }

    /// `p(q(x))` by Horner's rule.
    pub fn compose(&self, q: &IntPoly) -> IntPoly {
        self.coeffs.iter().rev().fold(IntPoly::zero(), |acc, c| acc.mul(q).add(&IntPoly::constant(c.clone())))
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().enumerate().map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() }).collect())
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * i).collect())
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_rat(&self, x: &Rat) -> Rat {
        self.coeffs.iter().rev().fold(Rat::zero(), |acc, c| acc * x + rat_int(c.clone()))
    }

    pub fn eval_quad(&self, x: &QuadNum) -> QuadNum {
        self.coeffs
            .iter()
            .rev()
            .fold(QuadNum::from_int(0), |acc, c| &(&acc * x) + &QuadNum::from_rat(rat_int(c.clone())))
    }

    /// Exact sign of `p(x)`.
    pub fn sign_at(&self, x: &QuadNum) -> i32 {
        match x.as_rat() {
            Some(r) => {
                // Homogenised Horner: sign of sum c_i n^i d^(deg-i) with d > 0.
                let (n, d) = (r.numer(), r.denom());
                let mut acc = BigInt::zero();
                let mut dpow = BigInt::one();
                for c in self.coeffs.iter().rev() {
                    acc = acc * n + c * &dpow;
                    dpow *= d;
                }
                match acc.sign() {
                    num_bigint::Sign::Plus => 1,
                    num_bigint::Sign::Minus => -1,
                    num_bigint::Sign::NoSign => 0,
                }
            }
            None => quad_sign(&self.eval_quad(x)),
        }
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content, keeping the sign of the leading coefficient.
    pub fn primitive(&self) -> IntPoly {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        IntPoly { coeffs: self.coeffs.iter().map(|c| c / &g).collect() }
    }

    /// Pseudo-remainder scaled by a positive factor, so its sign pattern
    /// matches the true remainder over the rationals.
    pub fn signed_pseudo_rem(&self, divisor: &IntPoly) -> IntPoly {
        assert!(!divisor.is_zero());
        let dd = divisor.degree();
        if self.is_zero() || self.degree() < dd {
            return self.clone();
        }
        let lc = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut steps = 0u32;
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let top = rem.last().cloned().unwrap();
            for c in rem.iter_mut() {
                *c *= &lc;
            }
            for (j, c) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &top * c;
            }
            steps += 1;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        let mut r = IntPoly::new(rem);
        if lc.is_negative() && steps % 2 == 1 {
            r = r.neg();
        }
        r.primitive()
    }

    /// Monic-up-to-sign gcd with positive leading coefficient.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = self.primitive();
        let mut b = other.primitive();
        while !b.is_zero() {
            let r = a.signed_pseudo_rem(&b);
            a = b;
            b = r;
        }
        if a.leading().is_negative() {
            a = a.neg();
        }
        a
    }

    /// Square-free decomposition `p = c * prod q_i^i` (Yun), returning the
    /// pairs `(q_i, i)` with nonconstant primitive `q_i`.
    pub fn squarefree_decomposition(&self) -> Vec<(IntPoly, u32)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        // Yun's algorithm over Q with monic normalisation
        let p = RatPoly::from_int(self).monic();
        let dp = p.derivative();
        let a = p.gcd(&dp);
        let mut b = p.div_exact(&a);
        let mut c = dp.div_exact(&a);
        let mut i = 1u32;
        while b.degree() > 0 {
            let d = c.sub(&b.derivative());
            let a = b.gcd(&d);
            if a.degree() > 0 {
                out.push((a.to_primitive(), i));
            }
            c = d.div_exact(&a);
            b = b.div_exact(&a);
            i += 1;
        }
        out
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }

    /// Canonical ascending decimal-string coefficient list.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn from_strings<S: AsRef<str>>(xs: &[S]) -> Result<Self, PolyError> {
        xs.iter()
            .map(|s| BigInt::from_str(s.as_ref().trim()).map_err(|_| PolyError::Parse(s.as_ref().to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(IntPoly::new)
    }

    /// Cauchy bound: every real root has absolute value below this.
    pub fn root_bound(&self) -> BigInt {
        let lc = self.leading().abs();
        let m = self.coeffs.iter().rev().skip(1).map(|c| c.abs()).max().unwrap_or_default();
        m.div_ceil(&lc) + 1
    }
}

impl fmt::Display for IntPoly {
    /// Human-readable descending form, e.g. `x^2-20x+91`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_mag = i == 0 || !mag.is_one();
            if show_mag {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for IntPoly {
    type Err = PolyError;

    /// Parses sums of monomials (`x^4-35x^3+443x^2-2381x+4516`) and products
    /// of parenthesised factors with powers (`(x+5)^33*(x-9)^12`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(PolyError::Parse(s.to_string()));
        }
        parse_product(&compact).ok_or_else(|| PolyError::Parse(s.to_string()))
    }
}

fn parse_product(s: &str) -> Option<IntPoly> {
    if !s.contains('(') {
        return parse_sum(s);
    }
    let mut acc = IntPoly::one();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'*' {
            i += 1;
            continue;
        }
        if bytes[i] != b'(' {
            return None;
        }
        let close = s[i..].find(')')? + i;
        let inner = parse_sum(&s[i + 1..close])?;
        i = close + 1;
        let mut exp = 1u32;
        if i < bytes.len() && bytes[i] == b'^' {
            let start = i + 1;
            let mut end = start;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
            exp = s[start..end].parse().ok()?;
            i = end;
        }
        acc = acc.mul(&inner.pow(exp));
    }
    Some(acc)
}

fn parse_sum(s: &str) -> Option<IntPoly> {
    let mut coeffs: Vec<BigInt> = Vec::new();
    let mut terms = Vec::new();
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        if (ch == '+' || ch == '-') && i > 0 && !s[..i].ends_with('^') {
            terms.push(&s[start..i]);
            start = i;
        }
    }
    terms.push(&s[start..]);
    for term in terms {
        let (neg, body) = match term.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, term.strip_prefix('+').unwrap_or(term)),
        };
        if body.is_empty() {
            return None;
        }
        let (coef, deg) = match body.find('x') {
            None => (BigInt::from_str(body).ok()?, 0usize),
            Some(pos) => {
                let c = body[..pos].trim_end_matches('*');
                let c = if c.is_empty() { BigInt::one() } else { BigInt::from_str(c).ok()? };
                let rest = &body[pos + 1..];
                let d = if rest.is_empty() { 1 } else { rest.strip_prefix('^')?.parse().ok()? };
                (c, d)
            }
        };
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, BigInt::zero());
        }
        coeffs[deg] += if neg { -coef } else { coef };
    }
    Some(IntPoly::new(coeffs))
}

impl Serialize for IntPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        IntPoly::from_strings(&v).map_err(serde::de::Error::custom)
    }
}

/// Polynomial with rational coefficients, ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    pub coeffs: Vec<Rat>,
}

impl RatPoly {
    pub fn derivative(&self) -> RatPoly {
        RatPoly { coeffs: self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * rat_int(i as i64)).collect() }
    }

    pub fn scale(&self, k: &Rat) -> RatPoly {
        RatPoly { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn from_int(p: &IntPoly) -> RatPoly {
        RatPoly { coeffs: p.coeffs.iter().map(|c| rat_int(c.clone())).collect() }
    }

    fn trimmed(mut coeffs: Vec<Rat>) -> RatPoly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn monic(&self) -> RatPoly {
        match self.coeffs.last() {
            Some(lc) => self.scale(&lc.recip()),
            None => self.clone(),
        }
    }

    pub fn sub(&self, o: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let get = |v: &[Rat], i: usize| v.get(i).cloned().unwrap_or_else(Rat::zero);
        RatPoly::trimmed((0..n).map(|i| get(&self.coeffs, i) - get(&o.coeffs, i)).collect())
    }

    pub fn div_rem(&self, d: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree();
        if self.is_zero() || self.degree() < dd {
            return (RatPoly { coeffs: vec![] }, self.clone());
        }
        let mut rem = self.coeffs.clone();
        let lc = d.coeffs[dd].clone();
        let mut quot = vec![Rat::zero(); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let q = &rem[k + dd] / &lc;
            if !q.is_zero() {
                for (j, c) in d.coeffs.iter().enumerate() {
                    rem[k + j] -= &q * c;
                }
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        (RatPoly::trimmed(quot), RatPoly::trimmed(rem))
    }

    pub fn div_exact(&self, d: &RatPoly) -> RatPoly {
        let (q, r) = self.div_rem(d);
        debug_assert!(r.is_zero());
        q
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &RatPoly) -> RatPoly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Integer primitive associate with positive leading coefficient.
    pub fn to_primitive(&self) -> IntPoly {
        let den = self.coeffs.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let p = IntPoly::new(self.coeffs.iter().map(|c| (c * rat_int(den.clone())).to_integer()).collect()).primitive();
        if p.leading().is_negative() {
            p.neg()
        } else {
            p
        }
    }
}

/// `p_r = (r!/d!) p^{(d-r)}`, monic of degree `r`.
pub fn scaled_derivative(p: &IntPoly, r: usize) -> Result<RatPoly, PolyError> {
    if !p.is_monic() {
        return Err(PolyError::NotMonic(p.clone()));
    }
    let d = p.degree();
    if r < 1 || r > d {
        return Err(PolyError::OrderOutOfRange { r, d });
    }
    // coefficient of x^(r-i) is a_i * C(r,i) / C(d,i)
    let mut coeffs = vec![Rat::zero(); r + 1];
    for i in 0..=r {
        let a = p.desc(i);
        coeffs[r - i] = Rat::new(a * binomial(r as u64, i as u64), binomial(d as u64, i as u64));
    }
    Ok(RatPoly { coeffs })
}

/// Coefficients modulo `2^e`, each reduced into `[0, 2^e)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResiduePoly {
    pub modulus_exponent: u32,
    /// Ascending order, one entry per coefficient of the source polynomial.
    pub residues: Vec<u64>,
}

pub fn mod_reduce(p: &IntPoly, e: u32) -> Result<ResiduePoly, PolyError> {
    if !(1..=63).contains(&e) {
        return Err(PolyError::BadExponent(e));
    }
    let m = BigInt::one() << e;
    let residues = p.coeffs.iter().map(|c| c.mod_floor(&m).to_u64().expect("reduced")).collect();
    Ok(ResiduePoly { modulus_exponent: e, residues })
}

impl ResiduePoly {
    /// Reduces the residues further to exponent `e <= modulus_exponent`.
    pub fn truncate(&self, e: u32) -> ResiduePoly {
        assert!(e >= 1 && e <= self.modulus_exponent);
        let mask = (1u64 << e) - 1;
        ResiduePoly { modulus_exponent: e, residues: self.residues.iter().map(|r| r & mask).collect() }
    }
}

/// Closed interval with exact surd endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurdInterval {
    pub lo: QuadNum,
    pub hi: QuadNum,
}

impl SurdInterval {
    pub fn new(lo: QuadNum, hi: QuadNum) -> Result<Self, PolyError> {
        if lo > hi {
            return Err(PolyError::BadInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(SurdInterval { lo, hi })
    }

    pub fn ints(lo: i64, hi: i64) -> Self {
        Self::new(QuadNum::from_int(lo), QuadNum::from_int(hi)).expect("ordered")
    }

    pub fn contains(&self, x: &QuadNum) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

impl fmt::Display for SurdInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Sturm sequence of a square-free polynomial.
pub fn sturm_sequence(p: &IntPoly) -> Vec<IntPoly> {
    let mut seq = vec![p.clone()];
    if p.degree() == 0 {
        return seq;
    }
    seq.push(p.derivative().primitive());
    loop {
        let n = seq.len();
        let r = seq[n - 2].signed_pseudo_rem(&seq[n - 1]);
        if r.is_zero() {
            break;
        }
        seq.push(r.neg());
    }
    seq
}

fn sign_variations(seq: &[IntPoly], x: &QuadNum) -> usize {
    let mut last = 0;
    let mut count = 0;
    for p in seq {
        let s = p.sign_at(x);
        if s == 0 {
            continue;
        }
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Distinct roots of a square-free polynomial in the closed interval.
pub fn count_distinct_squarefree(seq: &[IntPoly], iv: &SurdInterval) -> usize {
    let p = &seq[0];
    if p.degree() == 0 {
        return 0;
    }
    let va = sign_variations(seq, &iv.lo);
    let vb = sign_variations(seq, &iv.hi);
    let at_lo = usize::from(p.sign_at(&iv.lo) == 0);
    va.saturating_sub(vb) + at_lo
}

/// Root counts of `p` on a closed interval: (distinct, with multiplicity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootCount {
    pub distinct: usize,
    pub with_multiplicity: usize,
}

/// Precomputed Sturm data for repeated interval queries on one polynomial.
#[derive(Debug, Clone)]
pub struct RootCounter {
    parts: Vec<(Vec<IntPoly>, u32)>,
}

impl RootCounter {
    pub fn new(p: &IntPoly) -> Self {
        assert!(!p.is_zero(), "root counting needs a nonzero polynomial");
        if p.degree() == 0 {
            return RootCounter { parts: vec![] };
        }
        if p.gcd(&p.derivative()).degree() == 0 {
            return RootCounter { parts: vec![(sturm_sequence(p), 1)] };
        }
        let parts = p.squarefree_decomposition().into_iter().map(|(q, m)| (sturm_sequence(&q), m)).collect();
        RootCounter { parts }
    }

    pub fn count(&self, iv: &SurdInterval) -> RootCount {
        let mut distinct = 0;
        let mut with_multiplicity = 0;
        for (seq, m) in &self.parts {
            let c = count_distinct_squarefree(seq, iv);
            distinct += c;
            with_multiplicity += c * *m as usize;
        }
        RootCount { distinct, with_multiplicity }
    }
}

pub fn sturm_root_count(p: &IntPoly, iv: &SurdInterval) -> RootCount {
    RootCounter::new(p).count(iv)
}

/// Power sums `s_1..s_K` of the roots of a monic polynomial (Newton).
pub fn newton_power_sums(p: &IntPoly, k: usize) -> Result<Vec<BigInt>, PolyError> {
    if !p.is_monic() {
        return Err(PolyError::NotMonic(p.clone()));
    }
    let d = p.degree();
    let mut s: Vec<BigInt> = Vec::with_capacity(k);
    for m in 1..=k {
        // s_m + a_1 s_{m-1} + ... + a_{m-1} s_1 + m a_m = 0
        let mut acc = if m <= d { p.desc(m) * m } else { BigInt::zero() };
        for i in 1..m {
            if i > d {
                break;
            }
            acc += p.desc(i) * &s[m - i - 1];
        }
        s.push(-acc);
    }
    Ok(s)
}

/// Monic degree-`d` polynomial with the given first `d` power sums.
pub fn poly_from_power_sums(s: &[BigInt], d: usize) -> Result<IntPoly, PolyError> {
    assert!(s.len() >= d);
    let mut a: Vec<Rat> = vec![Rat::one()];
    for m in 1..=d {
        let mut acc = rat_int(s[m - 1].clone());
        for i in 1..m {
            acc += &a[i] * rat_int(s[m - i - 1].clone());
        }
        a.push(-acc / rat_int(m as i64));
    }
    let coeffs = a
        .into_iter()
        .rev()
        .map(|r| r.is_integer().then(|| r.to_integer()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| PolyError::Parse("power sums do not give integer coefficients".into()))?;
    Ok(IntPoly::new(coeffs))
}

/// Congruence pattern of a characteristic polynomial of a Seidel matrix
/// modulo 2: `(x+1)^n` for even order, `x(x+1)^(n-1)` for odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityPattern {
    EvenOrder,
    OddOrder,
}

pub fn parity_profile_check(p: &IntPoly, pattern: ParityPattern) -> bool {
    if !p.is_monic() {
        return false;
    }
    let n = p.degree() as u64;
    let target = match pattern {
        ParityPattern::EvenOrder => IntPoly::from_i64(&[1, 1]).pow(n as u32),
        ParityPattern::OddOrder => {
            if n == 0 {
                return false;
            }
            IntPoly::x().mul(&IntPoly::from_i64(&[1, 1]).pow(n as u32 - 1))
        }
    };
    let a = mod_reduce(p, 1).expect("e = 1");
    let b = mod_reduce(&target, 1).expect("e = 1");
    a == b
}

/// `(x+1)^d mod 2` check used for totally positive factors.
pub fn has_binomial_parity(p: &IntPoly) -> bool {
    let d = p.degree() as u64;
    (0..=d).all(|i| (p.desc(i as usize).is_odd()) == binomial(d, i).is_odd())
}

/// Closed dyadic interval `[lo, hi] / 2^bits`.
#[derive(Debug, Clone)]
struct Dyadic {
    lo: BigInt,
    hi: BigInt,
}

impl Dyadic {
    fn exact(v: BigInt) -> Self {
        Dyadic { lo: v.clone(), hi: v }
    }

    fn add(&self, o: &Dyadic) -> Dyadic {
        Dyadic { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    fn neg(&self) -> Dyadic {
        Dyadic { lo: -&self.hi, hi: -&self.lo }
    }

    fn mul(&self, o: &Dyadic, bits: u32) -> Dyadic {
        let prods = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let min = prods.iter().min().unwrap();
        let max = prods.iter().max().unwrap();
        Dyadic { lo: floor_shr(min, bits), hi: ceil_shr(max, bits) }
    }

    /// Square root of a nonnegative interval.
    fn sqrt(&self, bits: u32) -> Dyadic {
        let lo = if self.lo.is_positive() { (&self.lo << bits).sqrt() } else { BigInt::zero() };
        let hi_sq = &self.hi << bits;
        let mut hi = hi_sq.sqrt();
        if &hi * &hi < hi_sq {
            hi += 1;
        }
        Dyadic { lo, hi }
    }
}

fn floor_shr(x: &BigInt, bits: u32) -> BigInt {
    x >> bits
}

fn ceil_shr(x: &BigInt, bits: u32) -> BigInt {
    -((-x) >> bits)
}

/// Enclosures of all real roots (with multiplicity) of `p`, each of width at
/// most `2^-bits`, as dyadic intervals scaled by `2^bits`. Roots are listed in
/// increasing order.
fn real_root_enclosures(p: &IntPoly, bits: u32) -> Vec<Dyadic> {
    let bound = rat_int(p.root_bound());
    let scale = rat_int(BigInt::one() << bits);
    isolate_real_roots(p, &-bound.clone(), &bound, bits)
        .into_iter()
        .map(|(lo, hi)| Dyadic { lo: (lo * &scale).floor().to_integer(), hi: (hi * &scale).ceil().to_integer() })
        .collect()
}

/// Real roots of `p` in `[lo, hi]`, repeated by multiplicity and sorted,
/// each enclosed in a rational interval of width at most `2^-bits`
/// (exact roots met during bisection get zero width).
pub fn isolate_real_roots(p: &IntPoly, lo: &Rat, hi: &Rat, bits: u32) -> Vec<(Rat, Rat)> {
    let tol = Rat::new(BigInt::one(), BigInt::one() << bits);
    let q_at = |x: &Rat| QuadNum::from_rat(x.clone());
    let mut out = Vec::new();
    if p.degree() == 0 || lo > hi {
        return out;
    }
    for (q, mult) in p.squarefree_decomposition() {
        let seq = sturm_sequence(&q);
        let mut roots: Vec<(Rat, Rat)> = Vec::new();
        if q.sign_at(&q_at(lo)) == 0 {
            roots.push((lo.clone(), lo.clone()));
        }
        // Half-open intervals (a, b]: V(a) - V(b) distinct roots.
        let mut stack = vec![(lo.clone(), hi.clone())];
        while let Some((a, b)) = stack.pop() {
            let n = sign_variations(&seq, &q_at(&a)).saturating_sub(sign_variations(&seq, &q_at(&b)));
            if n == 0 {
                continue;
            }
            if n > 1 {
                let m = (&a + &b) / rat_int(2);
                stack.push((a, m.clone()));
                stack.push((m, b));
                continue;
            }
            let (mut a, mut b) = (a, b);
            let sb = q.sign_at(&q_at(&b));
            if sb == 0 {
                roots.push((b.clone(), b));
                continue;
            }
            while &b - &a > tol {
                let m = (&a + &b) / rat_int(2);
                let sm = q.sign_at(&q_at(&m));
                if sm == 0 {
                    a = m.clone();
                    b = m;
                    break;
                }
                if sm == sb {
                    b = m;
                } else {
                    a = m;
                }
            }
            roots.push((a, b));
        }
        for r in roots {
            for _ in 0..mult {
                out.push(r.clone());
            }
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

/// Every monic integer `f` of degree `deg g` whose roots take exactly one of
/// `c + sqrt(l)`, `c - sqrt(l)` for each root `l` of `g`, i.e. the monic
/// factors of `g((x-c)^2)` that split it as `f(x) * (-1)^d f(2c - x)`.
pub fn sign_split_factor(g: &IntPoly, c: &BigInt) -> Result<Vec<IntPoly>, PolyError> {
    if !g.is_monic() {
        return Err(PolyError::NotMonic(g.clone()));
    }
    let d = g.degree();
    if d == 0 {
        return Ok(vec![IntPoly::one()]);
    }
    let bound = g.root_bound();
    let nonneg = SurdInterval::new(QuadNum::from_int(0), QuadNum::from_rat(rat_int(bound))).expect("ordered");
    if sturm_root_count(g, &nonneg).with_multiplicity != d {
        return Err(PolyError::NotTotallyPositive(g.clone()));
    }
    let target = g.compose_square_shift(c);
    let mut bits = 64u32;
    loop {
        match sign_split_at_precision(g, c, &target, bits) {
            Some(found) => return Ok(found),
            None if bits >= 8192 => return Err(PolyError::PrecisionExhausted { bits }),
            None => bits *= 2,
        }
    }
}

/// Returns `None` when the interval enclosures are too wide to decide.
fn sign_split_at_precision(g: &IntPoly, c: &BigInt, target: &IntPoly, bits: u32) -> Option<Vec<IntPoly>> {
    let d = g.degree();
    let roots = real_root_enclosures(g, bits);
    debug_assert_eq!(roots.len(), d);
    let sqrts: Vec<Dyadic> = roots.iter().map(|r| r.sqrt(bits)).collect();
    let center = Dyadic::exact(c << bits);
    let one = Dyadic::exact(BigInt::one() << bits);
    let quarter = BigInt::one() << (bits - 2);
    let mut found: Vec<IntPoly> = Vec::new();
    for mask in 0u64..(1u64 << d) {
        // coefficients of prod (x - (c + s_i sqrt(l_i))), ascending
        let mut poly: Vec<Dyadic> = vec![one.clone()];
        for (i, s) in sqrts.iter().enumerate() {
            let root = if mask >> i & 1 == 1 { center.add(&s.neg()) } else { center.add(s) };
            let neg_root = root.neg();
            let mut next = vec![Dyadic::exact(BigInt::zero()); poly.len() + 1];
            for (k, coef) in poly.iter().enumerate() {
                next[k + 1] = next[k + 1].add(coef);
                next[k] = next[k].add(&coef.mul(&neg_root, bits));
            }
            poly = next;
        }
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut integral = true;
        for iv in &poly {
            if &iv.hi - &iv.lo > quarter {
                return None;
            }
            // integers n with lo <= n 2^bits <= hi
            let n_lo = ceil_shr(&iv.lo, bits);
            let n_hi = floor_shr(&iv.hi, bits);
            if n_lo > n_hi {
                integral = false;
                break;
            }
            coeffs.push(n_lo);
        }
        if !integral {
            continue;
        }
        let f = IntPoly::new(coeffs);
        if f.degree() == d && f.divides(target) && !found.contains(&f) {
            found.push(f);
        }
    }
    found.sort();
    Some(found)
}

/// True iff `g(x^2)` admits no sign split, which for irreducible totally
/// positive `g` is the same as `g(x^2)` being irreducible.
pub fn is_x2_irreducible(g: &IntPoly) -> Result<bool, PolyError> {
    Ok(sign_split_factor(g, &BigInt::zero())?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPoly {
        s.parse().unwrap()
    }

    fn q(s: &str) -> QuadNum {
        s.parse().unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let ten = BigInt::from(10);
        assert_eq!(p("x-9").compose_square_shift(&ten), p("x^2-20x+91"));
        assert_eq!(p("x-1").compose_square_shift(&ten), p("x^2-20x+99"));
        assert_eq!(p("x^2-20x+91").exact_div(&p("x-7")).unwrap(), p("x-13"));
        assert!(matches!(p("x^2+1").exact_div(&p("x-1")), Err(PolyError::Inexact { .. })));
        assert_eq!(p("x^2-4x+1").compose_square_shift(&BigInt::zero()).degree(), 4);
    }

    #[test]
    fn parse_and_display() {
        let f = p("(x+5)^2*(x-1)");
        assert_eq!(f, p("x^3+9x^2+15x-25"));
        assert_eq!(f.to_string(), "x^3+9x^2+15x-25");
        assert_eq!(p("x").to_string(), "x");
        assert_eq!(p("-x^2+1").to_strings(), vec!["1", "0", "-1"]);
        assert!("(x+1".parse::<IntPoly>().is_err());
        assert!("".parse::<IntPoly>().is_err());
    }

    #[test]
    fn scaled_derivative_examples() {
        let d = scaled_derivative(&p("x^2-6x+3"), 1).unwrap();
        assert_eq!(d, RatPoly::from_int(&p("x-3")));
        let d = scaled_derivative(&p("x^4-8x^3+16x^2-8x+1"), 3).unwrap();
        assert_eq!(d, RatPoly::from_int(&p("x^3-6x^2+8x-2")));
        let f = p("x^3-7x^2+11x-1");
        assert_eq!(scaled_derivative(&f, 3).unwrap(), RatPoly::from_int(&f));
        assert!(matches!(scaled_derivative(&f, 0), Err(PolyError::OrderOutOfRange { .. })));
        assert!(matches!(scaled_derivative(&f, 4), Err(PolyError::OrderOutOfRange { .. })));
    }

    #[test]
    fn sturm_examples() {
        let c = sturm_root_count(&p("x^2-6x+3"), &SurdInterval::ints(0, 6));
        assert_eq!((c.distinct, c.with_multiplicity), (2, 2));
        let c = sturm_root_count(&p("(x-9)^2"), &SurdInterval::ints(9, 9));
        assert_eq!((c.distinct, c.with_multiplicity), (1, 2));
        let iv = SurdInterval::new(q("10-sqrt(5)"), q("10+sqrt(5)")).unwrap();
        let c = sturm_root_count(&p("x^2-20x+95"), &iv);
        assert_eq!((c.distinct, c.with_multiplicity), (2, 2));
        let c = sturm_root_count(&p("x^2+1"), &SurdInterval::ints(-10, 10));
        assert_eq!(c.with_multiplicity, 0);
        let c = sturm_root_count(&p("(x)^3*(x-1)^2"), &SurdInterval::ints(0, 0));
        assert_eq!((c.distinct, c.with_multiplicity), (1, 3));
    }

    #[test]
    fn power_sum_examples() {
        let s = newton_power_sums(&p("x^2-3x+2"), 2).unwrap();
        assert_eq!(s, vec![BigInt::from(3), BigInt::from(5)]);
        let s = newton_power_sums(&p("x^3"), 3).unwrap();
        assert!(s.iter().all(|v| v.is_zero()));
        let chi = p("(x+5)^33*(x-9)^10*(x-11)^5*(x^2-20x+95)");
        let s = newton_power_sums(&chi, 2).unwrap();
        assert_eq!(s, vec![BigInt::from(0), BigInt::from(2450)]);
    }

    #[test]
    fn mod_reduce_examples() {
        let r = mod_reduce(&p("x^2-2x-3"), 1).unwrap();
        assert_eq!(r.residues, vec![1, 0, 1]);
        let jmi = p("(x-3)*(x+1)^3");
        assert_eq!(mod_reduce(&jmi, 1).unwrap(), mod_reduce(&p("(x+1)^4"), 1).unwrap());
        assert_eq!(mod_reduce(&p("x^2-2"), 1).unwrap().residues, vec![0, 0, 1]);
        assert!(mod_reduce(&p("x"), 0).is_err());
        assert_eq!(mod_reduce(&p("-1"), 5).unwrap().residues, vec![31]);
    }

    #[test]
    fn sign_split_examples() {
        let ten = BigInt::from(10);
        let zero = BigInt::zero();
        assert_eq!(sign_split_factor(&p("x-9"), &ten).unwrap(), vec![p("x-13"), p("x-7")]);
        assert!(sign_split_factor(&p("x^2-4x+1"), &zero).unwrap().is_empty());
        let split = sign_split_factor(&p("x^2-6x+1"), &zero).unwrap();
        assert_eq!(split.len(), 2);
        for f in &split {
            assert!(f.divides(&p("x^4-6x^2+1")));
        }
        assert!(matches!(sign_split_factor(&p("x+1"), &zero), Err(PolyError::NotTotallyPositive(_))));
    }

    #[test]
    fn x2_irreducibility_examples() {
        assert!(is_x2_irreducible(&p("x-3")).unwrap());
        assert!(!is_x2_irreducible(&p("x-9")).unwrap());
        assert!(!is_x2_irreducible(&p("x^2-6x+1")).unwrap());
    }

    #[test]
    fn parity_examples() {
        let chi = p("(x+5)^33*(x-9)^12*(x-11)^4*(x-13)");
        assert!(parity_profile_check(&chi, ParityPattern::EvenOrder));
        assert!(!parity_profile_check(&p("x^2-2"), ParityPattern::EvenOrder));
        assert!(parity_profile_check(&p("(x+1)^7"), ParityPattern::EvenOrder));
        assert!(parity_profile_check(&p("(x-2)*(x+1)^2"), ParityPattern::OddOrder));
    }

    #[test]
    fn squarefree_decomposition_multiplicities() {
        let f = p("(x-1)*(x-2)^2*(x+3)^3");
        let parts = f.squarefree_decomposition();
        let mut got: Vec<(IntPoly, u32)> = parts;
        got.sort_by_key(|(_, m)| *m);
        assert_eq!(got, vec![(p("x-1"), 1), (p("x-2"), 2), (p("x+3"), 3)]);
    }
}
