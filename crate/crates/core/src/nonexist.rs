//! Ruling out a Seidel spectrum through its one-vertex-deleted submatrices.
//!
//! Deleting vertex `j` from `S` leaves `S'` with
//! `χ_{S'} = χ_S Σ_i α²_ij / (x - λ_i)`, so `χ_{S'}` is `χ_S / m_S` times a
//! polynomial `f` whose top three coefficients are known and whose roots
//! interlace the distinct eigenvalues. Enumerating `f`, sieving by 2-adic
//! constraints and converting each survivor into a row of squared angles
//! leaves an integer system: the multiplicity of each row must reproduce the
//! eigenvalue multiplicities. An infeasible system proves nonexistence.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::classes::{membership_filter, ClassError, ClassStore};
use crate::exact::{rat_int, square_free_decomposition, ExactError, QuadNum, Rat};
use crate::pipeline::factored_string;
use crate::poly::{IntPoly, PolyError, SurdInterval};
use crate::seidel::shifted_divisibility;
use crate::tpenum::{enumerate, EnumSpec, TpError};

#[derive(Debug, Error)]
pub enum NonexistError {
    #[error("cannot parse spectrum {0:?}")]
    Parse(String),
    #[error("unsupported spectrum: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Enum(#[from] TpError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

fn rat_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn ser_display<T: fmt::Display, S: Serializer>(xs: &[T], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|x| x.to_string()))
}

fn ser_rats<S: Serializer>(xs: &[Rat], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(rat_string))
}

/// A distinct eigenvalue, its minimal polynomial (degree 1 or 2) and multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eigenvalue {
    pub value: QuadNum,
    pub factor: IntPoly,
    pub multiplicity: u32,
}

/// A proposed characteristic polynomial, factored into linear and
/// irreducible quadratic integer factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumCandidate {
    pub order: usize,
    pub factors: Vec<(IntPoly, u32)>,
    /// Distinct eigenvalues in increasing order.
    pub eigenvalues: Vec<Eigenvalue>,
}

/// The two real roots of an irreducible monic quadratic, smaller first.
fn quadratic_roots(q: &IntPoly) -> Result<(QuadNum, QuadNum), NonexistError> {
    let b = q.coeff(1);
    let c = q.coeff(0);
    let disc = &b * &b - BigInt::from(4) * &c;
    if !disc.is_positive() {
        return Err(NonexistError::Unsupported(format!("{q} has no real roots")));
    }
    let (s, d) = square_free_decomposition(&disc);
    let d = d.to_u64().ok_or_else(|| NonexistError::Unsupported(format!("radicand of {q} too large")))?;
    if d == 1 {
        return Err(NonexistError::Unsupported(format!("{q} is reducible")));
    }
    let center = Rat::new(-b, BigInt::from(2));
    let half = Rat::new(s, BigInt::from(2));
    Ok((QuadNum::new(center.clone(), -half.clone(), d)?, QuadNum::new(center, half, d)?))
}

impl SpectrumCandidate {
    pub fn from_factors(factors: Vec<(IntPoly, u32)>) -> Result<Self, NonexistError> {
        let mut merged: BTreeMap<IntPoly, u32> = BTreeMap::new();
        for (p, m) in factors {
            if m == 0 || p.degree() == 0 {
                continue;
            }
            if !p.is_monic() || p.degree() > 2 {
                return Err(NonexistError::Unsupported(format!("factor {p} must be monic of degree 1 or 2")));
            }
            *merged.entry(p).or_default() += m;
        }
        let mut eigenvalues = Vec::new();
        let mut order = 0usize;
        for (p, &m) in &merged {
            order += p.degree() * m as usize;
            if p.degree() == 1 {
                let v = QuadNum::from_rat(rat_int(-p.coeff(0)));
                eigenvalues.push(Eigenvalue { value: v, factor: p.clone(), multiplicity: m });
            } else {
                let (a, b) = quadratic_roots(p)?;
                eigenvalues.push(Eigenvalue { value: a, factor: p.clone(), multiplicity: m });
                eigenvalues.push(Eigenvalue { value: b, factor: p.clone(), multiplicity: m });
            }
        }
        let mut radicands: Vec<u64> = eigenvalues.iter().map(|e| e.value.radicand()).filter(|&d| d > 1).collect();
        radicands.dedup();
        if radicands.windows(2).any(|w| w[0] != w[1]) {
            return Err(NonexistError::Unsupported("eigenvalues from two different quadratic fields".into()));
        }
        eigenvalues.sort_by(|a, b| a.value.cmp(&b.value));
        if eigenvalues.windows(2).any(|w| w[0].value == w[1].value) {
            return Err(NonexistError::Unsupported("repeated eigenvalue across factors".into()));
        }
        Ok(SpectrumCandidate { order, factors: merged.into_iter().collect(), eigenvalues })
    }

    /// Factors a characteristic polynomial whose irreducible factors all
    /// have degree at most two; `None` otherwise.
    pub fn from_char_poly(p: &IntPoly) -> Option<Self> {
        // Fujiwara: every root has modulus at most 2 max |a_k|^(1/k).
        let fuji = (1..=p.degree())
            .map(|k| p.desc(k).abs().to_f64().unwrap_or(f64::INFINITY).powf(1.0 / k as f64))
            .fold(0.0f64, f64::max);
        if !p.is_monic() || !fuji.is_finite() {
            return None;
        }
        let bound = BigInt::from((2.0 * fuji).ceil() as i64 + 1);
        let mut factors = Vec::new();
        for (part, m) in p.squarefree_decomposition() {
            let part = if part.leading().is_negative() { part.neg() } else { part };
            for (q, k) in factor_small(&part, &-bound.clone(), &bound)? {
                factors.push((q, k * m));
            }
        }
        SpectrumCandidate::from_factors(factors).ok()
    }

    pub fn char_poly(&self) -> IntPoly {
        IntPoly::product(self.factors.iter().map(|(p, m)| p.pow(*m)).collect::<Vec<_>>().iter())
    }

    /// Product of the distinct irreducible factors.
    pub fn minimal_poly(&self) -> IntPoly {
        IntPoly::product(self.factors.iter().map(|(p, _)| p))
    }

    pub fn multiplicities(&self) -> Vec<u64> {
        self.eigenvalues.iter().map(|e| e.multiplicity as u64).collect()
    }
}

impl fmt::Display for SpectrumCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&factored_string(&self.factors))
    }
}

impl FromStr for SpectrumCandidate {
    type Err = NonexistError;

    /// Parses `(x+5)^33*(x-9)^12*(x-11)^4*(x-13)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || NonexistError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pieces = Vec::new();
        let (mut depth, mut start) = (0i32, 0usize);
        for (i, c) in compact.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '*' if depth == 0 => {
                    pieces.push(&compact[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
            if depth < 0 {
                return Err(err());
            }
        }
        pieces.push(&compact[start..]);
        let mut factors = Vec::new();
        for piece in pieces {
            let (body, mult) = match piece.strip_prefix('(') {
                Some(rest) => {
                    let close = rest.rfind(')').ok_or_else(err)?;
                    let tail = &rest[close + 1..];
                    let m = match tail.strip_prefix('^') {
                        Some(e) => e.parse::<u32>().map_err(|_| err())?,
                        None if tail.is_empty() => 1,
                        None => return Err(err()),
                    };
                    (&rest[..close], m)
                }
                None => (piece, 1),
            };
            let p: IntPoly = body.parse().map_err(|_| err())?;
            factors.push((p, mult));
        }
        SpectrumCandidate::from_factors(factors)
    }
}

/// `χ_{S'} = quotient * f` with `f` monic of degree `d - 1` and top
/// coefficients `1, b1, b2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmatrixConstraints {
    pub quotient: IntPoly,
    pub degree: usize,
    pub b1: BigInt,
    pub b2: BigInt,
}

pub fn submatrix_constraints(s: &SpectrumCandidate) -> Result<SubmatrixConstraints, NonexistError> {
    let m = s.minimal_poly();
    let quotient = s.char_poly().exact_div(&m)?;
    let d = m.degree();
    let a1 = m.desc(1);
    let a2 = if d >= 2 { m.desc(2) } else { BigInt::zero() };
    Ok(SubmatrixConstraints { quotient, degree: d - 1, b1: a1, b2: a2 + BigInt::from(s.order as i64 - 1) })
}

/// `[λ_i, λ_{i+1}]` for consecutive distinct eigenvalues.
pub fn interlacing_boxes(s: &SpectrumCandidate) -> Vec<SurdInterval> {
    s.eigenvalues
        .windows(2)
        .map(|w| SurdInterval::new(w[0].value.clone(), w[1].value.clone()).expect("sorted eigenvalues"))
        .collect()
}

/// Every `f` allowed by the top coefficients and interlacing.
pub fn enumerate_submatrix_candidates(s: &SpectrumCandidate) -> Result<Vec<IntPoly>, NonexistError> {
    let c = submatrix_constraints(s)?;
    if c.degree == 0 {
        return Ok(vec![IntPoly::one()]);
    }
    let small = |v: &BigInt| v.to_i64().ok_or_else(|| NonexistError::Unsupported(format!("coefficient {v} too large")));
    let boxes = interlacing_boxes(s);
    let hull = SurdInterval::new(boxes[0].lo.clone(), boxes[boxes.len() - 1].hi.clone())?;
    let mut spec = EnumSpec::new(c.degree, -small(&c.b1)?, hull).with_boxes(boxes);
    if c.degree >= 2 {
        spec = spec.with_fixed(2, small(&c.b2)?);
    }
    Ok(enumerate(&spec)?.polynomials)
}

/// 2-adic sieve applied to `χ_{S'} = quotient * f`.
#[derive(Debug, Clone)]
pub enum SubmatrixFilter {
    /// Odd order: membership in the complete class set mod `2^e`.
    Classes(crate::classes::ClassSet),
    /// Even order: `2^r` divides every `a_r` of `χ_{S'}(x - 1)`.
    ShiftDivisibility,
}

impl SubmatrixFilter {
    pub fn describe(&self) -> String {
        match self {
            SubmatrixFilter::Classes(cs) => {
                format!(
                    "membership in the {} classes of order-{} characteristic polynomials mod 2^{}",
                    cs.len(),
                    cs.n,
                    cs.e
                )
            }
            SubmatrixFilter::ShiftDivisibility => "2^r divides a_r of the shifted polynomial".to_string(),
        }
    }
}

pub fn congruence_and_parity_filter(
    candidates: &[IntPoly],
    quotient: &IntPoly,
    filter: &SubmatrixFilter,
) -> Result<Vec<IntPoly>, NonexistError> {
    if let SubmatrixFilter::Classes(cs) = filter {
        if !cs.complete {
            return Err(ClassError::Incomplete { n: cs.n, e: cs.e }.into());
        }
    }
    let keep: Vec<bool> = candidates
        .par_iter()
        .map(|f| {
            let chi = quotient.mul(f);
            match filter {
                SubmatrixFilter::Classes(cs) => membership_filter(&chi, cs).unwrap_or(false),
                SubmatrixFilter::ShiftDivisibility => shifted_divisibility(&chi),
            }
        })
        .collect();
    Ok(candidates.iter().zip(keep).filter(|(_, k)| *k).map(|(f, _)| f.clone()).collect())
}

/// Squared angles `α²_i`, one per distinct eigenvalue in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AngleRow {
    pub entries: Vec<QuadNum>,
}

impl fmt::Display for AngleRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for AngleRow {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ser_display(&self.entries, s)
    }
}

/// Row of the angle matrix belonging to a putative `χ_{S'}`, or `None` when
/// `χ_{S'}` is incompatible with `χ_S` (wrong divisibility or a negative entry).
pub fn angle_row(s: &SpectrumCandidate, chi_prime: &IntPoly) -> Result<Option<AngleRow>, NonexistError> {
    let chi = s.char_poly();
    let mut entries = Vec::with_capacity(s.eigenvalues.len());
    for ev in &s.eigenvalues {
        let q = &ev.factor;
        let m = ev.multiplicity;
        let Ok(h) = chi_prime.exact_div(&q.pow(m - 1)) else {
            return Ok(None);
        };
        let r = chi.exact_div(&q.pow(m))?;
        // α² = lim (x - λ) χ_{S'}/χ_S = H(λ) / (q'(λ) R(λ))
        let num = h.eval_quad(&ev.value);
        let den = q.derivative().eval_quad(&ev.value).checked_mul(&r.eval_quad(&ev.value))?;
        let a = num.checked_div(&den)?;
        if a.sign() < 0 {
            return Ok(None);
        }
        entries.push(a);
    }
    let mut sum = QuadNum::from_int(0);
    for e in &entries {
        sum = sum.checked_add(e)?;
    }
    if sum != QuadNum::from_int(1) {
        return Ok(None);
    }
    Ok(Some(AngleRow { entries }))
}

/// Recovers `χ_{S'} = χ_S Σ α²_i / (x - λ_i)` from a row.
pub fn reconstruct_submatrix_poly(s: &SpectrumCandidate, row: &AngleRow) -> Result<IntPoly, NonexistError> {
    // Group conjugate eigenvalues: for a quadratic factor q the two terms
    // combine to (a(x - λ') + a'(x - λ)) / q(x), a rational polynomial.
    let chi = s.char_poly();
    let mut total: Vec<Rat> = vec![Rat::zero(); chi.degree()];
    let mut i = 0;
    while i < s.eigenvalues.len() {
        let ev = &s.eigenvalues[i];
        let (numer, step): (Vec<Rat>, usize) = if ev.factor.degree() == 1 {
            (
                vec![row.entries[i]
                    .as_rat()
                    .cloned()
                    .ok_or(ExactError::Parse("surd entry on rational eigenvalue".into()))?],
                1,
            )
        } else {
            let j = s.eigenvalues.iter().position(|e| e.factor == ev.factor && e.value != ev.value).expect("conjugate");
            let (a, b) = (&row.entries[i], &row.entries[j]);
            let (l, lc) = (&s.eigenvalues[i].value, &s.eigenvalues[j].value);
            // a(x - lc) + b(x - l) = (a + b) x - (a lc + b l)
            let lin = a.checked_add(b)?;
            let cst = a.checked_mul(lc)?.checked_add(&b.checked_mul(l)?)?;
            let to_rat = |q: QuadNum| q.as_rat().cloned().ok_or(ExactError::Parse("non-rational combination".into()));
            (vec![-to_rat(cst)?, to_rat(lin)?], 1)
        };
        if ev.factor.degree() == 2 && s.eigenvalues[..i].iter().any(|e| e.factor == ev.factor) {
            i += step;
            continue;
        }
        let rest = chi.exact_div(&ev.factor)?;
        for (k, c) in rest.coeffs().iter().enumerate() {
            for (l, n) in numer.iter().enumerate() {
                total[k + l] += Rat::from_integer(c.clone()) * n;
            }
        }
        i += step;
    }
    let mut coeffs = Vec::with_capacity(total.len());
    for c in total {
        if !c.denom().is_one() {
            return Err(ExactError::Parse("non-integral reconstruction".into()).into());
        }
        coeffs.push(c.numer().clone());
    }
    Ok(IntPoly::new(coeffs))
}

/// Nonnegative integers `n_j` with `Σ n_j = total` and `Σ n_j row_j = target`.
#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    pub rows: Vec<AngleRow>,
    pub total: u64,
    pub target: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `y` with `yᵀA = 0` and `yᵀb ≠ 0`: no real solution at all.
    Inconsistent {
        #[serde(serialize_with = "ser_rats")]
        multipliers: Vec<Rat>,
    },
    /// `y` with `yᵀA <= 0` and `yᵀb > 0`: no nonnegative real solution.
    Farkas {
        #[serde(serialize_with = "ser_rats")]
        multipliers: Vec<Rat>,
    },
    /// Real solutions exist but the exhaustive lattice search found no integer one.
    NoIntegerPoint { searched: u64 },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Feasibility {
    Infeasible { certificate: Certificate },
    Feasible { solutions: Vec<Vec<u64>>, truncated: bool },
}

/// The linear system behind a [`FeasibilityProblem`], with a label per equation.
#[derive(Debug, Clone, Serialize)]
pub struct LinearSystem {
    pub labels: Vec<String>,
    #[serde(skip)]
    pub a: Vec<Vec<Rat>>,
    #[serde(skip)]
    pub b: Vec<Rat>,
}

impl FeasibilityProblem {
    /// One equation for the row count, one per column for rational parts and
    /// one per column and radicand for surd parts (which must vanish).
    pub fn system(&self) -> LinearSystem {
        let k = self.rows.len();
        let mut labels = vec!["rows".to_string()];
        let mut a = vec![vec![Rat::one(); k]];
        let mut b = vec![rat_int(self.total as i64)];
        for (i, &t) in self.target.iter().enumerate() {
            labels.push(format!("column {} rational part", i + 1));
            a.push(self.rows.iter().map(|r| r.entries[i].rational_part().clone()).collect());
            b.push(rat_int(t as i64));
            let mut radicands: Vec<u64> =
                self.rows.iter().map(|r| r.entries[i].radicand()).filter(|&d| d > 1).collect();
            radicands.sort();
            radicands.dedup();
            for d in radicands {
                labels.push(format!("column {} sqrt({d}) part", i + 1));
                a.push(
                    self.rows
                        .iter()
                        .map(
                            |r| {
                                if r.entries[i].radicand() == d {
                                    r.entries[i].surd_part().clone()
                                } else {
                                    Rat::zero()
                                }
                            },
                        )
                        .collect(),
                );
                b.push(Rat::zero());
            }
        }
        LinearSystem { labels, a, b }
    }
}

/// Reduced row echelon form of `[A | b]`, tracking `E` with `E [A|b] = R`.
struct Rref {
    r: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    e: Vec<Vec<Rat>>,
    pivots: Vec<usize>,
}

#[allow(clippy::needless_range_loop)]
fn rref(a: &[Vec<Rat>], b: &[Rat], ncols: usize) -> Rref {
    let m = a.len();
    let mut r: Vec<Vec<Rat>> = a.to_vec();
    let mut rhs = b.to_vec();
    let mut e: Vec<Vec<Rat>> =
        (0..m).map(|i| (0..m).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m).find(|&i| !r[i][col].is_zero()) else { continue };
        r.swap(row, p);
        rhs.swap(row, p);
        e.swap(row, p);
        let inv = r[row][col].recip();
        for x in r[row].iter_mut() {
            *x *= &inv;
        }
        rhs[row] *= &inv;
        for x in e[row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m {
            if i != row && !r[i][col].is_zero() {
                let f = r[i][col].clone();
                for j in 0..ncols {
                    let v = &f * &r[row][j];
                    r[i][j] -= v;
                }
                let v = &f * &rhs[row];
                rhs[i] -= v;
                for j in 0..m {
                    let v = &f * &e[row][j];
                    e[i][j] -= v;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    Rref { r, rhs, e, pivots }
}

/// Phase-one simplex with Bland's rule. Returns `None` when `Ax = b, x >= 0`
/// is feasible, otherwise the dual vector certifying infeasibility.
#[allow(clippy::needless_range_loop)]
fn phase_one(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let m = a.len();
    let k = if m == 0 { 0 } else { a[0].len() };
    let width = k + m;
    // Normalize to b >= 0.
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut signs = Vec::with_capacity(m);
    for i in 0..m {
        let s = if b[i].is_negative() { -Rat::one() } else { Rat::one() };
        let mut row: Vec<Rat> = a[i].iter().map(|x| x * &s).collect();
        row.extend((0..m).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
        t.push(row);
        rhs.push(&b[i] * &s);
        signs.push(s);
    }
    let mut basis: Vec<usize> = (k..width).collect();
    // reduced costs for minimizing the sum of artificials
    let mut cost: Vec<Rat> =
        (0..width).map(|j| if j < k { -t.iter().map(|r| r[j].clone()).sum::<Rat>() } else { Rat::zero() }).collect();
    let mut obj: Rat = rhs.iter().sum();
    while let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &rhs[i] / &t[i][enter];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let best = &rhs[l] / &t[l][enter];
                        if ratio < best || (ratio == best && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let l = leave.expect("phase one is bounded below by zero");
        let inv = t[l][enter].recip();
        for x in t[l].iter_mut() {
            *x *= &inv;
        }
        rhs[l] *= &inv;
        for i in 0..m {
            if i != l && !t[i][enter].is_zero() {
                let f = t[i][enter].clone();
                for j in 0..width {
                    let v = &f * &t[l][j];
                    t[i][j] -= v;
                }
                let v = &f * &rhs[l];
                rhs[i] -= v;
            }
        }
        let f = cost[enter].clone();
        for j in 0..width {
            let v = &f * &t[l][j];
            cost[j] -= v;
        }
        obj -= &f * &rhs[l];
        basis[l] = enter;
    }
    if obj.is_zero() {
        return None;
    }
    // y_i = 1 - reduced cost of artificial i, then undo the sign flips.
    Some((0..m).map(|i| (Rat::one() - &cost[k + i]) * &signs[i]).collect())
}

fn dot_col(y: &[Rat], a: &[Vec<Rat>], j: usize) -> Rat {
    y.iter().zip(a).map(|(yi, row)| yi * &row[j]).sum()
}

fn dot(y: &[Rat], b: &[Rat]) -> Rat {
    y.iter().zip(b).map(|(x, z)| x * z).sum()
}

/// Result of [`feasibility`], with values every solution must take.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub system: LinearSystem,
    pub result: Feasibility,
    /// `(row index, value)` for each variable pinned by a single equation or
    /// by elimination, including values outside `[0, total]`.
    pub forced: Vec<(usize, String)>,
}

pub const DEFAULT_SEARCH_LIMIT: u64 = 20_000_000;
const MAX_SOLUTIONS: usize = 1000;

/// Decides the integer system exactly: elimination (inconsistency
/// certificate), phase-one simplex (Farkas certificate), then a bounded
/// search over the free variables.
pub fn feasibility(problem: &FeasibilityProblem, search_limit: u64) -> FeasibilityReport {
    let system = problem.system();
    let k = problem.rows.len();
    let total = problem.total;
    let (a, b) = (&system.a, &system.b);
    let mut forced: BTreeMap<usize, Rat> = BTreeMap::new();
    for (row, rhs) in a.iter().zip(b) {
        let support: Vec<usize> = (0..k).filter(|&j| !row[j].is_zero()).collect();
        if support.len() == 1 {
            forced.entry(support[0]).or_insert_with(|| rhs / &row[support[0]]);
        }
    }
    let red = rref(a, b, k);
    let finish = |forced: BTreeMap<usize, Rat>, result| FeasibilityReport {
        system: system.clone(),
        result,
        forced: forced.iter().map(|(j, v)| (*j, rat_string(v))).collect(),
    };
    if let Some(i) = (red.pivots.len()..a.len()).find(|&i| !red.rhs[i].is_zero()) {
        let y = red.e[i].clone();
        debug_assert!((0..k).all(|j| dot_col(&y, a, j).is_zero()));
        return finish(forced, Feasibility::Infeasible { certificate: Certificate::Inconsistent { multipliers: y } });
    }
    let free: Vec<usize> = (0..k).filter(|j| !red.pivots.contains(j)).collect();
    for (i, &p) in red.pivots.iter().enumerate() {
        if free.iter().all(|&f| red.r[i][f].is_zero()) {
            forced.entry(p).or_insert_with(|| red.rhs[i].clone());
        }
    }
    if let Some(y) = phase_one(a, b) {
        let valid = (0..k).all(|j| !dot_col(&y, a, j).is_positive()) && dot(&y, b).is_positive();
        if valid {
            return finish(forced, Feasibility::Infeasible { certificate: Certificate::Farkas { multipliers: y } });
        }
    }
    // Lattice search over the free variables; pivots follow from the RREF.
    let mut solutions = Vec::new();
    let mut searched = 0u64;
    let mut truncated = false;
    let mut assign = vec![0u64; free.len()];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        idx: usize,
        used: u64,
        total: u64,
        free: &[usize],
        assign: &mut Vec<u64>,
        red: &Rref,
        k: usize,
        limit: u64,
        searched: &mut u64,
        truncated: &mut bool,
        out: &mut Vec<Vec<u64>>,
    ) {
        if *truncated {
            return;
        }
        *searched += 1;
        if *searched > limit || out.len() >= MAX_SOLUTIONS {
            *truncated = true;
            return;
        }
        if idx == free.len() {
            let mut sol = vec![0u64; k];
            for (f, v) in free.iter().zip(assign.iter()) {
                sol[*f] = *v;
            }
            for (i, &p) in red.pivots.iter().enumerate() {
                let mut v = red.rhs[i].clone();
                for (f, x) in free.iter().zip(assign.iter()) {
                    v -= &red.r[i][*f] * Rat::from_integer(BigInt::from(*x));
                }
                if !v.denom().is_one() || v.is_negative() || v.numer() > &BigInt::from(total) {
                    return;
                }
                sol[p] = v.numer().to_u64().expect("bounded by total");
            }
            out.push(sol);
            return;
        }
        for v in 0..=(total - used) {
            assign[idx] = v;
            rec(idx + 1, used + v, total, free, assign, red, k, limit, searched, truncated, out);
        }
        assign[idx] = 0;
    }
    rec(0, 0, total, &free, &mut assign, &red, k, search_limit, &mut searched, &mut truncated, &mut solutions);
    let result = if solutions.is_empty() && !truncated {
        Feasibility::Infeasible { certificate: Certificate::NoIntegerPoint { searched } }
    } else {
        Feasibility::Feasible { solutions, truncated }
    };
    finish(forced, result)
}

/// All rows equal: every column sum is `total * entry`, which must equal
/// the multiplicity.
#[derive(Debug, Clone, Serialize)]
pub struct ColumnSumViolation {
    pub column: usize,
    pub total: u64,
    pub entry: String,
    pub sum: String,
    pub multiplicity: u64,
}

fn column_sum_violation(rows: &[AngleRow], total: u64, target: &[u64]) -> Option<ColumnSumViolation> {
    if rows.len() != 1 {
        return None;
    }
    let row = &rows[0];
    row.entries.iter().zip(target).enumerate().find_map(|(i, (e, &m))| {
        let sum = e.scale(&rat_int(total as i64));
        (sum != QuadNum::from_int(m as i64)).then(|| ColumnSumViolation {
            column: i + 1,
            total,
            entry: e.to_string(),
            sum: sum.to_string(),
            multiplicity: m,
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Conclusion {
    Nonexistent,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct NonexistenceVerdict {
    pub spectrum: String,
    pub order: usize,
    #[serde(serialize_with = "ser_display")]
    pub eigenvalues: Vec<QuadNum>,
    pub multiplicities: Vec<u64>,
    pub quotient: String,
    pub f_leading: [String; 3],
    #[serde(serialize_with = "ser_display")]
    pub boxes: Vec<SurdInterval>,
    pub enumerated_count: usize,
    pub filter: String,
    pub survivors: Vec<IntPoly>,
    /// Row of the angle matrix for each survivor that yields a valid row.
    pub rows: Vec<AngleRow>,
    pub row_sources: Vec<IntPoly>,
    pub feasibility: FeasibilityReport,
    pub column_sum_violation: Option<ColumnSumViolation>,
    /// Sub-spectra forced by every feasible assignment, with their verdicts.
    pub sub_verdicts: Vec<NonexistenceVerdict>,
    pub conclusion: Conclusion,
    pub notes: Vec<String>,
}

/// Factors `f` into integer linear factors and at most one leftover quadratic.
fn factor_small(f: &IntPoly, lo: &BigInt, hi: &BigInt) -> Option<Vec<(IntPoly, u32)>> {
    let mut rest = f.clone();
    let mut out: BTreeMap<IntPoly, u32> = BTreeMap::new();
    let mut x = lo.clone();
    while &x <= hi && rest.degree() > 0 {
        let lin = IntPoly::linear(x.clone());
        while rest.degree() > 0 && rest.eval(&x).is_zero() {
            rest = rest.exact_div(&lin).ok()?;
            *out.entry(lin.clone()).or_default() += 1;
        }
        x += 1;
    }
    match rest.degree() {
        0 => {}
        2 => *out.entry(rest).or_default() += 1,
        _ => return None,
    }
    Some(out.into_iter().collect())
}

/// Options for [`verdict`].
pub struct VerdictOptions<'a> {
    pub classes: &'a ClassStore,
    pub search_limit: u64,
}

/// Runs enumeration, sieve, angle rows and feasibility, recursing into
/// forced sub-spectra while `depth_budget > 1`.
pub fn verdict(
    s: &SpectrumCandidate,
    depth_budget: u32,
    opts: &VerdictOptions<'_>,
) -> Result<NonexistenceVerdict, NonexistError> {
    if depth_budget == 0 {
        return Err(NonexistError::Unsupported("depth budget must be at least 1".into()));
    }
    let mut notes = Vec::new();
    let cons = submatrix_constraints(s)?;
    let boxes = interlacing_boxes(s);
    let candidates = enumerate_submatrix_candidates(s)?;
    let sub_order = s.order - 1;
    let filter = if sub_order.is_multiple_of(2) {
        SubmatrixFilter::ShiftDivisibility
    } else {
        SubmatrixFilter::Classes(opts.classes.get(sub_order)?)
    };
    if matches!(filter, SubmatrixFilter::ShiftDivisibility) {
        notes.push(format!("submatrix order {sub_order} is even, so the shift-divisibility sieve applies directly"));
    }
    let survivors = congruence_and_parity_filter(&candidates, &cons.quotient, &filter)?;
    let mut rows = Vec::new();
    let mut row_sources = Vec::new();
    for f in &survivors {
        match angle_row(s, &cons.quotient.mul(f))? {
            Some(r) => {
                rows.push(r);
                row_sources.push(f.clone());
            }
            None => notes.push(format!("survivor {f} gives no valid angle row")),
        }
    }
    let target = s.multiplicities();
    let problem = FeasibilityProblem { rows: rows.clone(), total: s.order as u64, target: target.clone() };
    let report = feasibility(&problem, opts.search_limit);
    let violation = column_sum_violation(&rows, s.order as u64, &target);
    let mut sub_verdicts = Vec::new();
    let conclusion = match &report.result {
        Feasibility::Infeasible { .. } => Conclusion::Nonexistent,
        Feasibility::Feasible { truncated: true, .. } => {
            notes.push("integer search truncated".into());
            Conclusion::Inconclusive
        }
        Feasibility::Feasible { solutions, .. } => {
            let forced: Vec<usize> = (0..rows.len()).filter(|&j| solutions.iter().all(|sol| sol[j] > 0)).collect();
            if depth_budget <= 1 {
                notes.push("depth budget exhausted".into());
                Conclusion::Inconclusive
            } else if forced.is_empty() {
                notes.push("no sub-spectrum is forced by every solution".into());
                Conclusion::Inconclusive
            } else {
                let lo = boxes.first().map_or(BigInt::zero(), |b| b.lo.floor());
                let hi = boxes.last().map_or(BigInt::zero(), |b| b.hi.ceil());
                let mut closed = false;
                for j in forced {
                    let f = &row_sources[j];
                    let Some(f_factors) = factor_small(f, &lo, &hi) else {
                        notes.push(format!("cannot factor {f} into linear and quadratic parts"));
                        continue;
                    };
                    let mut factors: Vec<(IntPoly, u32)> =
                        s.factors.iter().filter(|(_, m)| *m > 1).map(|(p, m)| (p.clone(), m - 1)).collect();
                    factors.extend(f_factors);
                    let sub = SpectrumCandidate::from_factors(factors)?;
                    let v = verdict(&sub, depth_budget - 1, opts)?;
                    closed |= v.conclusion == Conclusion::Nonexistent;
                    sub_verdicts.push(v);
                }
                if closed {
                    Conclusion::Nonexistent
                } else {
                    Conclusion::Inconclusive
                }
            }
        }
    };
    Ok(NonexistenceVerdict {
        spectrum: s.to_string(),
        order: s.order,
        eigenvalues: s.eigenvalues.iter().map(|e| e.value.clone()).collect(),
        multiplicities: target,
        quotient: factored_string(
            &s.factors.iter().filter(|(_, m)| *m > 1).map(|(p, m)| (p.clone(), m - 1)).collect::<Vec<_>>(),
        ),
        f_leading: ["1".into(), cons.b1.to_string(), cons.b2.to_string()],
        boxes,
        enumerated_count: candidates.len(),
        filter: filter.describe(),
        survivors,
        rows,
        row_sources,
        feasibility: report,
        column_sum_violation: violation,
        sub_verdicts,
        conclusion,
        notes,
    })
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

    fn row(xs: &[&str]) -> AngleRow {
        AngleRow { entries: xs.iter().map(|x| q(x)).collect() }
    }

    #[test]
    fn parse_spectrum() {
        let s: SpectrumCandidate = "(x+5)^33*(x-9)^10*(x-11)^5*(x^2-20x+95)".parse().unwrap();
        assert_eq!(s.order, 50);
        let ev: Vec<String> = s.eigenvalues.iter().map(|e| e.value.to_string()).collect();
        assert_eq!(ev, ["-5", "10-1*sqrt(5)", "9", "11", "10+1*sqrt(5)"]);
        assert_eq!(s.multiplicities(), vec![33, 1, 10, 5, 1]);
        assert!("(x+5)^33*(x^3-1)".parse::<SpectrumCandidate>().is_err());
        assert!("(x+5^2".parse::<SpectrumCandidate>().is_err());
        assert!("(x^2+1)".parse::<SpectrumCandidate>().is_err());
    }

    #[test]
    fn constraints_examples() {
        let s: SpectrumCandidate = "(x+5)^33*(x-9)^12*(x-11)^4*(x-13)".parse().unwrap();
        let c = submatrix_constraints(&s).unwrap();
        assert_eq!((c.degree, c.b1.clone(), c.b2.clone()), (3, BigInt::from(-28), BigInt::from(243)));
        assert_eq!(c.quotient, p("(x+5)^32*(x-9)^11*(x-11)^3"));
        let s: SpectrumCandidate = "(x+5)^33*(x-7)*(x-9)^9*(x-11)^7".parse().unwrap();
        let c = submatrix_constraints(&s).unwrap();
        assert_eq!((c.b1.clone(), c.b2.clone()), (BigInt::from(-22), BigInt::from(153)));
        let s: SpectrumCandidate = "(x+5)^33*(x-9)^10*(x-11)^5*(x^2-20x+95)".parse().unwrap();
        let c = submatrix_constraints(&s).unwrap();
        assert_eq!((c.degree, c.b1.clone(), c.b2.clone()), (4, BigInt::from(-35), BigInt::from(443)));
        let b: Vec<String> = interlacing_boxes(&s).iter().map(|b| b.to_string()).collect();
        assert_eq!(b.len(), 4);
    }

    #[test]
    fn cubic_chain_row() {
        let s: SpectrumCandidate = "(x+5)^33*(x-9)^12*(x-11)^4*(x-13)".parse().unwrap();
        let chi = p("(x+5)^32*(x-9)^11*(x-11)^4*(x^2-17x+56)");
        let r = angle_row(&s, &chi).unwrap().unwrap();
        assert_eq!(r, row(&["83/126", "2/7", "0", "1/18"]));
        assert_eq!(reconstruct_submatrix_poly(&s, &r).unwrap(), chi);
        let v = column_sum_violation(&[r], 50, &s.multiplicities()).unwrap();
        assert_eq!((v.column, v.sum.as_str(), v.multiplicity), (1, "2075/63", 33));
        // wrong divisibility is a rejection, not an error
        assert!(angle_row(&s, &p("(x+5)^31*(x-9)^12*(x-11)^4*(x^2-17x+56)")).unwrap().is_none());
    }

    #[test]
    fn surd_rows_round_trip() {
        let s: SpectrumCandidate = "(x+5)^33*(x-9)^10*(x-11)^5*(x^2-20x+95)".parse().unwrap();
        let f = p("x^4-35x^3+443x^2-2381x+4516");
        let chi = submatrix_constraints(&s).unwrap().quotient.mul(&f);
        let r = angle_row(&s, &chi).unwrap().unwrap();
        assert_eq!(r, row(&["2031/3080", "2/55+1/110*sqrt(5)", "1/7", "1/8", "2/55-1/110*sqrt(5)"]));
        assert_eq!(reconstruct_submatrix_poly(&s, &r).unwrap(), chi);
    }

    #[test]
    fn two_row_system() {
        let p = FeasibilityProblem {
            rows: vec![row(&["37/56", "0", "3/14", "1/8"]), row(&["21/32", "1/8", "0", "7/32"])],
            total: 50,
            target: vec![33, 1, 9, 7],
        };
        let rep = feasibility(&p, DEFAULT_SEARCH_LIMIT);
        match rep.result {
            Feasibility::Feasible { solutions, truncated } => {
                assert_eq!(solutions, vec![vec![42, 8]]);
                assert!(!truncated);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn farkas_and_inconsistency() {
        // n1 + n2 = 3, n1 - n2 = 5 has the real solution (4, -1) only.
        let p = FeasibilityProblem { rows: vec![row(&["1"]), row(&["-1"])], total: 3, target: vec![5] };
        match feasibility(&p, 1000).result {
            Feasibility::Infeasible { certificate: Certificate::Farkas { .. } } => {}
            other => panic!("{other:?}"),
        }
        let p = FeasibilityProblem { rows: vec![row(&["1/2"])], total: 3, target: vec![1] };
        match feasibility(&p, 1000).result {
            Feasibility::Infeasible { certificate: Certificate::Inconsistent { .. } } => {}
            other => panic!("{other:?}"),
        }
        // n1 + n2 = 1 and n1/2 + n2/2 = 1/2 has real points but ... target integral: use 3 rows
        let p =
            FeasibilityProblem { rows: vec![row(&["1/2", "1/2"]), row(&["1/2", "1/2"])], total: 1, target: vec![1, 0] };
        assert!(matches!(feasibility(&p, 1000).result, Feasibility::Infeasible { .. }));
        let p = FeasibilityProblem { rows: vec![], total: 2, target: vec![2] };
        assert!(matches!(feasibility(&p, 1000).result, Feasibility::Infeasible { .. }));
    }

    #[test]
    fn lattice_search_matches_brute_force() {
        let rows = vec![row(&["1/2", "1/2"]), row(&["1", "0"]), row(&["0", "1"]), row(&["1/4", "3/4"])];
        for total in 0..=12u64 {
            for t0 in 0..=total {
                let p = FeasibilityProblem { rows: rows.clone(), total, target: vec![t0, total - t0] };
                let mut brute = Vec::new();
                for a in 0..=total {
                    for b in 0..=total - a {
                        for c in 0..=total - a - b {
                            let d = total - a - b - c;
                            if 2 * a + 4 * b + d == 4 * t0 {
                                brute.push(vec![a, b, c, d]);
                            }
                        }
                    }
                }
                brute.sort();
                match feasibility(&p, 1_000_000).result {
                    Feasibility::Feasible { mut solutions, truncated } => {
                        assert!(!truncated);
                        solutions.sort();
                        assert_eq!(solutions, brute);
                    }
                    Feasibility::Infeasible { .. } => assert!(brute.is_empty()),
                }
            }
        }
    }

    #[test]
    fn spectra_from_char_polys() {
        let s = SpectrumCandidate::from_char_poly(&p("(x-3)^5*(x+3)^5")).unwrap();
        assert_eq!(s.multiplicities(), vec![5, 5]);
        let s = SpectrumCandidate::from_char_poly(&p("(x^2-5)^2*(x-1)")).unwrap();
        assert_eq!(s.order, 5);
        assert_eq!(s.eigenvalues.len(), 3);
        assert!(SpectrumCandidate::from_char_poly(&p("x^3-3x+1")).is_none());
        assert!(SpectrumCandidate::from_char_poly(&p("(x^2-5)*(x^2-17)")).is_none());
    }

    #[test]
    fn factor_small_examples() {
        let (lo, hi) = (BigInt::from(-5), BigInt::from(11));
        assert_eq!(
            factor_small(&p("x^3-22x^2+153x-324"), &lo, &hi).unwrap(),
            vec![(p("x-9"), 2), (p("x-4"), 1)].into_iter().collect::<BTreeMap<_, _>>().into_iter().collect::<Vec<_>>()
        );
        assert_eq!(factor_small(&p("x^3-22x^2+153x-336"), &lo, &hi).unwrap().len(), 2);
        assert!(factor_small(&p("x^3-3x+1"), &lo, &hi).is_none());
    }
}
