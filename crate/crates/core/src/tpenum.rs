//! Tree search for monic integer polynomials whose roots are all real and
//! confined to prescribed intervals.
//!
//! Coefficients use the descending convention `p = x^d + a_1 x^{d-1} + ... + a_d`.
//! The tree fixes `a_1, a_2, ...` in turn. At level `r` the partial polynomial
//! `D_r(x) = sum_{i<=r} a_i C(d-i, r-i) x^{r-i}` is, up to a constant factor,
//! the `(d-r)`-th derivative of any completion, so by Rolle all its roots lie
//! in the interval and interlace those of `D_{r+1}`. The admissible range of
//! `a_{r+1}` is read off sign conditions of `D_{r+1}` at certified enclosures
//! of the roots of `D_r`. Ranges are computed in floating point with
//! rigorous error bounds and may over-approximate; every leaf is re-validated
//! exactly with Sturm sequences.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::exact::{binomial, QuadNum, Rat};
use crate::poly::{has_binomial_parity, isolate_real_roots, IntPoly, PolyError, RootCounter, SurdInterval};

#[derive(Debug, Error)]
pub enum TpError {
    #[error("malformed enumeration spec: {0}")]
    Spec(String),
    #[error("coefficients too large for the search ({0})")]
    TooLarge(String),
    #[error("factor pool lacks stratum degree {degree}, trace {trace}")]
    MissingStratum { degree: usize, trace: i64 },
    #[error("polynomial {0} does not satisfy the pool's parity profile")]
    ParityMismatch(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Constraint bundle for [`enumerate`].
#[derive(Debug, Clone)]
pub struct EnumSpec {
    pub degree: usize,
    /// `i -> a_i`; index 1 (minus the trace) must be present.
    pub fixed: BTreeMap<usize, BigInt>,
    /// `i -> a_i mod 2`.
    pub parity: BTreeMap<usize, u8>,
    pub global_interval: SurdInterval,
    /// Interlacing mode: `d` ordered boxes, one root each.
    pub root_boxes: Option<Vec<SurdInterval>>,
    pub require_distinct: bool,
}

impl EnumSpec {
    /// Degree `d`, trace `t`, all roots in `iv`.
    pub fn new(degree: usize, trace: i64, iv: SurdInterval) -> Self {
        let mut fixed = BTreeMap::new();
        fixed.insert(1, BigInt::from(-trace));
        EnumSpec {
            degree,
            fixed,
            parity: BTreeMap::new(),
            global_interval: iv,
            root_boxes: None,
            require_distinct: false,
        }
    }

    /// Impose `a_i = C(d,i) mod 2`, i.e. `p = (x+1)^d mod 2`.
    pub fn with_binomial_parity(mut self) -> Self {
        for i in 1..=self.degree {
            self.parity.insert(i, u8::from(binomial(self.degree as u64, i as u64).bit(0)));
        }
        self
    }

    pub fn with_fixed(mut self, i: usize, v: i64) -> Self {
        self.fixed.insert(i, BigInt::from(v));
        self
    }

    pub fn with_boxes(mut self, boxes: Vec<SurdInterval>) -> Self {
        self.root_boxes = Some(boxes);
        self
    }

    pub fn distinct(mut self, on: bool) -> Self {
        self.require_distinct = on;
        self
    }

    pub fn trace(&self) -> Option<BigInt> {
        self.fixed.get(&1).map(|a| -a)
    }

    /// Parse the JSON spec format
    /// `{degree, trace, fixed:{i:v}, parity:{i:0|1}, interval:[lo,hi], boxes:[[lo,hi],..]}`.
    pub fn from_json(text: &str) -> Result<Self, TpError> {
        #[derive(Deserialize)]
        struct Raw {
            degree: usize,
            trace: Option<i64>,
            #[serde(default)]
            fixed: BTreeMap<String, i64>,
            #[serde(default)]
            parity: BTreeMap<String, u8>,
            interval: Option<[String; 2]>,
            boxes: Option<Vec<[String; 2]>>,
            #[serde(default)]
            binomial_parity: bool,
            #[serde(default)]
            require_distinct: bool,
        }
        let raw: Raw = serde_json::from_str(text)?;
        let idx = |k: &str| k.parse::<usize>().map_err(|_| TpError::Spec(format!("bad coefficient index {k:?}")));
        let surd = |s: &str| s.parse::<QuadNum>().map_err(|e| TpError::Spec(format!("bad endpoint {s:?}: {e}")));
        let mk = |pair: &[String; 2]| -> Result<SurdInterval, TpError> {
            Ok(SurdInterval::new(surd(&pair[0])?, surd(&pair[1])?)?)
        };
        let boxes = raw.boxes.as_ref().map(|bs| bs.iter().map(mk).collect::<Result<Vec<_>, _>>()).transpose()?;
        let global = match (&raw.interval, &boxes) {
            (Some(iv), _) => mk(iv)?,
            (None, Some(bs)) if !bs.is_empty() => {
                let lo = bs.iter().map(|b| b.lo.clone()).min().expect("nonempty");
                let hi = bs.iter().map(|b| b.hi.clone()).max().expect("nonempty");
                SurdInterval::new(lo, hi)?
            }
            _ => return Err(TpError::Spec("need an interval or boxes".into())),
        };
        let mut spec = EnumSpec {
            degree: raw.degree,
            fixed: BTreeMap::new(),
            parity: BTreeMap::new(),
            global_interval: global,
            root_boxes: boxes,
            require_distinct: raw.require_distinct,
        };
        if let Some(t) = raw.trace {
            spec.fixed.insert(1, BigInt::from(-t));
        }
        for (k, v) in &raw.fixed {
            spec.fixed.insert(idx(k)?, BigInt::from(*v));
        }
        if raw.binomial_parity {
            spec = spec.with_binomial_parity();
        }
        for (k, v) in &raw.parity {
            if *v > 1 {
                return Err(TpError::Spec(format!("parity must be 0 or 1, got {v}")));
            }
            spec.parity.insert(idx(k)?, *v);
        }
        Ok(spec)
    }

    fn check(&self) -> Result<Option<String>, TpError> {
        let d = self.degree;
        if d == 0 {
            return Err(TpError::Spec("degree must be at least 1".into()));
        }
        if !self.fixed.contains_key(&1) {
            return Err(TpError::Spec("a_1 (minus the trace) must be fixed".into()));
        }
        if let Some(i) = self.fixed.keys().chain(self.parity.keys()).find(|&&i| i == 0 || i > d) {
            return Err(TpError::Spec(format!("coefficient index {i} out of range 1..={d}")));
        }
        if let Some(bs) = &self.root_boxes {
            if bs.len() != d {
                return Err(TpError::Spec(format!("expected {d} boxes, got {}", bs.len())));
            }
            if bs.windows(2).any(|w| w[0].lo > w[1].lo || w[0].hi > w[1].hi) {
                return Err(TpError::Spec("boxes must be ordered".into()));
            }
            if bs.iter().any(|b| b.lo < self.global_interval.lo || b.hi > self.global_interval.hi) {
                return Err(TpError::Spec("boxes must lie inside the global interval".into()));
            }
        }
        for (i, v) in &self.fixed {
            if let Some(&p) = self.parity.get(i) {
                if u8::from(v.bit(0)) != p {
                    return Ok(Some(format!("a_{i} = {v} contradicts parity {p}")));
                }
            }
        }
        Ok(None)
    }
}

/// Certified output of [`enumerate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumResult {
    pub polynomials: Vec<IntPoly>,
    pub nodes_visited: u64,
    pub validated: bool,
    pub diagnostic: Option<String>,
}

/// Floating-point evaluation with a rigorous absolute error bound.
fn eval_certified(c: &[f64], x: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut s = 0.0;
    let ax = x.abs();
    for &ci in c.iter().rev() {
        v = v * x + ci;
        s = s * ax + ci.abs();
    }
    let n = c.len() as f64;
    let err = s * (2.0 * n + 2.0) * f64::EPSILON * 0.5 * 1.01 + f64::MIN_POSITIVE;
    (v, err)
}

fn sign_certified(c: &[f64], x: f64) -> i32 {
    let (v, e) = eval_certified(c, x);
    if v > e {
        1
    } else if v < -e {
        -1
    } else {
        0
    }
}

/// Value and derivative by Horner, with the certified error bound on the value.
fn eval_with_derivative(c: &[f64], x: f64) -> (f64, f64, f64) {
    let mut v = 0.0;
    let mut dv = 0.0;
    let mut s = 0.0;
    let ax = x.abs();
    for &ci in c.iter().rev() {
        dv = dv * x + v;
        v = v * x + ci;
        s = s * ax + ci.abs();
    }
    let err = s * (c.len() as f64 + 1.0) * f64::EPSILON * 1.01 + f64::MIN_POSITIVE;
    (v, dv, err)
}

/// Shrinks a bracket `[a, b]` around the unique root of a polynomial that
/// is monotone on it, with sign `-e` at `a` and `e` at `b`. Safeguarded
/// Newton; every accepted endpoint carries a certified sign.
fn refine_root(c: &[f64], mut a: f64, mut b: f64, e: i32) -> (f64, f64) {
    let tol = |a: f64, b: f64| 1e-13 * (1.0 + a.abs().max(b.abs()));
    let mut x = 0.5 * (a + b);
    for _ in 0..100 {
        if b - a <= tol(a, b) {
            break;
        }
        let (v, dv, err) = eval_with_derivative(c, x);
        let s = if v > err {
            1
        } else if v < -err {
            -1
        } else {
            0
        };
        if s == e {
            b = x;
        } else if s == -e {
            a = x;
        } else {
            // Within rounding of the root: widen until both sides are certified.
            let mut delta = tol(a, b).max(4.0 * f64::EPSILON * x.abs());
            while delta < b - a {
                let (lo, hi) = ((x - delta).max(a), (x + delta).min(b));
                if sign_certified(c, lo) == -e && sign_certified(c, hi) == e {
                    return (lo, hi);
                }
                delta *= 4.0;
            }
            return (a, b);
        }
        let width = b - a;
        let newton = if dv != 0.0 { x - v / dv } else { f64::NAN };
        x = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
        // Bracket the Newton iterate tightly once it is close.
        let step = (x - a).min(b - x);
        if step < 0.25 * width {
            let probe = tol(a, b);
            let (lo, hi) = ((x - probe).max(a), (x + probe).min(b));
            if lo > a && sign_certified(c, lo) == -e {
                a = lo;
            }
            if hi < b && sign_certified(c, hi) == e {
                b = hi;
            }
        }
        if x <= a || x >= b {
            x = 0.5 * (a + b);
        }
    }
    (a, b)
}

/// Lower/upper f64 bounds for an exact surd.
fn outer_f64(x: &QuadNum) -> (f64, f64) {
    let v = x.to_f64();
    let mut lo = v - 1e-9 * (1.0 + v.abs());
    let mut hi = v + 1e-9 * (1.0 + v.abs());
    while QuadNum::from_rat(float_rat(lo)) > *x {
        lo -= 1e-6 * (1.0 + lo.abs());
    }
    while QuadNum::from_rat(float_rat(hi)) < *x {
        hi += 1e-6 * (1.0 + hi.abs());
    }
    (lo, hi)
}

fn float_rat(x: f64) -> Rat {
    BigRational::from_f64(x).expect("finite")
}

fn rat_f64_down(x: &Rat) -> f64 {
    let v = x.to_f64().expect("finite");
    if float_rat(v) > *x {
        v.next_down()
    } else {
        v
    }
}

fn rat_f64_up(x: &Rat) -> f64 {
    let v = x.to_f64().expect("finite");
    if float_rat(v) < *x {
        v.next_up()
    } else {
        v
    }
}

struct Tree {
    d: usize,
    /// `binom[n][k]` as f64 (exact in range).
    binom: Vec<Vec<f64>>,
    fixed: Vec<Option<i64>>,
    parity: Vec<Option<u8>>,
    lo: f64,
    hi: f64,
    /// Prune nodes with repeated roots (a squarefree leaf has squarefree derivatives).
    distinct: bool,
}

impl Tree {
    /// Ascending coefficients of `D_{r+1} - a_{r+1}` from `a_0..a_r`.
    fn q_coeffs(&self, a: &[i64]) -> Vec<f64> {
        let r = a.len() - 1;
        let mut q = vec![0.0; r + 2];
        for (i, &ai) in a.iter().enumerate() {
            q[r + 1 - i] = ai as f64 * self.binom[self.d - i][r + 1 - i];
        }
        q
    }

    /// Integer range for `a_{r+1}` given enclosures of the roots of `D_r`.
    #[allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
    fn range(&self, q: &[f64], encl: &[(f64, f64)]) -> Option<(i64, i64)> {
        let r1 = q.len() - 1; // level being built
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        let mut constrain = |sign: i32, qlo: f64, qhi: f64| {
            // sign * (Q(beta) + a) >= 0
            if sign > 0 {
                lower = lower.max(-qhi);
            } else {
                upper = upper.min(-qlo);
            }
        };
        // Right endpoint: D_{r+1}(u) >= 0. Left endpoint: (-1)^{r+1} D_{r+1}(l) >= 0.
        let (v, e) = eval_certified(q, self.hi);
        constrain(1, v - e, v + e);
        let (v, e) = eval_certified(q, self.lo);
        constrain(if r1.is_multiple_of(2) { 1 } else { -1 }, v - e, v + e);
        // Roots beta_j of D_r, j = 1..r: sign (-1)^{r+1-j}.
        let r = encl.len();
        for (j0, &(blo, bhi)) in encl.iter().enumerate() {
            let j = j0 + 1;
            let m = 0.5 * (blo + bhi);
            let w = (m - blo).max(bhi - m);
            let big_m = blo.abs().max(bhi.abs());
            // Q'(beta) = (d - r) D_r(beta) = 0, so only the curvature term remains.
            let mut k2 = 0.0;
            let mut pw = 1.0;
            for i in 2..q.len() {
                k2 += (i * (i - 1)) as f64 * q[i].abs() * pw;
                pw *= big_m;
            }
            let (v, e) = eval_certified(q, m);
            let slack = e + 0.5 * k2 * w * w * 1.01;
            let sign = if (r + 1 - j).is_multiple_of(2) { 1 } else { -1 };
            constrain(sign, v - slack, v + slack);
        }
        let margin = |x: f64| 1e-9 * (1.0 + x.abs());
        let lo = (lower - margin(lower)).ceil();
        let hi = (upper + margin(upper)).floor();
        // Written so that NaN bounds are rejected too.
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        if lo.abs() > 9.0e15 || hi.abs() > 9.0e15 {
            return None;
        }
        Some((lo as i64, hi as i64))
    }

    /// Enclosures of the roots of `D_{r+1}` (ascending coefficients `c`),
    /// valid whenever the node can lead to a real-rooted leaf. `None` means
    /// the node provably has no such descendant.
    fn enclosures(&self, c: &[f64], prev: &[(f64, f64)]) -> Option<Vec<(f64, f64)>> {
        let fast = self.fast_enclosures(c, prev);
        let tight = fast.iter().all(|&(a, b)| b - a <= 1e-9 * (1.0 + a.abs().max(b.abs())));
        if tight {
            Some(fast)
        } else {
            self.exact_enclosures(c)
        }
    }

    /// Exact isolation, used near multiple or clustered roots. Prunes nodes
    /// whose polynomial lacks a full set of real roots in the interval.
    fn exact_enclosures(&self, c: &[f64]) -> Option<Vec<(f64, f64)>> {
        let p = IntPoly::new(c.iter().map(|&x| BigInt::from(x as i64)).collect());
        if self.distinct && !p.is_squarefree() {
            return None;
        }
        let roots = isolate_real_roots(&p, &float_rat(self.lo), &float_rat(self.hi), 48);
        if roots.len() != p.degree() {
            return None;
        }
        Some(roots.iter().map(|(a, b)| (rat_f64_down(a), rat_f64_up(b))).collect())
    }

    fn fast_enclosures(&self, c: &[f64], prev: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let n = c.len() - 1;
        let mut out = Vec::with_capacity(n);
        for j in 1..=n {
            let (llo, lhi) = if j == 1 { (self.lo, self.lo) } else { prev[j - 2] };
            let (rlo, rhi) = if j == n { (self.hi, self.hi) } else { prev[j - 1] };
            let e = if (n - j).is_multiple_of(2) { 1 } else { -1 };
            if lhi >= rlo {
                out.push((llo, rhi));
                continue;
            }
            let sl = sign_certified(c, lhi);
            let sr = sign_certified(c, rlo);
            if sr == -e {
                out.push((rlo, rhi));
            } else if sl == e {
                out.push((llo, lhi));
            } else if sl == -e && sr == e {
                out.push(refine_root(c, lhi, rlo, e));
            } else {
                out.push((llo, rhi));
            }
        }
        out
    }

    fn d_coeffs(&self, a: &[i64]) -> Vec<f64> {
        let r = a.len() - 1;
        (0..=r).map(|k| a[r - k] as f64 * self.binom[self.d - (r - k)][k]).collect()
    }

    fn values(&self, level: usize, lo: i64, hi: i64) -> Vec<i64> {
        if let Some(v) = self.fixed[level] {
            return if lo <= v && v <= hi { vec![v] } else { vec![] };
        }
        match self.parity[level] {
            None => (lo..=hi).collect(),
            Some(p) => {
                let start = if lo.rem_euclid(2) as u8 == p { lo } else { lo + 1 };
                (start..=hi).step_by(2).collect()
            }
        }
    }

    fn explore(&self, a: &mut Vec<i64>, encl: &[(f64, f64)], out: &mut Vec<Vec<i64>>, nodes: &mut u64) {
        *nodes += 1;
        let q = self.q_coeffs(a);
        let Some((lo, hi)) = self.range(&q, encl) else { return };
        let level = a.len();
        for v in self.values(level, lo, hi) {
            a.push(v);
            if level == self.d {
                out.push(a.clone());
            } else {
                let c = self.d_coeffs(a);
                if let Some(next) = self.enclosures(&c, encl) {
                    self.explore(a, &next, out, nodes);
                }
            }
            a.pop();
        }
    }
}

/// Exact leaf validation against the spec.
fn validate(spec: &EnumSpec, p: &IntPoly) -> bool {
    let d = spec.degree;
    if let Some(bs) = &spec.root_boxes {
        if sign_changes_certify(p, bs) {
            return true;
        }
    }
    let counter = RootCounter::new(p);
    let total = counter.count(&spec.global_interval);
    if total.with_multiplicity != d {
        return false;
    }
    if spec.require_distinct && total.distinct != d {
        return false;
    }
    if let Some(bs) = &spec.root_boxes {
        // Hall-type condition: every run of consecutive boxes holds at least
        // as many roots as it has boxes. With ordered boxes this is equivalent
        // to a matching of roots to boxes.
        for i in 0..d {
            for j in i..d {
                let hull = SurdInterval { lo: bs[i].lo.clone(), hi: bs[j].hi.clone() };
                if counter.count(&hull).with_multiplicity < j - i + 1 {
                    return false;
                }
            }
        }
    }
    true
}

/// Quick exact proof of the interlacing condition: with box interiors
/// pairwise disjoint, a strict sign change across every box puts at least
/// one root in each interior, and having only `d` roots makes that exactly one.
fn sign_changes_certify(p: &IntPoly, bs: &[SurdInterval]) -> bool {
    if bs.len() != p.degree() || bs.windows(2).any(|w| w[0].hi > w[1].lo) {
        return false;
    }
    let mut prev: Option<(&QuadNum, i32)> = None;
    for b in bs {
        let lo = match prev {
            Some((x, s)) if *x == b.lo => s,
            _ => p.sign_at(&b.lo),
        };
        let hi = p.sign_at(&b.hi);
        if lo * hi >= 0 {
            return false;
        }
        prev = Some((&b.hi, hi));
    }
    true
}

/// Complete list of monic integer polynomials satisfying `spec`.
pub fn enumerate(spec: &EnumSpec) -> Result<EnumResult, TpError> {
    if let Some(diag) = spec.check()? {
        return Ok(EnumResult { polynomials: vec![], nodes_visited: 0, validated: true, diagnostic: Some(diag) });
    }
    let d = spec.degree;
    let (lo, _) = outer_f64(&spec.global_interval.lo);
    let (_, hi) = outer_f64(&spec.global_interval.hi);
    let big_m = lo.abs().max(hi.abs()).max(1.0);
    // Every coefficient product entering the f64 search must be exact.
    let mut worst = 0.0f64;
    for i in 0..=d {
        let ai = binomial(d as u64, i as u64).to_f64().unwrap_or(f64::INFINITY) * big_m.powi(i as i32);
        let b = binomial((d - i) as u64, ((d - i) / 2) as u64).to_f64().unwrap_or(f64::INFINITY);
        worst = worst.max(ai * b);
    }
    if worst > 2f64.powi(52) {
        return Err(TpError::TooLarge(format!("degree {d} on {}", spec.global_interval)));
    }
    let to_i64 = |v: &BigInt| v.to_i64().ok_or_else(|| TpError::TooLarge(format!("fixed coefficient {v}")));
    let mut fixed = vec![None; d + 1];
    for (i, v) in &spec.fixed {
        fixed[*i] = Some(to_i64(v)?);
    }
    let mut parity = vec![None; d + 1];
    for (i, p) in &spec.parity {
        parity[*i] = Some(*p);
    }
    let binom =
        (0..=d).map(|n| (0..=d).map(|k| binomial(n as u64, k as u64).to_f64().expect("small")).collect()).collect();
    let tree = Tree { d, binom, fixed, parity, lo, hi, distinct: spec.require_distinct };

    let a1 = tree.fixed[1].expect("checked");
    let nodes = AtomicU64::new(1);
    let mut leaves: Vec<Vec<i64>> = Vec::new();
    if d == 1 {
        leaves.push(vec![1, a1]);
    } else {
        // Root of D_1 = d x + a_1, enclosed by one ulp either side.
        let root = -(a1 as f64) / d as f64;
        let e = root.abs() * f64::EPSILON + f64::MIN_POSITIVE;
        let encl = vec![(root - e, root + e)];
        let q = tree.q_coeffs(&[1, a1]);
        if let Some((lo2, hi2)) = tree.range(&q, &encl) {
            let branches = tree.values(2, lo2, hi2);
            leaves = branches
                .par_iter()
                .flat_map_iter(|&v| {
                    let mut a = vec![1, a1, v];
                    let mut out = Vec::new();
                    let mut n = 1u64;
                    if d == 2 {
                        out.push(a);
                    } else {
                        let c = tree.d_coeffs(&a);
                        if let Some(next) = tree.enclosures(&c, &encl) {
                            tree.explore(&mut a, &next, &mut out, &mut n);
                        }
                    }
                    nodes.fetch_add(n, Ordering::Relaxed);
                    out
                })
                .collect();
        }
    }
    let mut polynomials: Vec<IntPoly> = leaves
        .par_iter()
        .filter_map(|a| {
            let p = IntPoly::new(a.iter().rev().map(|&c| BigInt::from(c)).collect());
            validate(spec, &p).then_some(p)
        })
        .collect();
    polynomials.sort_by(|x, y| x.coeffs().cmp(y.coeffs()));
    polynomials.dedup();
    Ok(EnumResult { polynomials, nodes_visited: nodes.into_inner(), validated: true, diagnostic: None })
}

/// Lower bound on the trace of a totally positive integer polynomial of
/// degree `d >= 5` (strata below it are empty).
pub fn mckee_prune(d: usize, t: i64) -> bool {
    if d < 5 {
        return true;
    }
    let bound = (178_839 * d as i64 + 99_999) / 100_000;
    t >= bound
}

/// Totally positive monic integer polynomials bucketed by `(degree, trace)`,
/// each stratum complete for the pool's interval rule (roots in `[0, trace]`).
#[derive(Debug, Clone, Default)]
pub struct FactorPool {
    pub strata: BTreeMap<(usize, i64), Vec<IntPoly>>,
    /// When set, strata only hold members `= (x+1)^k mod 2`.
    pub binomial_parity: bool,
}

impl FactorPool {
    /// Enumerate every stratum with degree `1..=max_degree` and trace `k..=k+max_excess`.
    pub fn build(max_degree: usize, max_excess: i64, binomial_parity: bool) -> Result<Self, TpError> {
        let mut pool = FactorPool { strata: BTreeMap::new(), binomial_parity };
        for k in 1..=max_degree {
            for t in k as i64..=k as i64 + max_excess {
                pool.fill(k, t)?;
            }
        }
        Ok(pool)
    }

    /// Make sure stratum `(k, t)` is present.
    pub fn fill(&mut self, k: usize, t: i64) -> Result<&[IntPoly], TpError> {
        if !self.strata.contains_key(&(k, t)) {
            let members = if !mckee_prune(k, t) || (self.binomial_parity && (t - k as i64) % 2 != 0) {
                vec![]
            } else {
                // Irreducible factors are squarefree, so repeated-root members are not needed.
                let mut spec = EnumSpec::new(k, t, SurdInterval::ints(0, t)).distinct(true);
                if self.binomial_parity {
                    spec = spec.with_binomial_parity();
                }
                enumerate(&spec)?.polynomials
            };
            self.strata.insert((k, t), members);
        }
        Ok(&self.strata[&(k, t)])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    Reducible(IntPoly),
}

/// Trial division by every pool member that could be a factor of `p`.
///
/// Any monic integer factor of a totally positive `p` with binomial parity
/// is totally positive, has smaller trace, and itself has binomial parity
/// (since `(x+1)^d` factors uniquely mod 2), so the pool strata suffice.
pub fn classify_irreducible(pool: &FactorPool, p: &IntPoly) -> Result<Irreducibility, TpError> {
    let d = p.degree();
    let t = p.trace().to_i64().ok_or_else(|| TpError::TooLarge(p.to_string()))?;
    if pool.binomial_parity && !has_binomial_parity(p) {
        return Err(TpError::ParityMismatch(p.to_string()));
    }
    // Roots lie in [0, t]; a root at 0 is the one factor of trace below its degree.
    if d > 1 && p.coeff(0).is_zero() {
        return Ok(Irreducibility::Reducible(IntPoly::x()));
    }
    // A factorization has a factor of degree k <= d/2; its cofactor has trace >= d-k.
    for k in 1..=d / 2 {
        for s in k as i64..=t - (d - k) as i64 {
            let members = pool.strata.get(&(k, s)).ok_or(TpError::MissingStratum { degree: k, trace: s })?;
            for g in members {
                if g.divides(p) {
                    return Ok(Irreducibility::Reducible(g.clone()));
                }
            }
        }
    }
    Ok(Irreducibility::Irreducible)
}

/// Convenience: make sure `pool` holds every stratum `classify_irreducible`
/// needs for `p`.
pub fn prepare_pool(pool: &mut FactorPool, p: &IntPoly) -> Result<(), TpError> {
    let d = p.degree();
    let t = p.trace().to_i64().ok_or_else(|| TpError::TooLarge(p.to_string()))?;
    for k in 1..=d / 2 {
        for s in k as i64..=t - (d - k) as i64 {
            pool.fill(k, s)?;
        }
    }
    Ok(())
}

/// Nonnegative discriminant (necessary for real-rootedness); only tested for
/// degree at most 3.
fn discriminant_ok(a: &[i128]) -> bool {
    match a.len() - 1 {
        2 => a[1] * a[1] - 4 * a[2] >= 0,
        3 => {
            let (b, c, d) = (a[1], a[2], a[3]);
            b * b * c * c - 4 * c * c * c - 4 * b * b * b * d - 27 * d * d + 18 * b * c * d >= 0
        }
        _ => true,
    }
}

/// Brute-force reference used by tests: all monic integer polynomials of
/// degree `d`, trace `t`, with all roots in `[0, t]`.
///
/// Scans the full coefficient box `|a_i| <= C(d,i) t^i`. Before the exact
/// Sturm check it applies two necessary integer conditions: the coefficients
/// of `p(x)` and of `p(t - x)` must alternate in sign.
pub fn brute_force(d: usize, t: i64) -> Vec<IntPoly> {
    let table: Vec<Vec<i128>> =
        (0..=d).map(|n| (0..=d).map(|k| binomial(n as u64, k as u64).to_i128().expect("small")).collect()).collect();
    let c = |n: usize, k: usize| table[n][k];
    let t128 = t as i128;
    let tp: Vec<i128> = (0..=d as u32).map(|k| t128.pow(k)).collect();
    let bound: Vec<i128> = (0..=d).map(|i| c(d, i) * t128.pow(i as u32)).collect();
    let iv = SurdInterval::ints(0, t);
    let alternates = |a: &[i128]| a.iter().enumerate().all(|(i, &x)| x == 0 || (x > 0) == (i % 2 == 0));
    let reflected_ok = |a: &[i128]| {
        // a is descending; ascending P_j = a[d - j]. Coefficient of y^k in
        // p(t - y) is (-1)^k sum_j P_j C(j,k) t^(j-k).
        let mut desc = vec![0i128; d + 1];
        for k in 0..=d {
            let mut acc = 0i128;
            for j in k..=d {
                acc += a[d - j] * c(j, k) * tp[j - k];
            }
            if k % 2 == 1 {
                acc = -acc;
            }
            if d % 2 == 1 {
                acc = -acc;
            }
            desc[d - k] = acc;
        }
        alternates(&desc)
    };
    let mut out = Vec::new();
    if d == 1 {
        out.push(IntPoly::linear(t));
        return out;
    }
    let mut a = vec![0i128; d + 1];
    a[0] = 1;
    a[1] = -t128;
    for (i, ai) in a.iter_mut().enumerate().skip(2) {
        *ai = if i % 2 == 0 { 0 } else { -bound[i] };
    }
    loop {
        if alternates(&a) && reflected_ok(&a) && discriminant_ok(&a) {
            let p = IntPoly::new(a.iter().rev().map(|&x| BigInt::from(x)).collect());
            if RootCounter::new(&p).count(&iv).with_multiplicity == d {
                out.push(p);
            }
        }
        // Odometer over a_2..a_d, each restricted to its sign class.
        let mut i = d;
        loop {
            if i < 2 {
                out.sort_by(|x, y| x.coeffs().cmp(y.coeffs()));
                return out;
            }
            let (lo, hi) = if i.is_multiple_of(2) { (0, bound[i]) } else { (-bound[i], 0) };
            if a[i] < hi {
                a[i] += 1;
                break;
            }
            a[i] = lo;
            i -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polys(xs: &[&str]) -> Vec<IntPoly> {
        let mut v: Vec<IntPoly> = xs.iter().map(|s| s.parse().unwrap()).collect();
        v.sort_by(|x, y| x.coeffs().cmp(y.coeffs()));
        v
    }

    #[test]
    fn quadratic_trace_six() {
        let spec = EnumSpec::new(2, 6, SurdInterval::ints(0, 25)).with_binomial_parity();
        let r = enumerate(&spec).unwrap();
        assert_eq!(r.polynomials, polys(&["x^2-6x+1", "x^2-6x+3", "x^2-6x+5", "x^2-6x+7", "x^2-6x+9"]));
        let mut pool = FactorPool { binomial_parity: true, ..Default::default() };
        let irr: Vec<IntPoly> = r
            .polynomials
            .into_iter()
            .filter(|p| {
                prepare_pool(&mut pool, p).unwrap();
                classify_irreducible(&pool, p).unwrap() == Irreducibility::Irreducible
            })
            .collect();
        assert_eq!(irr, polys(&["x^2-6x+1", "x^2-6x+3", "x^2-6x+7"]));
    }

    #[test]
    fn linear() {
        let r = enumerate(&EnumSpec::new(1, 3, SurdInterval::ints(0, 25))).unwrap();
        assert_eq!(r.polynomials, polys(&["x-3"]));
    }

    #[test]
    fn interlacing_cubics() {
        let boxes = vec![SurdInterval::ints(-5, 9), SurdInterval::ints(9, 11), SurdInterval::ints(11, 13)];
        let spec = EnumSpec::new(3, 28, SurdInterval::ints(-5, 13)).with_fixed(2, 243).with_boxes(boxes);
        let r = enumerate(&spec).unwrap();
        let consts: Vec<i64> = r.polynomials.iter().map(|p| -p.coeff(0).to_i64().unwrap()).collect();
        let mut consts = consts;
        consts.sort();
        assert_eq!(consts, (616..=624).collect::<Vec<_>>());
    }

    #[test]
    fn contradictory_parity() {
        let spec = EnumSpec::new(2, 6, SurdInterval::ints(0, 25)).with_binomial_parity().with_fixed(2, 4);
        let r = enumerate(&spec).unwrap();
        assert!(r.polynomials.is_empty());
        assert!(r.diagnostic.is_some());
    }

    #[test]
    fn mckee() {
        assert!(!mckee_prune(10, 17));
        assert!(mckee_prune(5, 9));
        assert!(!mckee_prune(5, 8));
        assert!(mckee_prune(4, 4));
    }

    #[test]
    fn matches_brute_force_small() {
        for d in 1..=3 {
            for t in d as i64..=8 {
                let fast = enumerate(&EnumSpec::new(d, t, SurdInterval::ints(0, t))).unwrap().polynomials;
                assert_eq!(fast, brute_force(d, t), "d={d} t={t}");
            }
        }
    }

    #[test]
    fn irreducibility() {
        let mut pool = FactorPool { binomial_parity: false, ..Default::default() };
        for s in ["x^2-6x+1", "x^2-6x+9", "x^3-7x^2+11x-1"] {
            let p: IntPoly = s.parse().unwrap();
            prepare_pool(&mut pool, &p).unwrap();
        }
        let c = |s: &str| classify_irreducible(&pool, &s.parse().unwrap()).unwrap();
        assert_eq!(c("x^2-6x+1"), Irreducibility::Irreducible);
        assert_eq!(c("x^2-6x+9"), Irreducibility::Reducible("x-3".parse().unwrap()));
        assert_eq!(c("x^3-7x^2+11x-1"), Irreducibility::Irreducible);
        let empty = FactorPool::default();
        assert!(matches!(
            classify_irreducible(&empty, &"x^2-6x+1".parse().unwrap()),
            Err(TpError::MissingStratum { .. })
        ));
    }
}
