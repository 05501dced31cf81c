//! Graphs, Seidel matrices `S = J - I - 2A`, switching, exact characteristic
//! polynomials, and executable checks of the walk-count and coefficient
//! congruences they satisfy.

use std::fmt;
use std::num::Wrapping;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::exact::{factorial, nu2, nu2_int, rat_int, totient, Rat, Val2};
use crate::poly::{mod_reduce, IntPoly, ResiduePoly};

#[derive(Debug, Error)]
pub enum SeidelError {
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error("malformed graph input: {0}")]
    Parse(String),
    #[error("{0} requires odd order, got {1}")]
    NeedOddOrder(&'static str, usize),
    #[error("walk enumeration too large ({0} walks, limit 10^7)")]
    TooManyWalks(BigInt),
    #[error("congruence failed: {0}")]
    CongruenceFailed(String),
    #[error("bad argument: {0}")]
    BadArgument(String),
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { n, adj: vec![vec![false; n]; n] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set_edge(u, v, true);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            g.set_edge(u, (u + 1) % n, true);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for u in 1..n {
            g.set_edge(u - 1, u, true);
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, SeidelError> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(SeidelError::Parse(format!("bad edge ({u}, {v}) for order {n}")));
            }
            g.set_edge(u, v, true);
        }
        Ok(g)
    }

    /// Each edge present independently with probability 1/2.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<bool>() {
                    g.set_edge(u, v, true);
                }
            }
        }
        g
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u][v]
    }

    pub fn set_edge(&mut self, u: usize, v: usize, on: bool) {
        assert!(u != v, "loops are not allowed");
        self.adj[u][v] = on;
        self.adj[v][u] = on;
    }

    pub fn toggle_edge(&mut self, u: usize, v: usize) {
        let on = !self.adj[u][v];
        self.set_edge(u, v, on);
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().filter(|&&b| b).count()
    }

    pub fn is_euler(&self) -> bool {
        (0..self.n).all(|v| self.degree(v).is_multiple_of(2))
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u][v] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.edges().len()
    }

    pub fn adjacency(&self) -> Vec<Vec<i64>> {
        self.adj.iter().map(|row| row.iter().map(|&b| i64::from(b)).collect()).collect()
    }

    /// Edge-list text: an `order N` line followed by one `u v` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("order {}\n", self.n);
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    /// Parse edge-list text. Blank lines and `#` comments are ignored. Without
    /// an `order` line the order is one more than the largest vertex.
    pub fn from_edge_list(text: &str) -> Result<Self, SeidelError> {
        let mut order = None;
        let mut edges = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| SeidelError::Parse(format!("not a vertex: {s:?}")));
            match parts.as_slice() {
                ["order", n] => order = Some(num(n)?),
                [u, v] => edges.push((num(u)?, num(v)?)),
                _ => return Err(SeidelError::Parse(format!("bad line {line:?}"))),
            }
        }
        let n = order.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
        Graph::from_edges(n, &edges)
    }

    /// Upper triangle, row by row, as a `0`/`1` string of length `n(n-1)/2`.
    pub fn to_bitstring(&self) -> String {
        let mut s = String::with_capacity(self.n * self.n / 2);
        for u in 0..self.n {
            for v in u + 1..self.n {
                s.push(if self.adj[u][v] { '1' } else { '0' });
            }
        }
        s
    }

    pub fn from_bitstring(bits: &str) -> Result<Self, SeidelError> {
        let bits = bits.trim();
        let len = bits.len();
        let mut n = 0usize;
        while n * (n.saturating_sub(1)) / 2 < len {
            n += 1;
        }
        if n * n.saturating_sub(1) / 2 != len {
            return Err(SeidelError::Parse(format!("length {len} is not triangular")));
        }
        let mut g = Graph::empty(n);
        let mut it = bits.chars();
        for u in 0..n {
            for v in u + 1..n {
                match it.next() {
                    Some('1') => g.set_edge(u, v, true),
                    Some('0') => {}
                    c => return Err(SeidelError::Parse(format!("bad bit {c:?}"))),
                }
            }
        }
        Ok(g)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_edge_list())
    }
}

impl FromStr for Graph {
    type Err = SeidelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if !t.is_empty() && t.chars().all(|c| c == '0' || c == '1') {
            Graph::from_bitstring(t)
        } else {
            Graph::from_edge_list(s)
        }
    }
}

/// Symmetric matrix with zero diagonal and `±1` off the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeidelMatrix {
    entries: Vec<Vec<i8>>,
}

impl SeidelMatrix {
    pub fn new(entries: Vec<Vec<i8>>) -> Result<Self, SeidelError> {
        let n = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(SeidelError::Malformed(format!("row {i} has length {}", row.len())));
            }
            if row[i] != 0 {
                return Err(SeidelError::Malformed(format!("nonzero diagonal at {i}")));
            }
            for (j, &x) in row.iter().enumerate() {
                if i != j && x != 1 && x != -1 {
                    return Err(SeidelError::Malformed(format!("entry ({i},{j}) = {x}")));
                }
                if entries[j][i] != x {
                    return Err(SeidelError::Malformed(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(SeidelMatrix { entries })
    }

    pub fn from_graph(g: &Graph) -> Self {
        let n = g.order();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            0
                        } else if g.has_edge(i, j) {
                            -1
                        } else {
                            1
                        }
                    })
                    .collect()
            })
            .collect();
        SeidelMatrix { entries }
    }

    /// Vertices `i, j` adjacent iff `S_ij = -1`.
    pub fn underlying_graph(&self) -> Graph {
        let n = self.order();
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if self.entries[i][j] == -1 {
                    g.set_edge(i, j, true);
                }
            }
        }
        g
    }

    pub fn order(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<i8>] {
        &self.entries
    }

    /// `DSD` with `D = diag(-1 on U, +1 elsewhere)`.
    pub fn switch(&self, subset: &[usize]) -> Result<SeidelMatrix, SeidelError> {
        let n = self.order();
        let mut inside = vec![false; n];
        for &u in subset {
            if u >= n {
                return Err(SeidelError::BadArgument(format!("vertex {u} out of range")));
            }
            inside[u] = true;
        }
        let entries = (0..n)
            .map(|i| {
                (0..n).map(|j| if inside[i] != inside[j] { -self.entries[i][j] } else { self.entries[i][j] }).collect()
            })
            .collect();
        Ok(SeidelMatrix { entries })
    }

    pub fn char_poly(&self) -> IntPoly {
        let m: Vec<Vec<BigInt>> = self.entries.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        IntPoly::new(berkowitz(&m).into_iter().rev().collect())
    }

    /// `χ_S mod 2^e` (`1 <= e <= 63`), using wrapping 64-bit arithmetic.
    pub fn char_poly_mod(&self, e: u32) -> Result<ResiduePoly, SeidelError> {
        if !(1..=63).contains(&e) {
            return Err(SeidelError::BadArgument(format!("exponent {e} outside 1..=63")));
        }
        let m: Vec<Vec<Wrapping<u64>>> =
            self.entries.iter().map(|r| r.iter().map(|&x| Wrapping(x as i64 as u64)).collect()).collect();
        let mask = (1u64 << e) - 1;
        let mut residues: Vec<u64> = berkowitz(&m).into_iter().rev().map(|w| w.0 & mask).collect();
        while residues.len() > 1 && residues.last() == Some(&0) {
            residues.pop();
        }
        Ok(ResiduePoly { modulus_exponent: e, residues })
    }

    /// `χ_{J-2A}(x) = χ_S(x - 1)` for the underlying graph's adjacency matrix `A`.
    pub fn shifted_char_poly(&self) -> IntPoly {
        self.char_poly().shift(&BigInt::from(1))
    }
}

/// Division-free characteristic polynomial `det(xI - M)` (Berkowitz), as
/// descending coefficients. Works over any commutative ring.
pub fn berkowitz<T>(m: &[Vec<T>]) -> Vec<T>
where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let n = m.len();
    let neg = |x: T| T::zero() - x;
    if n == 0 {
        return vec![T::one()];
    }
    let mut vect = vec![T::one(), neg(m[0][0].clone())];
    for r in 1..n {
        // Toeplitz column: 1, -a, -R C, -R A C, ..., -R A^{r-1} C
        let mut t = Vec::with_capacity(r + 2);
        t.push(T::one());
        t.push(neg(m[r][r].clone()));
        let mut v: Vec<T> = (0..r).map(|i| m[i][r].clone()).collect();
        for _ in 0..r {
            let rc = (0..r).fold(T::zero(), |acc, j| acc + m[r][j].clone() * v[j].clone());
            t.push(neg(rc));
            v = (0..r).map(|i| (0..r).fold(T::zero(), |acc, j| acc + m[i][j].clone() * v[j].clone())).collect();
        }
        let mut next = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc = T::zero();
            for j in 0..=i.min(r) {
                acc = acc + t[i - j].clone() * vect[j].clone();
            }
            next.push(acc);
        }
        vect = next;
    }
    vect
}

/// `det(xI - M)` for an integer matrix.
pub fn char_poly(m: &[Vec<i64>]) -> IntPoly {
    let b: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    IntPoly::new(berkowitz(&b).into_iter().rev().collect())
}

/// The unique Euler graph in the switching class of `S` (odd order).
///
/// Switching on `U` changes the degree parity of every vertex outside `U`
/// by `|U|` and inside `U` by `n - |U|`; for odd `n` switching on the set of
/// odd-degree vertices (which has even size) makes every degree even. The
/// only other solution is its complement, which gives the same graph.
pub fn euler_representative(s: &SeidelMatrix) -> Result<Graph, SeidelError> {
    let n = s.order();
    if n.is_multiple_of(2) {
        return Err(SeidelError::NeedOddOrder("euler_representative", n));
    }
    let g = s.underlying_graph();
    let odd: Vec<usize> = (0..n).filter(|&v| g.degree(v) % 2 == 1).collect();
    let rep = s.switch(&odd)?.underlying_graph();
    if !rep.is_euler() {
        return Err(SeidelError::CongruenceFailed("switching on odd-degree vertices left an odd degree".into()));
    }
    Ok(rep)
}

/// Closed-walk and total-walk counts of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkStats {
    /// `traces[d] = tr(A^d)` for `d = 0..=N`.
    pub traces: Vec<BigInt>,
    /// `bilinear[k] = 1^T A^k 1` for `k = 0..=N`.
    pub bilinear: Vec<BigInt>,
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut c = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    c[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    c
}

pub fn walk_stats(g: &Graph, big_n: usize) -> WalkStats {
    let n = g.order();
    let a: Vec<Vec<BigInt>> = g.adjacency().into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect();
    let mut p: Vec<Vec<BigInt>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let mut traces = Vec::with_capacity(big_n + 1);
    let mut bilinear = Vec::with_capacity(big_n + 1);
    for d in 0..=big_n {
        if d > 0 {
            p = mat_mul(&p, &a);
        }
        traces.push((0..n).map(|i| p[i][i].clone()).sum());
        bilinear.push(p.iter().flatten().sum());
    }
    WalkStats { traces, bilinear }
}

/// Element of the dihedral group acting on positions `0..N` of a closed
/// walk: `Rotation(k)` is `i -> i + k`; `Reflection(k)` is `r^k s` with
/// `s: i -> -1 - i` (reflection through an edge of the `N`-gon).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DihedralElement {
    Rotation(i64),
    Reflection(i64),
}

impl DihedralElement {
    fn apply(self, i: usize, big_n: usize) -> usize {
        let n = big_n as i64;
        let j = match self {
            DihedralElement::Rotation(k) => i as i64 + k,
            DihedralElement::Reflection(k) => k - 1 - i as i64,
        };
        j.rem_euclid(n) as usize
    }
}

/// Brute-force count of closed `N`-walks fixed by `elem`.
pub fn dihedral_fix_oracle(g: &Graph, big_n: usize, elem: DihedralElement) -> Result<u64, SeidelError> {
    if big_n < 3 {
        return Err(SeidelError::BadArgument(format!("N = {big_n} < 3")));
    }
    let open = walk_stats(g, big_n - 1).bilinear[big_n - 1].clone();
    if open > BigInt::from(10_000_000u64) {
        return Err(SeidelError::TooManyWalks(open));
    }
    let n = g.order();
    let perm: Vec<usize> = (0..big_n).map(|i| elem.apply(i, big_n)).collect();
    let mut walk = vec![0usize; big_n];
    let mut count = 0u64;
    fn rec(g: &Graph, n: usize, pos: usize, walk: &mut Vec<usize>, perm: &[usize], count: &mut u64) {
        let big_n = walk.len();
        if pos == big_n {
            if g.has_edge(walk[big_n - 1], walk[0]) && (0..big_n).all(|i| walk[perm[i]] == walk[i]) {
                *count += 1;
            }
            return;
        }
        for v in 0..n {
            if pos == 0 || g.has_edge(walk[pos - 1], v) {
                walk[pos] = v;
                rec(g, n, pos + 1, walk, perm, count);
            }
        }
    }
    rec(g, n, 0, &mut walk, &perm, &mut count);
    Ok(count)
}

/// Closed-form fixed-walk counts for the dihedral action.
pub fn dihedral_fix_formula(stats: &WalkStats, big_n: usize, elem: DihedralElement) -> BigInt {
    match elem {
        DihedralElement::Rotation(k) => {
            let g = k.rem_euclid(big_n as i64).gcd(&(big_n as i64)) as usize;
            stats.traces[g].clone()
        }
        DihedralElement::Reflection(k) => {
            if big_n % 2 == 1 || k.rem_euclid(2) == 0 {
                BigInt::zero()
            } else {
                stats.bilinear[big_n / 2].clone()
            }
        }
    }
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn check(ok: bool, what: impl FnOnce() -> String, done: &mut Vec<String>, name: &str) -> Result<(), SeidelError> {
    if ok {
        done.push(name.to_string());
        Ok(())
    } else {
        Err(SeidelError::CongruenceFailed(what()))
    }
}

/// Names of the congruences that were checked and held.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub checked: Vec<String>,
}

/// Burnside congruences on walk counts, and the Euler-graph refinements.
pub fn verify_trace_congruences(g: &Graph, big_n: usize) -> Result<CheckReport, SeidelError> {
    if big_n < 3 {
        return Err(SeidelError::BadArgument(format!("N = {big_n} < 3")));
    }
    let st = walk_stats(g, big_n);
    let modulus = BigInt::from(2 * big_n);
    let phi = |m: usize| BigInt::from(totient(m as i64).expect("positive"));
    let mut sum = BigInt::zero();
    for d in divisors(big_n) {
        sum += phi(big_n / d) * &st.traces[d];
    }
    let mut rep = CheckReport::default();
    if big_n.is_multiple_of(2) {
        let total = &sum + BigInt::from(big_n / 2) * &st.bilinear[big_n / 2];
        check(
            total.mod_floor(&modulus).is_zero(),
            || format!("even-N Burnside sum {total} not divisible by {modulus}"),
            &mut rep.checked,
            "burnside-even",
        )?;
    } else {
        check(
            sum.mod_floor(&modulus).is_zero(),
            || format!("odd-N Burnside sum {sum} not divisible by {modulus}"),
            &mut rep.checked,
            "burnside-odd",
        )?;
    }
    if g.is_euler() {
        let four = BigInt::from(4);
        check(st.bilinear[1].is_even(), || "1^T A 1 odd".into(), &mut rep.checked, "euler-walks-1")?;
        for i in 2..=big_n {
            check(
                st.bilinear[i].mod_floor(&four).is_zero(),
                || format!("1^T A^{i} 1 = {} not divisible by 4", st.bilinear[i]),
                &mut rep.checked,
                "euler-walks-4",
            )?;
        }
        if big_n.is_multiple_of(2) && big_n >= 4 {
            let mut rhs = BigInt::zero();
            for d in divisors(big_n).into_iter().filter(|&d| d != big_n) {
                rhs -= phi(big_n / d) * &st.traces[d];
            }
            check(
                (&st.traces[big_n] - &rhs).mod_floor(&modulus).is_zero(),
                || format!("Euler trace congruence fails for N = {big_n}"),
                &mut rep.checked,
                "euler-trace",
            )?;
        }
    }
    Ok(rep)
}

/// Coefficients of `χ_{J-2A}` from those of `χ_A` and the walk counts
/// `walks[i] = 1^T A^i 1`:
/// `a_r = (-2)^r (b_r + 1/2 sum_{i=1}^r b_{r-i} 1^T A^{i-1} 1)`.
pub fn coefficient_map(b: &[BigInt], walks: &[BigInt]) -> Result<Vec<BigInt>, SeidelError> {
    let n = b.len().checked_sub(1).ok_or_else(|| SeidelError::BadArgument("empty coefficient list".into()))?;
    if walks.len() < n {
        return Err(SeidelError::BadArgument(format!("need {n} walk counts, got {}", walks.len())));
    }
    let mut a = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let mut s = BigInt::zero();
        for i in 1..=r {
            s += &b[r - i] * &walks[i - 1];
        }
        // (-2)^r * s / 2 is integral for r >= 1; s itself may be odd when n is odd.
        let sign = if r % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let mut ar = BigInt::from(-2).pow(r as u32) * &b[r];
        if r == 0 {
            if !s.is_zero() {
                return Err(SeidelError::CongruenceFailed("nonzero walk term at r = 0".into()));
            }
        } else {
            ar += sign * (s << (r - 1));
        }
        a.push(ar);
    }
    Ok(a)
}

fn divisible_by_pow2(x: &BigInt, r: usize) -> bool {
    nu2_int(x) >= Val2::Finite(r as i64)
}

/// True iff every coefficient `a_r` of `p(x - 1)` (descending index) is
/// divisible by `2^r`, which holds for `p = χ_S` whenever `S` has even order.
pub fn shifted_divisibility(p: &IntPoly) -> bool {
    let q = p.shift(&BigInt::one());
    (0..=q.degree()).all(|r| divisible_by_pow2(&q.desc(r), r))
}

/// Parity and valuation constraints on `χ_{J-2A}` and `χ_A`: `a_0 = 1`,
/// `a_1 = -n`, `a_2 = 0`; `2^r | a_r` for even `r` (all `r` if `n` is even);
/// `b_r` even for odd `r`; and for odd `n`, on the Euler representative,
/// `b_{2r} = -a_{2r+1}/(2^{2r} n)` and
/// `b_{2r-1} = (a_{2r+1} + a_{2r} + a_{2r-1} a_3)/2^{2r-1}` mod 4.
pub fn verify_parity_theorems(s: &SeidelMatrix) -> Result<CheckReport, SeidelError> {
    let n = s.order();
    let mut rep = CheckReport::default();
    let g = if n % 2 == 1 { euler_representative(s)? } else { s.underlying_graph() };
    let a_poly = char_poly(&g.adjacency());
    let b: Vec<BigInt> = (0..=n).map(|i| a_poly.desc(i)).collect();
    let j2a = SeidelMatrix::from_graph(&g).shifted_char_poly();
    let a: Vec<BigInt> = (0..=n).map(|i| j2a.desc(i)).collect();

    check(a[0].is_one(), || format!("a_0 = {}", a[0]), &mut rep.checked, "a0")?;
    if n >= 1 {
        check(a[1] == BigInt::from(-(n as i64)), || format!("a_1 = {}", a[1]), &mut rep.checked, "a1")?;
    }
    if n >= 2 {
        check(a[2].is_zero(), || format!("a_2 = {}", a[2]), &mut rep.checked, "a2")?;
    }
    for r in 0..=n {
        if n.is_multiple_of(2) || r % 2 == 0 {
            check(
                divisible_by_pow2(&a[r], r),
                || format!("2^{r} does not divide a_{r} = {}", a[r]),
                &mut rep.checked,
                if n.is_multiple_of(2) { "even-order-valuation" } else { "even-index-valuation" },
            )?;
        }
        if r % 2 == 1 {
            check(b[r].is_even(), || format!("b_{r} = {} is odd", b[r]), &mut rep.checked, "odd-b-even")?;
        }
    }
    if n % 2 == 1 {
        let four = Val2::Finite(2);
        let nn = rat_int(n as i64);
        for r in 1..=(n - 1) / 2 {
            let even_pred = -Rat::new(a[2 * r + 1].clone(), BigInt::one() << (2 * r)) / &nn;
            check(
                nu2(&(rat_int(b[2 * r].clone()) - even_pred)) >= four,
                || format!("b_{} congruence mod 4 fails", 2 * r),
                &mut rep.checked,
                "euler-b-even",
            )?;
            let odd_pred = Rat::new(&a[2 * r + 1] + &a[2 * r] + &a[2 * r - 1] * &a[3], BigInt::one() << (2 * r - 1));
            check(
                nu2(&(rat_int(b[2 * r - 1].clone()) - odd_pred)) >= four,
                || format!("b_{} congruence mod 4 fails", 2 * r - 1),
                &mut rep.checked,
                "euler-b-odd",
            )?;
        }
    }
    Ok(rep)
}

/// All `(m_1..m_d)` with `sum j m_j = d`.
fn weighted_compositions(d: usize) -> Vec<Vec<u64>> {
    fn rec(j: usize, left: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if j == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for m in 0..=left / j {
            cur[j - 1] = m as u64;
            rec(j - 1, left - m * j, cur, out);
        }
        cur[j - 1] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0u64; d];
    rec(d, d, &mut cur, &mut out);
    out
}

/// Outcome of the odd-index coefficient congruence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddIndexCongruence {
    pub k: usize,
    /// `a_{2k+1} mod 2^{2k+1}`.
    pub lhs: BigInt,
    /// The predicted residue mod `2^{2k+1}`.
    pub rhs: BigInt,
}

/// Residue of a 2-adically integral rational modulo `2^e`.
fn residue_mod_pow2(q: &Rat, e: usize) -> Result<BigInt, SeidelError> {
    if nu2(q) < Val2::Finite(0) {
        return Err(SeidelError::CongruenceFailed(format!("{q} is not 2-adically integral")));
    }
    let m = BigInt::one() << e;
    let inv = q.denom().modinv(&m).expect("odd denominator");
    Ok((q.numer() * inv).mod_floor(&m))
}

/// Predicts `a_{2k+1} mod 2^{2k+1}` from lower coefficients of `χ_{J-2A}`
/// (descending list `a`) for an Euler graph of odd order `n`, and checks it.
pub fn odd_index_congruence(a: &[BigInt], n: usize, k: usize) -> Result<OddIndexCongruence, SeidelError> {
    if n.is_multiple_of(2) {
        return Err(SeidelError::NeedOddOrder("odd-index congruence", n));
    }
    if k < 2 || 2 * k + 1 > n || a.len() < 2 * k + 2 {
        return Err(SeidelError::BadArgument(format!("k = {k} outside 2..=(n-1)/2 for n = {n}")));
    }
    let nn = rat_int(n as i64);
    let pow2 = |e: usize| rat_int(BigInt::one() << e);
    let even_factor = |j: usize| Rat::from(a[2 * j + 1].clone()) / (pow2(2 * j) * &nn);
    let odd_factor = |j: usize| Rat::from(&a[2 * j + 1] + &a[2 * j] + &a[2 * j - 1] * &a[3]) / pow2(2 * j - 1);
    let two_k = 2 * k;
    let mut total = Rat::zero();
    for d in divisors(two_k) {
        let weight =
            Rat::new(BigInt::from(d as u64 * totient((two_k / d) as i64).expect("positive")), BigInt::from(two_k))
                * pow2(two_k);
        for m in weighted_compositions(d) {
            if d == two_k && m[two_k - 1] != 0 {
                continue;
            }
            let parts: u64 = m.iter().sum();
            let mut denom = BigInt::one();
            for &mi in &m {
                denom *= factorial(mi);
            }
            let c = &weight * Rat::new(factorial(parts - 1), denom);
            let mut p = Rat::one();
            for (idx, &mi) in m.iter().enumerate() {
                if mi == 0 {
                    continue;
                }
                let j_index = idx + 1;
                let base = if j_index % 2 == 0 { even_factor(j_index / 2) } else { odd_factor(j_index.div_ceil(2)) };
                p *= num_traits::pow(base, mi as usize);
            }
            total += c * p;
        }
    }
    let e = two_k + 1;
    let rhs = residue_mod_pow2(&total, e)?;
    let lhs = a[two_k + 1].mod_floor(&(BigInt::one() << e));
    if lhs != rhs {
        return Err(SeidelError::CongruenceFailed(format!("a_{} = {lhs} but predicted {rhs} mod 2^{e}", two_k + 1)));
    }
    Ok(OddIndexCongruence { k, lhs, rhs })
}

/// `χ_S mod 2^e` as a residue polynomial computed exactly (reference path).
pub fn exact_residue(s: &SeidelMatrix, e: u32) -> ResiduePoly {
    mod_reduce(&s.char_poly(), e).expect("exponent in range")
}

/// Total number of vertices with odd degree (always even).
pub fn odd_degree_count(g: &Graph) -> usize {
    (0..g.order()).filter(|&v| g.degree(v) % 2 == 1).count()
}

/// `|x|` as `u64` when small, for reporting.
pub fn small(x: &BigInt) -> Option<u64> {
    x.abs().to_u64()
}
