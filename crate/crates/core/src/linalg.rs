//! Exact linear algebra used by the brute-force and cohomology routines.
//!
//! Dense routines work over `BigRational`. Sparse rank works either exactly
//! (fraction-free over `BigInt` with content removal) or modulo a prime.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Sparse row: `(column, value)` sorted by column, no zero values.
pub type SparseRow<T> = Vec<(usize, T)>;

/// Mersenne prime used by the modular fast path.
pub const PRIME: u64 = (1 << 31) - 1;

/// Reduced row echelon form in place. Returns the pivot columns.
pub fn rref(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<BigRational>]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Basis of the right null space `{x : m x = 0}`.
pub fn kernel(m: &[Vec<BigRational>], cols: usize) -> Vec<Vec<BigRational>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[i][f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `m x = b`, or `None` if inconsistent.
pub fn solve(m: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut a);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (i, &pc) in pivots.iter().enumerate() {
        x[pc] = a[i][cols].clone();
    }
    Some(x)
}

/// Inverse of a square matrix, or `None` when singular.
pub fn invert(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    let pivots = rref(&mut a);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn content_normalize(row: &mut SparseRow<BigInt>) {
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            break;
        }
    }
    if !g.is_zero() && !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
    if row.first().is_some_and(|(_, v)| v.is_negative()) {
        for (_, v) in row.iter_mut() {
            *v = -v.clone();
        }
    }
}

/// `a*x - b*y` on sparse rows.
fn combine(a: &BigInt, x: &SparseRow<BigInt>, b: &BigInt, y: &SparseRow<BigInt>) -> SparseRow<BigInt> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        if j >= y.len() || (i < x.len() && x[i].0 < y[j].0) {
            out.push((x[i].0, a * &x[i].1));
            i += 1;
        } else if i >= x.len() || y[j].0 < x[i].0 {
            out.push((y[j].0, -(b * &y[j].1)));
            j += 1;
        } else {
            let v = a * &x[i].1 - b * &y[j].1;
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Incremental echelon basis over the integers (fraction-free).
#[derive(Default)]
pub struct ExactEchelon {
    pivots: HashMap<usize, SparseRow<BigInt>>,
}

impl ExactEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Inserts a row; returns true if it increased the rank.
    pub fn insert(&mut self, mut row: SparseRow<BigInt>) -> bool {
        row.retain(|(_, v)| !v.is_zero());
        content_normalize(&mut row);
        while let Some(&(c, _)) = row.first() {
            match self.pivots.get(&c) {
                None => {
                    self.pivots.insert(c, row);
                    return true;
                }
                Some(p) => {
                    let a = p[0].1.clone();
                    let b = row[0].1.clone();
                    let g = a.gcd(&b);
                    row = combine(&(&a / &g), &row, &(&b / &g), p);
                    content_normalize(&mut row);
                }
            }
        }
        false
    }
}

/// Incremental echelon basis modulo [`PRIME`].
#[derive(Default)]
pub struct ModpEchelon {
    pivots: HashMap<usize, SparseRow<u64>>,
}

fn pow_mod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    b %= PRIME;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % PRIME;
        }
        b = b * b % PRIME;
        e >>= 1;
    }
    acc
}

/// Reduces an integer into `[0, PRIME)`.
pub fn to_modp(v: i64) -> u64 {
    v.rem_euclid(PRIME as i64) as u64
}

impl ModpEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn insert(&mut self, mut row: SparseRow<u64>) -> bool {
        row.retain(|(_, v)| *v % PRIME != 0);
        while let Some(&(c, lead)) = row.first() {
            match self.pivots.get(&c) {
                None => {
                    let inv = pow_mod(lead, PRIME - 2);
                    for (_, v) in row.iter_mut() {
                        *v = *v * inv % PRIME;
                    }
                    self.pivots.insert(c, row);
                    return true;
                }
                Some(p) => {
                    let mut out = Vec::with_capacity(row.len() + p.len());
                    let (mut i, mut j) = (0, 0);
                    while i < row.len() || j < p.len() {
                        if j >= p.len() || (i < row.len() && row[i].0 < p[j].0) {
                            out.push(row[i]);
                            i += 1;
                        } else if i >= row.len() || p[j].0 < row[i].0 {
                            out.push((p[j].0, (PRIME - lead * p[j].1 % PRIME) % PRIME));
                            j += 1;
                        } else {
                            let v = (row[i].1 + PRIME - lead * p[j].1 % PRIME) % PRIME;
                            if v != 0 {
                                out.push((row[i].0, v));
                            }
                            i += 1;
                            j += 1;
                        }
                    }
                    row = out;
                }
            }
        }
        false
    }
}

/// Sparse rational row keyed by column.
pub type RatRow = BTreeMap<usize, BigRational>;

fn axpy(target: &mut RatRow, k: &BigRational, row: &RatRow) {
    for (c, v) in row {
        let e = target.entry(*c).or_insert_with(BigRational::zero);
        *e -= k * v;
        if e.is_zero() {
            target.remove(c);
        }
    }
}

/// Incremental echelon basis over the rationals that remembers how each
/// basis row was combined from the inserted rows.
///
/// Every basis row has a unit leading entry and no entries left of it, so
/// reducing a vector column by column leaves a residual that vanishes on
/// all pivot columns; this residual depends only on the row space.
#[derive(Debug, Clone, Default)]
pub struct RatEchelon {
    pivots: BTreeMap<usize, (RatRow, RatRow)>,
}

impl RatEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.contains_key(&col)
    }

    /// Inserts `row` tagged `tag`; returns true if the rank grew.
    pub fn insert(&mut self, row: RatRow, tag: usize) -> bool {
        let mut combo = RatRow::new();
        combo.insert(tag, BigRational::one());
        let (row, combo) = self.reduce_tracked(row, combo);
        let Some((&lead, lv)) = row.iter().next() else {
            return false;
        };
        let inv = lv.recip();
        let scale = |r: RatRow| -> RatRow { r.into_iter().map(|(c, v)| (c, v * &inv)).collect() };
        self.pivots.insert(lead, (scale(row), scale(combo)));
        true
    }

    fn reduce_tracked(&self, mut v: RatRow, mut combo: RatRow) -> (RatRow, RatRow) {
        let mut from = 0usize;
        loop {
            let next = v
                .range(from..)
                .map(|(c, x)| (*c, x.clone()))
                .find(|(c, _)| self.pivots.contains_key(c));
            let Some((c, k)) = next else {
                break;
            };
            let (prow, pcombo) = &self.pivots[&c];
            axpy(&mut v, &k, prow);
            axpy(&mut combo, &k, pcombo);
            from = c + 1;
        }
        (v, combo)
    }

    /// Residual of `v` modulo the row space together with the combination
    /// `x` of inserted rows such that `v = residual + sum x_tag row_tag`.
    pub fn reduce(&self, v: RatRow) -> (RatRow, RatRow) {
        let (res, combo) = self.reduce_tracked(v, RatRow::new());
        (res, combo.into_iter().map(|(c, x)| (c, -x)).collect())
    }
}

/// Rank of a sparse integer matrix, exactly or modulo [`PRIME`].
pub fn sparse_rank(rows: &[SparseRow<i64>], exact: bool) -> usize {
    if exact {
        let mut e = ExactEchelon::new();
        for r in rows {
            e.insert(r.iter().map(|&(c, v)| (c, BigInt::from(v))).collect());
        }
        e.rank()
    } else {
        let mut e = ModpEchelon::new();
        for r in rows {
            e.insert(r.iter().map(|&(c, v)| (c, to_modp(v))).collect());
        }
        e.rank()
    }
}
