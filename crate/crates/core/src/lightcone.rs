//! Refined Hilbert series of `R = Sym(p, theta) / <T, U>`.
//!
//! Three routes are provided:
//!
//! * [`closed_form_series`] restricts the first-stage product
//!   `(1-s)^[1] (1-t)^-[1] (1-st)^-1 (1-t^2)` to the bidegrees where `R`
//!   lives (`m <= d` on the row `n = 0`, `m <= d-1` above it);
//! * [`displayed_formula_series`] evaluates the double-sum expression
//!   literally, and [`formula_mismatch`] lists where it differs from the
//!   restriction;
//! * [`brute_quotient_series`] computes the quotient weight space by weight
//!   space with exact ranks.
//!
//! The sheet-one prediction and its support report live here as well.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::Parity;
use crate::linalg::{sparse_rank, SparseRow};
use crate::pseries::{gen_factor, Coeff, BiSeries, GeneratorTerm, Truncation};
use crate::repring::{Character, SoGroup, VirtualRep};

/// Options for the brute-force oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteOptions {
    /// Fraction-free integer elimination; otherwise modulo a 31-bit prime.
    pub exact: bool,
    pub d_max_brute: usize,
    /// Largest ambient weight space accepted.
    pub max_block: usize,
}

impl Default for BruteOptions {
    fn default() -> Self {
        BruteOptions {
            exact: true,
            d_max_brute: 4,
            max_block: 200_000,
        }
    }
}

fn group(d: usize) -> Result<SoGroup> {
    SoGroup::new(d)
}

/// `(1-s)^[1] (1-t)^-[1] (1-st)^-1 (1-t^2)`.
pub fn first_stage_series(d: usize, trunc: Truncation) -> Result<BiSeries<VirtualRep>> {
    let g = group(d)?;
    let v = VirtualRep::vector(g);
    let one = VirtualRep::one(g);
    let gens = [
        GeneratorTerm::new((1, 0), v.clone(), Parity::Odd),
        GeneratorTerm::new((0, 1), v, Parity::Even),
        GeneratorTerm::new((1, 1), one.clone(), Parity::Even),
        GeneratorTerm::new((0, 2), one.clone(), Parity::Odd),
    ];
    let mut acc = BiSeries::one(&one, trunc);
    for gen in &gens {
        acc = acc.mul(&gen_factor(gen, trunc)?);
    }
    Ok(acc)
}

/// Bidegrees where `R` is non-zero: `(m, 0)` with `m <= d`, and `(m, n)`
/// with `m < d`, `n >= 1`.
pub fn in_support(d: usize, m: u32, n: u32) -> bool {
    let d = d as u32;
    if n == 0 {
        m <= d
    } else {
        m < d
    }
}

/// Exact series of `R`, by restricting the first-stage product.
pub fn closed_form_series(d: usize, trunc: Truncation) -> Result<BiSeries<VirtualRep>> {
    let z1 = first_stage_series(d, trunc)?;
    let kept = z1
        .iter()
        .filter(|(&(m, n), _)| in_support(d, m, n))
        .map(|(&k, c)| (k, c.clone()));
    Ok(BiSeries::from_coeffs(z1.unit(), trunc, kept))
}

/// `(1-s)^[1] + (1-t^2)(1-t)^-[1] sum_{m<d} sum_{1<=n<=m} (-1)^(m-n) L^(m-n) s^m t^n`,
/// evaluated term by term.
pub fn displayed_formula_series(d: usize, trunc: Truncation) -> Result<BiSeries<VirtualRep>> {
    let g = group(d)?;
    let v = VirtualRep::vector(g);
    let one = VirtualRep::one(g);
    let ext = v.ext_powers(d);
    let mut first = BiSeries::zero(&one, trunc);
    for (k, e) in ext.iter().enumerate() {
        let c = if k % 2 == 1 { Coeff::neg(e) } else { e.clone() };
        first.set(k as u32, 0, c);
    }
    let mut sum = BiSeries::zero(&one, trunc);
    for m in 0..d as u32 {
        for n in 1..=m {
            let k = (m - n) as usize;
            let c = if k % 2 == 1 { Coeff::neg(&ext[k]) } else { ext[k].clone() };
            sum.set(m, n, c);
        }
    }
    let pref = gen_factor(&GeneratorTerm::new((0, 2), one.clone(), Parity::Odd), trunc)?
        .mul(&gen_factor(&GeneratorTerm::new((0, 1), v, Parity::Even), trunc)?);
    Ok(first.add(&pref.mul(&sum)))
}

/// One bidegree where two series differ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub m: u32,
    pub n: u32,
    pub left: String,
    pub right: String,
}

fn differences(a: &BiSeries<VirtualRep>, b: &BiSeries<VirtualRep>) -> Vec<Discrepancy> {
    a.truncation()
        .meet(&b.truncation())
        .points()
        .into_iter()
        .filter_map(|(m, n)| {
            let (x, y) = (a.coeff(m, n), b.coeff(m, n));
            (x != y).then(|| Discrepancy {
                m,
                n,
                left: x.to_string(),
                right: y.to_string(),
            })
        })
        .collect()
}

/// Bidegrees where the displayed double sum (`left`) differs from the
/// restriction of the first-stage product (`right`).
pub fn formula_mismatch(d: usize, trunc: Truncation) -> Result<Vec<Discrepancy>> {
    Ok(differences(
        &displayed_formula_series(d, trunc)?,
        &closed_form_series(d, trunc)?,
    ))
}

/// Split basis: index `k < r` has weight `+e_k`, index `k + r` has `-e_k`,
/// and for odd `d` index `2r` has weight zero. The metric pairs `k` with
/// `k + r` and `2r` with itself.
struct SplitBasis {
    d: usize,
    r: usize,
}

impl SplitBasis {
    fn weight(&self, i: usize) -> Option<(usize, i32)> {
        if i < self.r {
            Some((i, 1))
        } else if i < 2 * self.r {
            Some((i - self.r, -1))
        } else {
            None
        }
    }

    fn partner(&self, i: usize) -> usize {
        if i < self.r {
            i + self.r
        } else if i < 2 * self.r {
            i - self.r
        } else {
            i
        }
    }
}

/// A basis monomial: odd variables as a bit mask, even ones as exponents.
type Mono = (u32, Vec<u8>);

fn add_weight(w: &mut [i32], basis: &SplitBasis, i: usize, k: i32) {
    if let Some((j, s)) = basis.weight(i) {
        w[j] += s * k;
    }
}

fn is_o_dominant(w: &[i32]) -> bool {
    w.iter().all(|&x| x >= 0) && w.windows(2).all(|p| p[0] >= p[1])
}

/// Monomials of bidegree `(m, n)` grouped by weight, keeping only weights
/// with sorted non-negative entries.
fn dominant_blocks(basis: &SplitBasis, m: usize, n: usize) -> HashMap<Vec<i32>, Vec<Mono>> {
    let d = basis.d;
    let mut out: HashMap<Vec<i32>, Vec<Mono>> = HashMap::new();
    if m > d {
        return out;
    }
    let masks: Vec<u32> = (0u32..1 << d).filter(|x| x.count_ones() as usize == m).collect();
    let mut exps = Vec::new();
    fn rec(i: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if i + 1 == cur.len() {
            cur[i] = left as u8;
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[i] = k as u8;
            rec(i + 1, left - k, cur, out);
        }
    }
    rec(0, n, &mut vec![0; d], &mut exps);
    for &mask in &masks {
        let mut wm = vec![0; basis.r];
        for i in 0..d {
            if mask >> i & 1 == 1 {
                add_weight(&mut wm, basis, i, 1);
            }
        }
        for e in &exps {
            let mut w = wm.clone();
            for (i, &k) in e.iter().enumerate() {
                add_weight(&mut w, basis, i, k as i32);
            }
            if is_o_dominant(&w) {
                out.entry(w).or_default().push((mask, e.clone()));
            }
        }
    }
    out
}

/// Dimension of the quotient in one weight space of bidegree `(m, n)`.
fn quotient_block(
    basis: &SplitBasis,
    w: &[i32],
    ambient: &[Mono],
    below_t: Option<&Vec<Mono>>,
    below_u: Option<&Vec<Mono>>,
    exact: bool,
) -> usize {
    let d = basis.d;
    let index: HashMap<&Mono, usize> = ambient.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let col = |x: &Mono| -> usize {
        *index
            .get(x)
            .unwrap_or_else(|| panic!("monomial outside the block of weight {w:?}"))
    };
    let mut rows: Vec<SparseRow<i64>> = Vec::new();
    let mut push = |acc: HashMap<usize, i64>| {
        let mut row: SparseRow<i64> = acc.into_iter().filter(|&(_, v)| v != 0).collect();
        row.sort_unstable();
        if !row.is_empty() {
            rows.push(row);
        }
    };
    // T = sum_{a,b} eta^{ab} p_a p_b
    for (mask, e) in below_t.into_iter().flatten() {
        let mut acc = HashMap::new();
        for a in 0..d {
            let b = basis.partner(a);
            if b < a {
                continue;
            }
            let mut f = e.clone();
            f[a] += 1;
            f[b] += 1;
            let c = if a == b { 1 } else { 2 };
            *acc.entry(col(&(*mask, f))).or_insert(0) += c;
        }
        push(acc);
    }
    // U = sum_{a} p_a theta_{partner(a)}
    for (mask, e) in below_u.into_iter().flatten() {
        let mut acc = HashMap::new();
        for a in 0..d {
            let b = basis.partner(a);
            if mask >> b & 1 == 1 {
                continue;
            }
            let sign = if (mask & ((1u32 << b) - 1)).count_ones() % 2 == 1 { -1 } else { 1 };
            let mut f = e.clone();
            f[a] += 1;
            *acc.entry(col(&(mask | 1 << b, f))).or_insert(0) += sign;
        }
        push(acc);
    }
    ambient.len() - sparse_rank(&rows, exact)
}

/// Series of `R` by linear algebra in each bidegree and weight space; the
/// coefficient of `s^m t^n` carries the sign `(-1)^m` of the odd degree.
pub fn brute_quotient_series(
    d: usize,
    trunc: Truncation,
    opts: BruteOptions,
) -> Result<BiSeries<VirtualRep>> {
    if d > opts.d_max_brute {
        return Err(Error::BruteForceTooLarge(format!(
            "d = {d} exceeds d_max_brute = {}",
            opts.d_max_brute
        )));
    }
    let g = group(d)?;
    let basis = SplitBasis { d, r: d / 2 };
    let pts = trunc.points();
    let blocks: HashMap<(u32, u32), HashMap<Vec<i32>, Vec<Mono>>> = pts
        .par_iter()
        .map(|&(m, n)| ((m, n), dominant_blocks(&basis, m as usize, n as usize)))
        .collect();
    for b in blocks.values().flat_map(|x| x.values()) {
        if b.len() > opts.max_block {
            return Err(Error::BruteForceTooLarge(format!(
                "weight space of size {} > {}",
                b.len(),
                opts.max_block
            )));
        }
    }
    let mut work: Vec<((u32, u32), Vec<i32>)> = blocks
        .iter()
        .flat_map(|(&k, ws)| ws.keys().map(move |w| (k, w.clone())))
        .collect();
    work.sort();
    let dims: Vec<((u32, u32), Vec<i32>, usize)> = work
        .into_par_iter()
        .map(|((m, n), w)| {
            let amb = &blocks[&(m, n)][&w];
            let bt = (n >= 2)
                .then(|| blocks.get(&(m, n - 2)).and_then(|b| b.get(&w)))
                .flatten();
            let bu = (m >= 1 && n >= 1)
                .then(|| blocks.get(&(m - 1, n - 1)).and_then(|b| b.get(&w)))
                .flatten();
            let q = quotient_block(&basis, &w, amb, bt, bu, opts.exact);
            ((m, n), w, q)
        })
        .collect();
    let mut per: HashMap<(u32, u32), Vec<(Vec<i32>, i128)>> = HashMap::new();
    for (k, w, q) in dims {
        let sign = if k.0 % 2 == 1 { -1 } else { 1 };
        per.entry(k).or_default().push((w, sign * q as i128));
    }
    let mut out = BiSeries::zero(&VirtualRep::one(g), trunc);
    for (&(m, n), ws) in &per {
        let rep = Character::from_dominant(g, ws.iter().cloned())?.decompose()?;
        out.set(m, n, rep);
    }
    Ok(out)
}

/// Logarithm of the sheet-one prediction:
/// `-[1]s + [1]t + st - t^2 + (-1)^d s^d t (t-s)/(1-t^2) (1-s)^-[1] (1-t)^[1]`.
pub fn sheet1_log_series(d: usize, trunc: Truncation) -> Result<BiSeries<VirtualRep>> {
    let g = group(d)?;
    let v = VirtualRep::vector(g);
    let one = VirtualRep::one(g);
    let mut out = BiSeries::zero(&one, trunc);
    let mut put = |m: u32, n: u32, c: &VirtualRep| {
        if trunc.contains(m, n) {
            let cur = out.coeff(m, n);
            out.set(m, n, cur + c.clone());
        }
    };
    put(1, 0, &Coeff::neg(&v));
    put(0, 1, &v);
    put(1, 1, &one);
    put(0, 2, &Coeff::neg(&one));
    for (i, j, k, e) in sheet1_terms(d, trunc) {
        let (i, j, k) = (i as u32, j as u32, k as u32);
        let du = d as u32;
        put(du + i, j + 2 * k + 2, &e);
        put(du + i + 1, j + 2 * k + 1, &Coeff::neg(&e));
    }
    Ok(out)
}

/// `(i, j, k, (-1)^(d+j) S^i [1] (x) L^j [1])` for every triple reaching the
/// truncation through either of its two bidegrees.
fn sheet1_terms(d: usize, trunc: Truncation) -> Vec<(usize, usize, usize, VirtualRep)> {
    let g = SoGroup::new(d).expect("group already validated");
    let v = VirtualRep::vector(g);
    let du = d as u32;
    if du > trunc.max_m {
        return Vec::new();
    }
    let imax = (trunc.max_m - du) as usize;
    let jmax = trunc.max_n as usize;
    let sym = v.sym_powers(imax);
    let ext = v.ext_powers(jmax.min(d));
    let mut out = Vec::new();
    for (i, si) in sym.iter().enumerate() {
        for (j, lj) in ext.iter().enumerate() {
            let reach = |k: usize| {
                let (i, j, k) = (i as u32, j as u32, k as u32);
                trunc.contains(du + i, j + 2 * k + 2) || trunc.contains(du + i + 1, j + 2 * k + 1)
            };
            if !reach(0) {
                continue;
            }
            let e = si.tensor(lj);
            let e = if (d + j) % 2 == 1 { Coeff::neg(&e) } else { e };
            let mut k = 0;
            while reach(k) {
                out.push((i, j, k, e.clone()));
                k += 1;
            }
        }
    }
    out
}

/// Sheet-one prediction as the plethystic exponential of its logarithm.
pub fn sheet1_series(d: usize, trunc: Truncation) -> Result<BiSeries<VirtualRep>> {
    sheet1_log_series(d, trunc)?.plethystic_exp()
}

/// Sheet-one prediction as the explicit infinite product, truncated.
pub fn sheet1_product_series(d: usize, trunc: Truncation) -> Result<BiSeries<VirtualRep>> {
    let mut acc = first_stage_series(d, trunc)?;
    let du = d as u32;
    for (i, j, k, e) in sheet1_terms(d, trunc) {
        let (i, j, k) = (i as u32, j as u32, k as u32);
        let odd = GeneratorTerm::new((du + i + 1, j + 2 * k + 1), e.clone(), Parity::Odd);
        let even = GeneratorTerm::new((du + i, j + 2 * k + 2), e, Parity::Even);
        acc = acc.mul(&gen_factor(&odd, trunc)?).mul(&gen_factor(&even, trunc)?);
    }
    Ok(acc)
}

/// One bidegree where the sheet-one prediction differs from the exact series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportEntry {
    pub m: u32,
    pub n: u32,
    pub sheet1: String,
    pub exact: String,
    /// Inside `m >= 2d, n >= 2`.
    pub allowed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportReport {
    pub d: usize,
    pub entries: Vec<SupportEntry>,
}

impl SupportReport {
    /// True when every discrepancy lies in `m >= 2d, n >= 2`.
    pub fn confined(&self) -> bool {
        self.entries.iter().all(|e| e.allowed)
    }

    /// Agreement on every bidegree where `R` is non-zero.
    pub fn agrees_on_support(&self) -> bool {
        self.entries.iter().all(|e| !in_support(self.d, e.m, e.n))
    }
}

/// Compares the sheet-one prediction with the exact series.
pub fn support_report(d: usize, trunc: Truncation) -> Result<SupportReport> {
    let s1 = sheet1_series(d, trunc)?;
    let z = closed_form_series(d, trunc)?;
    let du = d as u32;
    let entries = differences(&s1, &z)
        .into_iter()
        .map(|x| SupportEntry {
            m: x.m,
            n: x.n,
            allowed: x.m >= 2 * du && x.n >= 2,
            sheet1: x.left,
            exact: x.right,
        })
        .collect();
    Ok(SupportReport { d, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(d: usize) -> SoGroup {
        SoGroup::new(d).unwrap()
    }

    fn rep(d: usize, s: &str) -> VirtualRep {
        VirtualRep::parse(g(d), s).unwrap()
    }

    #[test]
    fn d1_is_one_minus_s_plus_t() {
        let trunc = Truncation::new(6, 6);
        let z = closed_form_series(1, trunc).unwrap();
        let expect = BiSeries::from_coeffs(
            &rep(1, "1"),
            trunc,
            [((0, 0), rep(1, "1")), ((1, 0), rep(1, "-1")), ((0, 1), rep(1, "1"))],
        );
        assert_eq!(z, expect);
        let b = brute_quotient_series(1, trunc, BruteOptions::default()).unwrap();
        assert_eq!(b, expect);
    }

    #[test]
    fn small_blocks_by_hand() {
        // d = 2, (1,1): four monomials p_a theta_b, one relation U
        let b = brute_quotient_series(2, Truncation::new(2, 2), BruteOptions::default()).unwrap();
        assert_eq!(b.coeff(1, 1).dim(), -3);
        assert_eq!(b.coeff(0, 0), rep(2, "1"));
        // (0,2): three quadrics minus T
        assert_eq!(b.coeff(0, 2).dim(), 2);
    }

    #[test]
    fn theta_column_and_adjoint() {
        for d in 5..=7 {
            let z = closed_form_series(d, Truncation::new(d as u32 + 1, 2)).unwrap();
            assert_eq!(z.coeff(2, 0), rep(d, "[1,1]"));
            let ext = VirtualRep::vector(g(d)).ext_powers(d);
            for (k, e) in ext.iter().enumerate() {
                let e = if k % 2 == 1 { Coeff::neg(e) } else { e.clone() };
                assert_eq!(z.coeff(k as u32, 0), e);
            }
        }
    }

    #[test]
    fn row_one_is_a_polynomial_of_degree_d_minus_1() {
        for d in 2..=6 {
            let z = closed_form_series(d, Truncation::new(d as u32 + 3, 1)).unwrap();
            let v = VirtualRep::vector(g(d));
            let ext = v.ext_powers(d);
            // (1-s)^[1] ([1] + s) + (-s)^(d+1)
            let mut expect: HashMap<u32, VirtualRep> = HashMap::new();
            for (k, e) in ext.iter().enumerate() {
                let e = if k % 2 == 1 { Coeff::neg(e) } else { e.clone() };
                *expect.entry(k as u32).or_insert(VirtualRep::zero(g(d))) += e.tensor(&v);
                *expect.entry(k as u32 + 1).or_insert(VirtualRep::zero(g(d))) += e;
            }
            let top = if d % 2 == 0 { -1 } else { 1 };
            *expect.get_mut(&(d as u32 + 1)).unwrap() += VirtualRep::scalar(g(d), top);
            for m in 0..=d as u32 + 3 {
                let e = expect.get(&m).cloned().unwrap_or(VirtualRep::zero(g(d)));
                assert_eq!(z.coeff(m, 1), e, "d={d} m={m}");
                if m >= d as u32 {
                    assert!(e.is_zero());
                }
            }
        }
    }

    #[test]
    fn displayed_formula_drops_the_tail_terms() {
        // at d = 1 the double sum is empty and the expression is 1 - s
        let mm = formula_mismatch(1, Truncation::new(4, 4)).unwrap();
        assert_eq!(mm.len(), 1);
        assert_eq!((mm[0].m, mm[0].n), (0, 1));
        for d in 2..=4 {
            assert!(!formula_mismatch(d, Truncation::new(2 * d as u32, 6)).unwrap().is_empty());
        }
    }

    #[test]
    fn oracles_agree_for_small_d() {
        for d in 1..=3 {
            let trunc = Truncation::new(2 * d as u32 + 2, 5);
            let a = closed_form_series(d, trunc).unwrap();
            let b = brute_quotient_series(d, trunc, BruteOptions::default()).unwrap();
            assert_eq!(a, b, "d={d}");
            let fast = BruteOptions {
                exact: false,
                ..BruteOptions::default()
            };
            assert_eq!(brute_quotient_series(d, trunc, fast).unwrap(), b);
        }
    }

    #[test]
    fn brute_force_bound() {
        assert!(matches!(
            brute_quotient_series(5, Truncation::new(2, 2), BruteOptions::default()),
            Err(Error::BruteForceTooLarge(_))
        ));
    }

    #[test]
    fn sheet1_log_has_the_first_stage_terms() {
        for d in [3usize, 4] {
            let s = sheet1_log_series(d, Truncation::new(2 * d as u32, 4)).unwrap();
            let du = d as u32;
            let sg = if d % 2 == 0 { 1 } else { -1 };
            assert_eq!(s.coeff(du + 1, 1), VirtualRep::scalar(g(d), -sg));
            assert_eq!(s.coeff(du, 2), VirtualRep::scalar(g(d), sg));
            let v = VirtualRep::vector(g(d));
            assert_eq!(s.coeff(du + 2, 1), v.scale(-sg));
            assert_eq!(s.coeff(du + 1, 2), v.scale(2 * sg));
            assert_eq!(s.coeff(du, 3), v.scale(-sg));
        }
    }

    #[test]
    fn sheet1_product_and_exp_agree() {
        for d in 1..=3 {
            let trunc = Truncation::new(2 * d as u32 + 2, 5);
            assert_eq!(
                sheet1_series(d, trunc).unwrap(),
                sheet1_product_series(d, trunc).unwrap(),
                "d={d}"
            );
        }
    }

    #[test]
    fn sheet1_support_small_d() {
        let r = support_report(2, Truncation::new(8, 6)).unwrap();
        assert!(r.confined(), "{:?}", r.entries);
        assert!(r.agrees_on_support());
        // d = 1 sheet one is not the whole story
        let r = support_report(1, Truncation::new(4, 4)).unwrap();
        let at: Vec<(u32, u32)> = r.entries.iter().map(|e| (e.m, e.n)).collect();
        assert_eq!(at, [(4, 2), (3, 3), (4, 3), (3, 4)]);
        assert!(r.confined());
    }
}
