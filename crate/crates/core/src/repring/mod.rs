//! Virtual representation ring of `so(d)`.
//!
//! Irreducibles are labelled by traceless Young diagrams with at most
//! `floor(d/2)` rows. For even `d` a diagram with exactly `d/2` rows stands
//! for the sum of the two conjugate irreducibles `[l]+` and `[l]-`, which is
//! what the reflection-invariant characters produced by tensor operations on
//! the vector always contain. Characters are stored through their
//! multiplicities at weights with sorted non-negative entries; every other
//! weight follows by signed permutations.

mod weyl;

pub use weyl::{weyl_dim, MAX_RANK};

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use rayon::prelude::*;

use crate::error::{Error, Result};
use weyl::{irrep_char, o_dominant, orbit, Wt};

/// The Lie algebra `so(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SoGroup {
    d: usize,
}

impl SoGroup {
    pub fn new(d: usize) -> Result<SoGroup> {
        if d == 0 || d / 2 > MAX_RANK {
            return Err(Error::Invalid(format!(
                "dimension {d} not supported (1..={})",
                2 * MAX_RANK + 1
            )));
        }
        Ok(SoGroup { d })
    }

    pub fn d(self) -> usize {
        self.d
    }

    pub fn rank(self) -> usize {
        self.d / 2
    }
}

/// Young diagram given by its row lengths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, serde::Serialize)]
pub struct Diagram(Vec<u32>);

impl Diagram {
    /// Builds a diagram, sorting rows and dropping empty ones.
    pub fn new(mut rows: Vec<u32>) -> Diagram {
        rows.retain(|&x| x > 0);
        rows.sort_unstable_by(|a, b| b.cmp(a));
        Diagram(rows)
    }

    pub fn empty() -> Diagram {
        Diagram(Vec::new())
    }

    /// `[1, 1, ..., 1]` with `k` rows.
    pub fn column(k: usize) -> Diagram {
        Diagram(vec![1; k])
    }

    pub fn rows(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn transpose(&self) -> Diagram {
        let width = self.0.first().copied().unwrap_or(0);
        Diagram(
            (1..=width)
                .map(|c| self.0.iter().filter(|&&r| r >= c).count() as u32)
                .collect(),
        )
    }

    /// Contains the 2x2 box diagram.
    pub fn contains_square(&self) -> bool {
        self.0.len() >= 2 && self.0[1] >= 2
    }

    /// Every diagram with at most `max_size` boxes and `max_rows` rows.
    pub fn all_up_to(max_size: u32, max_rows: usize) -> Vec<Diagram> {
        fn rec(rem: u32, bound: u32, rows: usize, cur: &mut Vec<u32>, out: &mut Vec<Diagram>) {
            out.push(Diagram(cur.clone()));
            if rows == 0 {
                return;
            }
            for v in 1..=bound.min(rem) {
                cur.push(v);
                rec(rem - v, v, rows - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(max_size, max_size, max_rows, &mut Vec::new(), &mut out);
        out.sort();
        out
    }
}

impl Ord for Diagram {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Diagram {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.0.iter().map(|r| r.to_string()).collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// Integer combination of irreducibles.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VirtualRep {
    group: SoGroup,
    terms: BTreeMap<Diagram, i128>,
}

impl VirtualRep {
    pub fn zero(group: SoGroup) -> VirtualRep {
        VirtualRep {
            group,
            terms: BTreeMap::new(),
        }
    }

    /// Trivial representation.
    pub fn one(group: SoGroup) -> VirtualRep {
        Self::scalar(group, 1)
    }

    /// `k` copies of the trivial representation.
    pub fn scalar(group: SoGroup, k: i128) -> VirtualRep {
        let mut out = Self::zero(group);
        out.add_term(Diagram::empty(), k);
        out
    }

    /// Vector representation `[1]` (trivial for `d = 1`).
    pub fn vector(group: SoGroup) -> VirtualRep {
        if group.rank() == 0 {
            return Self::one(group);
        }
        Self::irrep(group, Diagram::new(vec![1])).expect("the vector is in range")
    }

    pub fn irrep(group: SoGroup, lam: Diagram) -> Result<VirtualRep> {
        check_range(group, &lam)?;
        let mut out = Self::zero(group);
        out.add_term(lam, 1);
        Ok(out)
    }

    pub fn from_terms(
        group: SoGroup,
        terms: impl IntoIterator<Item = (Diagram, i128)>,
    ) -> Result<VirtualRep> {
        let mut out = Self::zero(group);
        for (lam, m) in terms {
            check_range(group, &lam)?;
            out.add_term(lam, m);
        }
        Ok(out)
    }

    pub fn group(&self) -> SoGroup {
        self.group
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Diagram, i128)> {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    pub fn multiplicity(&self, lam: &Diagram) -> i128 {
        self.terms.get(lam).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn add_term(&mut self, lam: Diagram, m: i128) {
        use std::collections::btree_map::Entry;
        if m == 0 {
            return;
        }
        match self.terms.entry(lam) {
            Entry::Vacant(v) => {
                v.insert(m);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += m;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, k: i128) -> VirtualRep {
        if k == 0 {
            return Self::zero(self.group);
        }
        VirtualRep {
            group: self.group,
            terms: self.terms.iter().map(|(l, &m)| (l.clone(), m * k)).collect(),
        }
    }

    /// Exact division of every multiplicity, or `None`.
    pub fn div_exact(&self, k: i128) -> Option<VirtualRep> {
        if k == 0 || self.terms.values().any(|m| m % k != 0) {
            return None;
        }
        Some(VirtualRep {
            group: self.group,
            terms: self.terms.iter().map(|(l, &m)| (l.clone(), m / k)).collect(),
        })
    }

    /// Virtual dimension.
    pub fn dim(&self) -> i128 {
        self.terms
            .iter()
            .map(|(l, &m)| m * weyl_dim(self.group, l))
            .sum()
    }

    /// Sum of absolute multiplicities times dimensions, a size measure.
    pub fn abs_dim(&self) -> i128 {
        self.terms
            .iter()
            .map(|(l, &m)| m.abs() * weyl_dim(self.group, l))
            .sum()
    }

    pub fn try_tensor(&self, other: &VirtualRep) -> Result<VirtualRep> {
        if self.group != other.group {
            return Err(Error::GroupMismatch(self.group.d, other.group.d));
        }
        Ok(self.tensor(other))
    }

    /// Tensor product. Panics if the operands live over different groups.
    pub fn tensor(&self, other: &VirtualRep) -> VirtualRep {
        assert_eq!(self.group, other.group, "tensor of reps over different so(d)");
        let g = self.group;
        let mut acc: HashMap<Diagram, i128> = HashMap::new();
        for (a, &ma) in &self.terms {
            for (b, &mb) in &other.terms {
                if a.is_empty() {
                    *acc.entry(b.clone()).or_default() += ma * mb;
                    continue;
                }
                if b.is_empty() {
                    *acc.entry(a.clone()).or_default() += ma * mb;
                    continue;
                }
                for (c, mc) in weyl::product(g, a, b).iter() {
                    *acc.entry(c.clone()).or_default() += ma * mb * mc;
                }
            }
        }
        let mut out = Self::zero(g);
        out.terms = acc.into_iter().filter(|&(_, m)| m != 0).collect();
        out
    }

    /// Character of the virtual representation.
    pub fn character(&self) -> Character {
        let mut dominant: HashMap<Wt, i128> = HashMap::new();
        for (lam, &m) in &self.terms {
            for (w, &x) in &irrep_char(self.group, lam).dominant {
                *dominant.entry(*w).or_default() += m * x;
            }
        }
        dominant.retain(|_, m| *m != 0);
        Character {
            group: self.group,
            dominant,
        }
    }

    /// Adams operation `psi_k` (`k >= 1`).
    pub fn adams(&self, k: u32) -> VirtualRep {
        assert!(k >= 1, "Adams operations are indexed from 1");
        if k == 1 {
            return self.clone();
        }
        let ch = self.character();
        let r = self.group.rank();
        let mut scaled = HashMap::new();
        for (w, &m) in &ch.dominant {
            let mut v = *w;
            for x in v[..r].iter_mut() {
                *x *= k as i16;
            }
            scaled.insert(v, m);
        }
        Character {
            group: self.group,
            dominant: scaled,
        }
        .decompose()
        .expect("Adams images are reflection invariant")
    }

    /// Symmetric powers `S^0 .. S^kmax` via Newton's identities.
    pub fn sym_powers(&self, kmax: usize) -> Vec<VirtualRep> {
        self.newton_powers(kmax, false)
    }

    /// Exterior powers `L^0 .. L^kmax` via Newton's identities.
    pub fn ext_powers(&self, kmax: usize) -> Vec<VirtualRep> {
        self.newton_powers(kmax, true)
    }

    pub fn sym_power(&self, k: usize) -> VirtualRep {
        self.sym_powers(k).pop().unwrap()
    }

    pub fn ext_power(&self, k: usize) -> VirtualRep {
        self.ext_powers(k).pop().unwrap()
    }

    fn newton_powers(&self, kmax: usize, alternating: bool) -> Vec<VirtualRep> {
        let psi: Vec<VirtualRep> = (1..=kmax as u32)
            .into_par_iter()
            .map(|i| self.adams(i))
            .collect();
        let mut out = vec![Self::one(self.group)];
        for k in 1..=kmax {
            let mut acc = Self::zero(self.group);
            for i in 1..=k {
                let term = psi[i - 1].tensor(&out[k - i]);
                if alternating && i % 2 == 0 {
                    acc = acc - term;
                } else {
                    acc = acc + term;
                }
            }
            out.push(acc.div_exact(k as i128).expect("Newton recursion is integral"));
        }
        out
    }

    /// Transposes every diagram, dropping those that leave the range; returns
    /// the image and whether anything was dropped.
    pub fn transpose(&self) -> (VirtualRep, bool) {
        let mut out = Self::zero(self.group);
        let mut dropped = false;
        for (l, &m) in &self.terms {
            let t = l.transpose();
            if t.len() > self.group.rank() {
                dropped = true;
            } else {
                out.add_term(t, m);
            }
        }
        (out, dropped)
    }

    /// Parses the text form, e.g. `-2*[2,1] + [1,1,1]~ + 3`.
    pub fn parse(group: SoGroup, src: &str) -> Result<VirtualRep> {
        parse_rep(group, src)
    }
}

fn check_range(group: SoGroup, lam: &Diagram) -> Result<()> {
    if lam.len() > group.rank() || lam.rows().iter().any(|&x| x > i16::MAX as u32 / 4) {
        return Err(Error::OutOfStableRange {
            diagram: lam.to_string(),
            d: group.d,
        });
    }
    Ok(())
}

impl fmt::Display for VirtualRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (lam, &m)) in self.terms.iter().enumerate() {
            let mag = m.unsigned_abs();
            if i == 0 {
                if m < 0 {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if m < 0 { " - " } else { " + " })?;
            }
            if lam.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                write!(f, "{lam}")?;
            } else {
                write!(f, "{mag}*{lam}")?;
            }
        }
        Ok(())
    }
}

impl Add for VirtualRep {
    type Output = VirtualRep;
    fn add(mut self, rhs: VirtualRep) -> VirtualRep {
        self += rhs;
        self
    }
}

impl AddAssign for VirtualRep {
    fn add_assign(&mut self, rhs: VirtualRep) {
        assert_eq!(self.group, rhs.group, "sum of reps over different so(d)");
        for (l, m) in rhs.terms {
            self.add_term(l, m);
        }
    }
}

impl Sub for VirtualRep {
    type Output = VirtualRep;
    fn sub(self, rhs: VirtualRep) -> VirtualRep {
        self + (-rhs)
    }
}

impl Neg for VirtualRep {
    type Output = VirtualRep;
    fn neg(self) -> VirtualRep {
        self.scale(-1)
    }
}

impl Mul for &VirtualRep {
    type Output = VirtualRep;
    fn mul(self, rhs: &VirtualRep) -> VirtualRep {
        self.tensor(rhs)
    }
}

/// Reflection-invariant character on the maximal torus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    group: SoGroup,
    dominant: HashMap<Wt, i128>,
}

impl Character {
    pub fn zero(group: SoGroup) -> Character {
        Character {
            group,
            dominant: HashMap::new(),
        }
    }

    /// Builds a reflection-invariant character from its multiplicities at
    /// weights with sorted non-negative entries.
    pub fn from_dominant(
        group: SoGroup,
        weights: impl IntoIterator<Item = (Vec<i32>, i128)>,
    ) -> Result<Character> {
        let r = group.rank();
        let mut dominant = HashMap::new();
        for (w, m) in weights {
            if w.len() != r || w.windows(2).any(|p| p[0] < p[1]) || w.iter().any(|&x| x < 0) {
                return Err(Error::Invalid(format!("{w:?} is not a sorted dominant weight")));
            }
            let mut v = [0i16; MAX_RANK];
            for (x, &y) in v.iter_mut().zip(&w) {
                *x = i16::try_from(y).map_err(|_| Error::Invalid("weight too large".into()))?;
            }
            *dominant.entry(v).or_default() += m;
        }
        dominant.retain(|_, m| *m != 0);
        Ok(Character { group, dominant })
    }

    /// Builds a character from the multiplicity of every weight; fails with
    /// [`Error::NotWeylInvariant`] unless the data is invariant under signed
    /// permutations.
    pub fn from_weights(
        group: SoGroup,
        weights: impl IntoIterator<Item = (Vec<i32>, i128)>,
    ) -> Result<Character> {
        let r = group.rank();
        let mut full: HashMap<Wt, i128> = HashMap::new();
        for (w, m) in weights {
            if w.len() != r {
                return Err(Error::Invalid(format!(
                    "weight of length {} for rank {r}",
                    w.len()
                )));
            }
            let mut v = [0i16; MAX_RANK];
            for (x, &y) in v.iter_mut().zip(&w) {
                *x = i16::try_from(y).map_err(|_| Error::Invalid("weight too large".into()))?;
            }
            *full.entry(v).or_default() += m;
        }
        full.retain(|_, m| *m != 0);
        let mut dominant = HashMap::new();
        for (w, &m) in &full {
            let key = o_dominant(r, w);
            match dominant.get(&key) {
                Some(&x) if x != m => return Err(Error::NotWeylInvariant),
                _ => {
                    dominant.insert(key, m);
                }
            }
        }
        for (key, &m) in &dominant {
            for v in orbit(r, key) {
                if full.get(&v).copied().unwrap_or(0) != m {
                    return Err(Error::NotWeylInvariant);
                }
            }
        }
        Ok(Character { group, dominant })
    }

    /// Every weight with its multiplicity, sorted.
    pub fn weights(&self) -> Vec<(Vec<i32>, i128)> {
        let r = self.group.rank();
        let mut out: Vec<(Vec<i32>, i128)> = self
            .dominant
            .iter()
            .flat_map(|(w, &m)| {
                orbit(r, w)
                    .into_iter()
                    .map(move |v| (v[..r].iter().map(|&x| x as i32).collect(), m))
            })
            .collect();
        out.sort();
        out
    }

    pub fn is_zero(&self) -> bool {
        self.dominant.is_empty()
    }

    /// Pointwise product of characters.
    pub fn mul(&self, other: &Character) -> Character {
        let r = self.group.rank();
        let lhs: Vec<(Wt, i128)> = self
            .dominant
            .iter()
            .flat_map(|(w, &m)| orbit(r, w).into_iter().map(move |v| (v, m)))
            .collect();
        let rhs: Vec<(Wt, i128)> = other
            .dominant
            .iter()
            .flat_map(|(w, &m)| orbit(r, w).into_iter().map(move |v| (v, m)))
            .collect();
        let mut acc: HashMap<Wt, i128> = HashMap::new();
        for (a, ma) in &lhs {
            for (b, mb) in &rhs {
                let mut v = [0i16; MAX_RANK];
                for i in 0..r {
                    v[i] = a[i] + b[i];
                }
                if v[..r].windows(2).all(|p| p[0] >= p[1]) && v[..r].iter().all(|&x| x >= 0) {
                    *acc.entry(v).or_default() += ma * mb;
                }
            }
        }
        acc.retain(|_, m| *m != 0);
        Character {
            group: self.group,
            dominant: acc,
        }
    }

    /// Unique virtual representation with this character.
    pub fn decompose(&self) -> Result<VirtualRep> {
        let g = self.group;
        let r = g.rank();
        let rho: Vec<i64> = (0..r).map(|i| (2 * (r - i) - 1) as i64).collect();
        let height = |w: &Wt| -> i64 { (0..r).map(|i| w[i] as i64 * rho[i]).sum() };
        let mut rest = self.dominant.clone();
        let mut out = VirtualRep::zero(g);
        while let Some(top) = rest
            .keys()
            .max_by(|a, b| height(a).cmp(&height(b)).then_with(|| a.cmp(b)))
            .copied()
        {
            let m = rest[&top];
            let lam = Diagram::new(top[..r].iter().map(|&x| x as u32).collect());
            check_range(g, &lam)?;
            for (w, &x) in &irrep_char(g, &lam).dominant {
                let e = rest.entry(*w).or_insert(0);
                *e -= m * x;
                if *e == 0 {
                    rest.remove(w);
                }
            }
            out.add_term(lam, m);
        }
        Ok(out)
    }
}

fn parse_rep(group: SoGroup, src: &str) -> Result<VirtualRep> {
    let b = src.as_bytes();
    let mut pos = 0;
    let err = |pos: usize, msg: &str| Error::Parse {
        pos,
        msg: msg.to_string(),
    };
    let skip = |pos: &mut usize| {
        while *pos < b.len() && b[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let number = |pos: &mut usize| -> Result<Option<i128>> {
        let start = *pos;
        while *pos < b.len() && b[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Ok(None);
        }
        std::str::from_utf8(&b[start..*pos])
            .unwrap()
            .parse::<i128>()
            .map(Some)
            .map_err(|_| err(start, "integer too large"))
    };
    let mut out = VirtualRep::zero(group);
    skip(&mut pos);
    if pos == b.len() {
        return Err(err(pos, "empty representation"));
    }
    let mut first = true;
    loop {
        skip(&mut pos);
        let mut sign = 1i128;
        if pos < b.len() && (b[pos] == b'+' || b[pos] == b'-') {
            if b[pos] == b'-' {
                sign = -1;
            }
            pos += 1;
            skip(&mut pos);
        } else if !first {
            return Err(err(pos, "expected '+' or '-'"));
        }
        first = false;
        let coeff = number(&mut pos)?;
        skip(&mut pos);
        let mut has_star = false;
        if pos < b.len() && b[pos] == b'*' {
            if coeff.is_none() {
                return Err(err(pos, "'*' without coefficient"));
            }
            has_star = true;
            pos += 1;
            skip(&mut pos);
        }
        let lam = if pos < b.len() && b[pos] == b'[' {
            pos += 1;
            let mut rows = Vec::new();
            skip(&mut pos);
            if pos < b.len() && b[pos] == b']' {
                pos += 1;
            } else {
                loop {
                    skip(&mut pos);
                    let v = number(&mut pos)?.ok_or_else(|| err(pos, "expected row length"))?;
                    let v = u32::try_from(v).map_err(|_| err(pos, "row too long"))?;
                    if v == 0 {
                        return Err(err(pos, "empty row"));
                    }
                    if rows.last().is_some_and(|&p| p < v) {
                        return Err(err(pos, "rows must be weakly decreasing"));
                    }
                    rows.push(v);
                    skip(&mut pos);
                    if pos < b.len() && b[pos] == b',' {
                        pos += 1;
                    } else if pos < b.len() && b[pos] == b']' {
                        pos += 1;
                        break;
                    } else {
                        return Err(err(pos, "expected ',' or ']'"));
                    }
                }
            }
            if pos < b.len() && b[pos] == b'~' {
                pos += 1;
            }
            Diagram(rows)
        } else if has_star {
            return Err(err(pos, "expected diagram after '*'"));
        } else if coeff.is_some() {
            Diagram::empty()
        } else {
            return Err(err(pos, "expected term"));
        };
        check_range(group, &lam)?;
        let m = coeff
            .unwrap_or(1)
            .checked_mul(sign)
            .ok_or_else(|| err(pos, "coefficient overflow"))?;
        out.add_term(lam, m);
        skip(&mut pos);
        if pos == b.len() {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
