use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::{Algebra, Parity};
use crate::error::{Error, Result};

/// Factors `(slot, exponent)` sorted by slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(pub SmallVec<[(u32, u32); 6]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, slot: u32) -> u32 {
        self.0
            .iter()
            .find(|&&(s, _)| s == slot)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn parity(&self, alg: &Algebra) -> Parity {
        let odd: u32 = self
            .0
            .iter()
            .filter(|&&(s, _)| alg.slot_parity(s).is_odd())
            .map(|&(_, e)| e)
            .sum();
        Parity::from_int(odd as i64)
    }

    pub fn bidegree(&self, alg: &Algebra) -> (i32, i32) {
        self.0.iter().fold((0, 0), |(m, n), &(s, e)| {
            let (a, b) = alg.slot_bidegree(s);
            (m + a * e as i32, n + b * e as i32)
        })
    }

    pub fn ghost(&self, alg: &Algebra) -> i32 {
        self.0
            .iter()
            .map(|&(s, e)| alg.slot_ghost(s) * e as i32)
            .sum()
    }

    pub fn weight(&self, alg: &Algebra) -> Vec<i32> {
        let mut w = vec![0; alg.dim() / 2];
        for &(s, e) in &self.0 {
            for (acc, x) in w.iter_mut().zip(alg.slot_weight(s)) {
                *acc += x * e as i32;
            }
        }
        w
    }

    /// Product with Koszul sign; `None` when an odd slot would be squared.
    pub fn mul(&self, other: &Monomial, alg: &Algebra) -> Option<(Monomial, bool)> {
        let a = &self.0;
        let b = &other.0;
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let mut odd_left_in_a: u32 = a
            .iter()
            .filter(|&&(s, _)| alg.slot_parity(s).is_odd())
            .count() as u32;
        let mut negative = false;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
            if take_a {
                if alg.slot_parity(a[i].0).is_odd() {
                    odd_left_in_a -= 1;
                }
                out.push(a[i]);
                i += 1;
            } else if i < a.len() && a[i].0 == b[j].0 {
                if alg.slot_parity(a[i].0).is_odd() {
                    return None;
                }
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            } else {
                if alg.slot_parity(b[j].0).is_odd() && odd_left_in_a % 2 == 1 {
                    negative = !negative;
                }
                out.push(b[j]);
                j += 1;
            }
        }
        Some((Monomial(out), negative))
    }
}

/// Polynomial in the supercommutative algebra of an [`Algebra`].
#[derive(Clone)]
pub struct GradedPoly {
    alg: Arc<Algebra>,
    terms: BTreeMap<Monomial, BigRational>,
}

impl PartialEq for GradedPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for GradedPoly {}

impl fmt::Debug for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedPoly({self})")
    }
}

fn q(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

impl GradedPoly {
    pub fn from_terms(
        alg: &Arc<Algebra>,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Self {
        let mut out = GradedPoly {
            alg: alg.clone(),
            terms: BTreeMap::new(),
        };
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn constant(alg: &Arc<Algebra>, c: BigRational) -> Self {
        Self::from_terms(alg, [(Monomial::one(), c)])
    }

    pub fn slot(alg: &Arc<Algebra>, slot: u32) -> Self {
        let mut m = Monomial::one();
        m.0.push((slot, 1));
        Self::from_terms(alg, [(m, BigRational::one())])
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.alg
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return self.alg.zero();
        }
        GradedPoly {
            alg: self.alg.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&q(k))
    }

    /// Re-inserts every term, merging duplicates and dropping zeros.
    pub fn normal_form(&self) -> Self {
        Self::from_terms(&self.alg, self.terms.clone())
    }

    /// Parity if homogeneous; `None` for zero or mixed polynomials.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.parity(&self.alg));
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    pub fn ghost_number(&self) -> Option<i32> {
        let mut it = self.terms.keys().map(|m| m.ghost(&self.alg));
        let first = it.next()?;
        it.all(|g| g == first).then_some(first)
    }

    /// Pieces homogeneous in `(theta-degree, p-degree)`.
    pub fn bigrade_split(&self) -> BTreeMap<(i32, i32), GradedPoly> {
        let mut out: BTreeMap<(i32, i32), GradedPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.bidegree(&self.alg))
                .or_insert_with(|| self.alg.zero())
                .add_term(m.clone(), c.clone());
        }
        out
    }

    /// Keep only the terms for which `keep` returns true.
    pub fn filter(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Self {
        GradedPoly {
            alg: self.alg.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Sets every listed slot to zero.
    pub fn kill_slots(&self, dead: impl Fn(u32) -> bool) -> Self {
        self.filter(|m| m.0.iter().all(|&(s, _)| !dead(s)))
    }

    /// The same polynomial viewed in a larger algebra whose slot names
    /// include all of ours.
    pub fn embed(&self, target: &Arc<Algebra>) -> Result<Self> {
        let mut map = HashMap::new();
        for s in 0..self.alg.num_slots() as u32 {
            let info = self.alg.slot_info(s);
            let name = &self.alg.decl(info.var).name;
            let var = target.var_id(name)?;
            map.insert(s, target.slot(var, info.index, info.deriv)?);
        }
        let mut out = target.zero();
        for (m, c) in &self.terms {
            let mut acc = target.one().scale(c);
            for &(s, e) in &m.0 {
                for _ in 0..e {
                    acc = &acc * &GradedPoly::slot(target, map[&s]);
                }
            }
            out = out + acc;
        }
        Ok(out)
    }

    /// Left graded partial derivative with respect to one slot.
    pub fn left_partial(&self, slot: u32) -> Self {
        self.partial(slot, true)
    }

    /// Right graded partial derivative with respect to one slot.
    pub fn right_partial(&self, slot: u32) -> Self {
        self.partial(slot, false)
    }

    fn partial(&self, slot: u32, left: bool) -> Self {
        let odd = self.alg.slot_parity(slot).is_odd();
        let mut out = self.alg.zero();
        for (m, c) in &self.terms {
            let Some(pos) = m.0.iter().position(|&(s, _)| s == slot) else {
                continue;
            };
            let e = m.0[pos].1;
            let passed = if left { &m.0[..pos] } else { &m.0[pos + 1..] };
            let crossings: u32 = passed
                .iter()
                .filter(|&&(s, _)| self.alg.slot_parity(s).is_odd())
                .map(|&(_, e)| e)
                .sum();
            let negative = odd && crossings % 2 == 1;
            let mut rest = m.clone();
            if e == 1 {
                rest.0.remove(pos);
            } else {
                rest.0[pos].1 -= 1;
            }
            let mut coeff = c * q(e as i64);
            if negative {
                coeff = -coeff;
            }
            out.add_term(rest, coeff);
        }
        out
    }

    fn mul_ref(&self, other: &GradedPoly) -> GradedPoly {
        let alg = &self.alg;
        let mut out = alg.zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((m, neg)) = ma.mul(mb, alg) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> GradedPoly {
        let mut acc = self.alg.one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Largest absolute coefficient numerator and denominator, as a size hint.
    pub fn max_height(&self) -> usize {
        self.terms
            .values()
            .map(|c| c.numer().abs().bits().max(c.denom().bits()) as usize)
            .max()
            .unwrap_or(0)
    }

    /// Substitutes slots by polynomials (slots absent from `images` are kept).
    pub fn substitute(&self, images: &HashMap<u32, GradedPoly>) -> GradedPoly {
        let alg = &self.alg;
        let mut out = alg.zero();
        for (m, c) in &self.terms {
            let mut acc = alg.one().scale(c);
            for &(s, e) in &m.0 {
                let factor = images
                    .get(&s)
                    .cloned()
                    .unwrap_or_else(|| GradedPoly::slot(alg, s));
                acc = &acc * &factor.pow(e);
            }
            out = out + acc;
        }
        out
    }
}

impl Add for GradedPoly {
    type Output = GradedPoly;
    fn add(mut self, rhs: GradedPoly) -> GradedPoly {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for GradedPoly {
    type Output = GradedPoly;
    fn sub(self, rhs: GradedPoly) -> GradedPoly {
        self + (-rhs)
    }
}

impl Neg for GradedPoly {
    type Output = GradedPoly;
    fn neg(mut self) -> GradedPoly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl<'a> Add<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;
    fn add(self, rhs: &GradedPoly) -> GradedPoly {
        self.clone() + rhs.clone()
    }
}

impl<'a> Sub<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;
    fn sub(self, rhs: &GradedPoly) -> GradedPoly {
        self.clone() - rhs.clone()
    }
}

impl<'a> Mul<&'a GradedPoly> for &'a GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: &GradedPoly) -> GradedPoly {
        self.mul_ref(rhs)
    }
}

impl Mul for GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: GradedPoly) -> GradedPoly {
        self.mul_ref(&rhs)
    }
}

fn fmt_coeff(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            let mut parts = Vec::new();
            if m.is_one() || !mag.is_one() {
                parts.push(fmt_coeff(&mag));
            }
            for &(s, e) in &m.0 {
                let name = self.alg.slot_name(s);
                parts.push(if e == 1 { name } else { format!("{name}^{e}") });
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

/// Graded derivation given by its images on slots.
///
/// Extends by `D(ab) = D(a) b + (-1)^{|D||a|} a D(b)`.
#[derive(Clone, Debug)]
pub struct Derivation {
    alg: Arc<Algebra>,
    images: HashMap<u32, GradedPoly>,
    parity: Parity,
    ghost_shift: i32,
}

impl Derivation {
    pub fn new(alg: &Arc<Algebra>, parity: Parity, ghost_shift: i32) -> Self {
        Derivation {
            alg: alg.clone(),
            images: HashMap::new(),
            parity,
            ghost_shift,
        }
    }

    /// Odd derivation with ghost-number shift `+1` (Koszul-Tate convention).
    pub fn odd(alg: &Arc<Algebra>) -> Self {
        Self::new(alg, Parity::Odd, 1)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn ghost_shift(&self) -> i32 {
        self.ghost_shift
    }

    pub fn set_image(&mut self, slot: u32, image: GradedPoly) {
        self.images.insert(slot, image);
    }

    /// Declares a zero image for every slot that has none yet.
    pub fn with_zero_images(mut self) -> Self {
        for s in 0..self.alg.num_slots() as u32 {
            self.images.entry(s).or_insert_with(|| self.alg.zero());
        }
        self
    }

    pub fn image(&self, slot: u32) -> Option<&GradedPoly> {
        self.images.get(&slot)
    }

    pub fn apply(&self, a: &GradedPoly) -> Result<GradedPoly> {
        let alg = &self.alg;
        let mut out = alg.zero();
        for (m, c) in a.terms() {
            let mut prefix_odd = 0u32;
            for (pos, &(s, e)) in m.0.iter().enumerate() {
                let img = self
                    .images
                    .get(&s)
                    .ok_or_else(|| Error::UndeclaredVariable(alg.slot_name(s)))?;
                let odd_slot = alg.slot_parity(s).is_odd();
                if !img.is_zero() {
                    let mut pre = Monomial::one();
                    pre.0.extend_from_slice(&m.0[..pos]);
                    if e > 1 {
                        pre.0.push((s, e - 1));
                    }
                    let mut post = Monomial::one();
                    post.0.extend_from_slice(&m.0[pos + 1..]);
                    let mut coeff = c * q(e as i64);
                    if self.parity.is_odd() && prefix_odd % 2 == 1 {
                        coeff = -coeff;
                    }
                    let left = GradedPoly::from_terms(alg, [(pre, coeff)]);
                    let right = GradedPoly::from_terms(alg, [(post, BigRational::one())]);
                    out = out + &(&left * img) * &right;
                }
                if odd_slot {
                    prefix_odd += e;
                }
            }
        }
        Ok(out)
    }
}
