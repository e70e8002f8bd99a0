//! Truncated bigraded power series in `(s, t)` and plethystic `Exp`/`Log`.
//!
//! Coefficients come from a [`Coeff`] ring: plain integers or virtual
//! representations. A series keeps its [`Truncation`]; results of binary
//! operations use the intersection of the operands' truncations.

use std::collections::BTreeMap;
use std::fmt::{Debug, Display};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::Parity;
use crate::repring::VirtualRep;

/// Coefficient ring of a series: a lambda-ring with Adams operations.
pub trait Coeff: Clone + PartialEq + Debug + Display + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, k: i128) -> Self;
    fn div_exact(&self, k: i128) -> Option<Self>;
    fn adams(&self, k: u32) -> Self;
    fn dim(&self) -> i128;

    fn neg(&self) -> Self {
        self.scale(-1)
    }

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }

    /// `[c^0, ..., c^kmax]` for symmetric (`alternating = false`) or
    /// exterior powers, by Newton's identities.
    fn powers(&self, kmax: usize, alternating: bool) -> Vec<Self> {
        let psi: Vec<Self> = (1..=kmax as u32).map(|i| self.adams(i)).collect();
        let mut out = vec![self.one_like()];
        for k in 1..=kmax {
            let mut acc = self.zero_like();
            for i in 1..=k {
                let term = psi[i - 1].mul(&out[k - i]);
                acc = if alternating && i % 2 == 0 {
                    acc.sub(&term)
                } else {
                    acc.add(&term)
                };
            }
            out.push(acc.div_exact(k as i128).expect("Newton recursion is integral"));
        }
        out
    }
}

impl Coeff for i128 {
    fn zero_like(&self) -> Self {
        0
    }
    fn one_like(&self) -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, k: i128) -> Self {
        self * k
    }
    fn div_exact(&self, k: i128) -> Option<Self> {
        (k != 0 && self % k == 0).then(|| self / k)
    }
    fn adams(&self, _k: u32) -> Self {
        *self
    }
    fn dim(&self) -> i128 {
        *self
    }
}

impl Coeff for VirtualRep {
    fn zero_like(&self) -> Self {
        VirtualRep::zero(self.group())
    }
    fn one_like(&self) -> Self {
        VirtualRep::one(self.group())
    }
    fn is_zero(&self) -> bool {
        VirtualRep::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self.clone() + o.clone()
    }
    fn sub(&self, o: &Self) -> Self {
        self.clone() - o.clone()
    }
    fn mul(&self, o: &Self) -> Self {
        self.tensor(o)
    }
    fn scale(&self, k: i128) -> Self {
        VirtualRep::scale(self, k)
    }
    fn div_exact(&self, k: i128) -> Option<Self> {
        VirtualRep::div_exact(self, k)
    }
    fn adams(&self, k: u32) -> Self {
        VirtualRep::adams(self, k)
    }
    fn dim(&self) -> i128 {
        VirtualRep::dim(self)
    }
    fn powers(&self, kmax: usize, alternating: bool) -> Vec<Self> {
        if alternating {
            self.ext_powers(kmax)
        } else {
            self.sym_powers(kmax)
        }
    }
}

/// Retained region: `m <= max_m`, `n <= max_n` and optionally
/// `m + n <= max_total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub max_m: u32,
    pub max_n: u32,
    pub max_total: Option<u32>,
}

impl Truncation {
    pub fn new(max_m: u32, max_n: u32) -> Truncation {
        Truncation {
            max_m,
            max_n,
            max_total: None,
        }
    }

    pub fn with_total(self, total: u32) -> Truncation {
        Truncation {
            max_total: Some(total),
            ..self
        }
    }

    pub fn contains(&self, m: u32, n: u32) -> bool {
        m <= self.max_m && n <= self.max_n && self.max_total.is_none_or(|t| m + n <= t)
    }

    pub fn meet(&self, o: &Truncation) -> Truncation {
        Truncation {
            max_m: self.max_m.min(o.max_m),
            max_n: self.max_n.min(o.max_n),
            max_total: match (self.max_total, o.max_total) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        }
    }

    /// All retained bidegrees, sorted by total degree then `n`.
    pub fn points(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = (0..=self.max_m)
            .flat_map(|m| (0..=self.max_n).map(move |n| (m, n)))
            .filter(|&(m, n)| self.contains(m, n))
            .collect();
        out.sort_by_key(|&(m, n)| (m + n, n));
        out
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::new(12, 8)
    }
}

/// Truncated series `sum_{m,n} c_{m,n} s^m t^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiSeries<C: Coeff> {
    trunc: Truncation,
    unit: C,
    coeffs: BTreeMap<(u32, u32), C>,
}

impl<C: Coeff> BiSeries<C> {
    /// Zero series; `unit` fixes the coefficient ring (e.g. the group).
    pub fn zero(unit: &C, trunc: Truncation) -> Self {
        BiSeries {
            trunc,
            unit: unit.one_like(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(unit: &C, trunc: Truncation) -> Self {
        let mut z = Self::zero(unit, trunc);
        z.set(0, 0, unit.one_like());
        z
    }

    /// Monomial `c s^m t^n`.
    pub fn monomial(c: C, m: u32, n: u32, trunc: Truncation) -> Self {
        let mut z = Self::zero(&c, trunc);
        z.set(m, n, c);
        z
    }

    pub fn from_coeffs(
        unit: &C,
        trunc: Truncation,
        coeffs: impl IntoIterator<Item = ((u32, u32), C)>,
    ) -> Self {
        let mut z = Self::zero(unit, trunc);
        for ((m, n), c) in coeffs {
            let cur = z.coeff(m, n);
            z.set(m, n, cur.add(&c));
        }
        z
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn unit(&self) -> &C {
        &self.unit
    }

    pub fn coeff(&self, m: u32, n: u32) -> C {
        self.coeffs
            .get(&(m, n))
            .cloned()
            .unwrap_or_else(|| self.unit.zero_like())
    }

    /// Sets a coefficient if the bidegree is retained.
    pub fn set(&mut self, m: u32, n: u32, c: C) {
        if !self.trunc.contains(m, n) {
            return;
        }
        if c.is_zero() {
            self.coeffs.remove(&(m, n));
        } else {
            self.coeffs.insert((m, n), c);
        }
    }

    /// Nonzero coefficients in `(m, n)` order.
    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &C)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Same series under a smaller truncation.
    pub fn truncate(&self, trunc: Truncation) -> Self {
        let t = self.trunc.meet(&trunc);
        BiSeries {
            trunc: t,
            unit: self.unit.clone(),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&(m, n), _)| t.contains(m, n))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn map<D: Coeff>(&self, unit: &D, f: impl Fn(&C) -> D) -> BiSeries<D> {
        BiSeries::from_coeffs(unit, self.trunc, self.coeffs.iter().map(|(k, v)| (*k, f(v))))
    }

    /// Dimension specialisation.
    pub fn dims(&self) -> BiSeries<i128> {
        self.map(&1i128, |c| c.dim())
    }

    pub fn add(&self, o: &Self) -> Self {
        let t = self.trunc.meet(&o.trunc);
        let mut out = self.truncate(t);
        for (&(m, n), c) in &o.coeffs {
            let cur = out.coeff(m, n);
            out.set(m, n, cur.add(c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map(&self.unit, |c| c.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: i128) -> Self {
        self.map(&self.unit, |c| c.scale(k))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let t = self.trunc.meet(&o.trunc);
        let pts = t.points();
        let coeffs: Vec<((u32, u32), C)> = pts
            .par_iter()
            .map(|&(m, n)| {
                let mut acc = self.unit.zero_like();
                for (&(a, b), x) in &self.coeffs {
                    if a > m || b > n {
                        continue;
                    }
                    if let Some(y) = o.coeffs.get(&(m - a, n - b)) {
                        acc = acc.add(&x.mul(y));
                    }
                }
                ((m, n), acc)
            })
            .collect();
        Self::from_coeffs(&self.unit, t, coeffs)
    }

    /// Multiplicative inverse; the constant term must be the unit.
    pub fn inv(&self) -> Result<Self> {
        if !self.coeff(0, 0).is_one() {
            return Err(Error::NonUnitConstantTerm);
        }
        let mut out = Self::one(&self.unit, self.trunc);
        self.by_levels(&mut out, |out, m, n| {
            let mut acc = self.unit.zero_like();
            for (&(a, b), x) in &self.coeffs {
                if (a, b) == (0, 0) || a > m || b > n {
                    continue;
                }
                if let Some(y) = out.coeffs.get(&(m - a, n - b)) {
                    acc = acc.add(&x.mul(y));
                }
            }
            Ok(acc.neg())
        })?;
        Ok(out)
    }

    /// Fills `out` antichain by antichain (fixed `m + n`), each level in
    /// parallel, skipping `(0, 0)`.
    fn by_levels(
        &self,
        out: &mut Self,
        f: impl Fn(&Self, u32, u32) -> Result<C> + Sync,
    ) -> Result<()> {
        let pts = self.trunc.points();
        let top = pts.iter().map(|&(m, n)| m + n).max().unwrap_or(0);
        for level in 1..=top {
            let row: Vec<(u32, u32)> = pts.iter().copied().filter(|&(m, n)| m + n == level).collect();
            let snapshot = &*out;
            let vals: Vec<Result<C>> = row.par_iter().map(|&(m, n)| f(snapshot, m, n)).collect();
            for (&(m, n), v) in row.iter().zip(vals) {
                out.set(m, n, v?);
            }
        }
        Ok(())
    }

    /// Applies `psi_k` to coefficients and `(s, t) -> (s^k, t^k)`.
    pub fn adams(&self, k: u32) -> Self {
        Self::from_coeffs(
            &self.unit,
            self.trunc,
            self.coeffs
                .iter()
                .filter(|(&(m, n), _)| self.trunc.contains(m * k, n * k))
                .map(|(&(m, n), c)| ((m * k, n * k), c.adams(k))),
        )
    }

    /// Plethystic logarithm: the unique `F` (no constant term) with
    /// `Exp(F) = Z`.
    pub fn plethystic_log(&self) -> Result<Self> {
        if !self.coeff(0, 0).is_one() {
            return Err(Error::NonUnitConstantTerm);
        }
        // P = E(Z) / Z with E = s d/ds + t d/dt
        let mut p = Self::zero(&self.unit, self.trunc);
        self.by_levels(&mut p, |p, m, n| {
            let mut acc = self.coeff(m, n).scale((m + n) as i128);
            for (&(a, b), x) in &p.coeffs {
                if a > m || b > n || (a, b) == (m, n) {
                    continue;
                }
                if let Some(z) = self.coeffs.get(&(m - a, n - b)) {
                    acc = acc.sub(&x.mul(z));
                }
            }
            Ok(acc)
        })?;
        let pts: Vec<(u32, u32)> = self.trunc.points().into_iter().filter(|&p| p != (0, 0)).collect();
        let vals: Vec<Result<((u32, u32), C)>> = pts
            .par_iter()
            .map(|&(m, n)| {
                let g = gcd(m, n);
                let mut acc = self.unit.zero_like();
                for k in 1..=g {
                    if g % k != 0 {
                        continue;
                    }
                    let mu = mobius(k);
                    if mu == 0 {
                        continue;
                    }
                    let x = p.coeff(m / k, n / k);
                    if !x.is_zero() {
                        acc = acc.add(&x.adams(k).scale(mu));
                    }
                }
                acc.div_exact((m + n) as i128)
                    .map(|c| ((m, n), c))
                    .ok_or(Error::NonIntegralResult { m, n })
            })
            .collect();
        let mut out = Self::zero(&self.unit, self.trunc);
        for v in vals {
            let ((m, n), c) = v?;
            out.set(m, n, c);
        }
        Ok(out)
    }

    /// Plethystic exponential of a series without constant term.
    pub fn plethystic_exp(&self) -> Result<Self> {
        if !self.coeff(0, 0).is_zero() {
            return Err(Error::NonZeroConstantTerm);
        }
        let pts: Vec<(u32, u32)> = self.trunc.points().into_iter().filter(|&p| p != (0, 0)).collect();
        let pv: Vec<((u32, u32), C)> = pts
            .par_iter()
            .map(|&(m, n)| {
                let g = gcd(m, n);
                let mut acc = self.unit.zero_like();
                for k in (1..=g).filter(|k| g % k == 0) {
                    let (a, b) = (m / k, n / k);
                    let f = self.coeff(a, b);
                    if !f.is_zero() {
                        acc = acc.add(&f.adams(k).scale((a + b) as i128));
                    }
                }
                ((m, n), acc)
            })
            .collect();
        let p = Self::from_coeffs(&self.unit, self.trunc, pv);
        let mut z = Self::one(&self.unit, self.trunc);
        self.by_levels(&mut z, |z, m, n| {
            let mut acc = self.unit.zero_like();
            for (&(a, b), x) in &p.coeffs {
                if a > m || b > n {
                    continue;
                }
                if let Some(y) = z.coeffs.get(&(m - a, n - b)) {
                    acc = acc.add(&x.mul(y));
                }
            }
            acc.div_exact((m + n) as i128)
                .ok_or(Error::NonIntegralResult { m, n })
        })?;
        Ok(z)
    }

    /// JSON rows sorted by `(m + n, n)`.
    pub fn json_rows(&self) -> Vec<serde_json::Value> {
        let mut keys: Vec<&(u32, u32)> = self.coeffs.keys().collect();
        keys.sort_by_key(|&&(m, n)| (m + n, n, m));
        keys.into_iter()
            .map(|&(m, n)| {
                serde_json::json!({"m": m, "n": n, "coeff": self.coeffs[&(m, n)].to_string()})
            })
            .collect()
    }
}

impl BiSeries<i128> {
    /// One-variable convenience: coefficients of `t^0 .. t^N` at `s^0`.
    pub fn t_coeffs(&self) -> Vec<i128> {
        (0..=self.trunc.max_n).map(|n| self.coeff(0, n)).collect()
    }
}

/// One free generator of bidegree `(m, n)` transforming in `rep`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorTerm<C: Coeff> {
    pub bidegree: (u32, u32),
    pub rep: C,
    pub parity: Parity,
}

impl<C: Coeff> GeneratorTerm<C> {
    pub fn new(bidegree: (u32, u32), rep: C, parity: Parity) -> Self {
        GeneratorTerm {
            bidegree,
            rep,
            parity,
        }
    }

    /// Contribution to the plethystic logarithm: `+rep` if even, `-rep` if odd.
    pub fn log_term(&self, trunc: Truncation) -> BiSeries<C> {
        let c = if self.parity.is_odd() {
            self.rep.neg()
        } else {
            self.rep.clone()
        };
        BiSeries::monomial(c, self.bidegree.0, self.bidegree.1, trunc)
    }
}

/// `(1 - s^m t^n)^{-R}` for an even generator, `(1 - s^m t^n)^R` for an odd
/// one, expanded with symmetric or exterior powers.
pub fn gen_factor<C: Coeff>(g: &GeneratorTerm<C>, trunc: Truncation) -> Result<BiSeries<C>> {
    let (m, n) = g.bidegree;
    if (m, n) == (0, 0) {
        return Err(Error::Invalid("generator of bidegree (0,0)".into()));
    }
    let mut kmax = 0usize;
    while trunc.contains(m * (kmax as u32 + 1), n * (kmax as u32 + 1)) {
        kmax += 1;
    }
    let odd = g.parity.is_odd();
    let pw = g.rep.powers(kmax, odd);
    let mut out = BiSeries::zero(&g.rep, trunc);
    for (k, c) in pw.into_iter().enumerate() {
        let c = if odd && k % 2 == 1 { c.neg() } else { c };
        out.set(m * k as u32, n * k as u32, c);
    }
    Ok(out)
}

/// Product of generator factors.
pub fn product_of_generators<C: Coeff>(
    unit: &C,
    gens: &[GeneratorTerm<C>],
    trunc: Truncation,
) -> Result<BiSeries<C>> {
    let mut acc = BiSeries::one(unit, trunc);
    for g in gens {
        acc = acc.mul(&gen_factor(g, trunc)?);
    }
    Ok(acc)
}

pub fn gcd(a: u32, b: u32) -> u32 {
    num_integer::gcd(a, b)
}

/// Moebius function.
pub fn mobius(mut n: u32) -> i128 {
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            out = -out;
        }
        p += 1;
    }
    if n > 1 {
        out = -out;
    }
    out
}
