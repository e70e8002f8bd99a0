//! Graded supercommutative polynomial arithmetic.
//!
//! Variables are declared once per [`Algebra`] with a parity, a bidegree
//! `(m, n)` (weights in `theta` and `p`), a ghost number and optionally one
//! vector index and a jet order. Every concrete variable instance (name,
//! index value, time-derivative order) is assigned a *slot*; slots are
//! totally ordered by `(ghost number, name, index, derivative order)` and
//! monomials store their factors sorted by slot. All reordering during
//! multiplication is paid for with the Koszul sign.
//!
//! Odd slots appear with exponent at most one; a product that would square
//! an odd slot vanishes.

mod parse;
mod poly;

pub use parse::parse_poly;
pub use poly::{Derivation, GradedPoly, Monomial};

use std::collections::HashMap;
use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Z/2 parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_int(k: i64) -> Parity {
        if k.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn bit(self) -> u32 {
        self as u32
    }

    /// `(-1)^(self * other)`.
    pub fn sign_with(self, other: Parity) -> i32 {
        if self.is_odd() && other.is_odd() {
            -1
        } else {
            1
        }
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_int((self as i64) + (rhs as i64))
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// Declaration of one (possibly vector-indexed) variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    /// `Some(n)` for a variable carrying one index in `1..=n`.
    pub index_range: Option<usize>,
    pub parity: Parity,
    pub bidegree: (i32, i32),
    pub ghost_number: i32,
    /// Highest time derivative carried as an independent jet coordinate.
    pub jet_order: u32,
}

impl VariableDecl {
    pub fn scalar(name: &str, parity: Parity) -> Self {
        VariableDecl {
            name: name.to_string(),
            index_range: None,
            parity,
            bidegree: (0, 0),
            ghost_number: 0,
            jet_order: 0,
        }
    }

    pub fn vector(name: &str, parity: Parity, range: usize) -> Self {
        VariableDecl {
            index_range: Some(range),
            ..VariableDecl::scalar(name, parity)
        }
    }

    pub fn bidegree(mut self, m: i32, n: i32) -> Self {
        self.bidegree = (m, n);
        self
    }

    pub fn ghost(mut self, g: i32) -> Self {
        self.ghost_number = g;
        self
    }

    pub fn jets(mut self, order: u32) -> Self {
        self.jet_order = order;
        self
    }
}

/// Metric used to lower vector indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// `delta_mn`.
    #[default]
    Euclidean,
    /// `diag(-1, +1, ..., +1)`.
    Minkowski,
    /// Split form pairing index `k` with `k + r` (`r = floor(d/2)`) and, for
    /// odd `d`, index `d` with itself. Indices are then torus weight vectors:
    /// `k -> +e_k`, `k + r -> -e_k`, `d -> 0`.
    Split,
}

impl Metric {
    /// Nonzero entries `(a, b, eta_ab)` of the metric in dimension `d`
    /// (1-based indices).
    pub fn entries(self, d: usize) -> Vec<(usize, usize, i64)> {
        match self {
            Metric::Euclidean => (1..=d).map(|a| (a, a, 1)).collect(),
            Metric::Minkowski => (1..=d).map(|a| (a, a, if a == 1 { -1 } else { 1 })).collect(),
            Metric::Split => {
                let r = d / 2;
                let mut out = Vec::new();
                for k in 1..=r {
                    out.push((k, k + r, 1));
                    out.push((k + r, k, 1));
                }
                if d % 2 == 1 {
                    out.push((d, d, 1));
                }
                out
            }
        }
    }

    /// Torus weight (in the `e`-basis, length `floor(d/2)`) of the basis
    /// vector with 1-based index `a`. Only meaningful for [`Metric::Split`].
    pub fn index_weight(self, d: usize, a: usize) -> Vec<i32> {
        let r = d / 2;
        let mut w = vec![0; r];
        if self == Metric::Split {
            if a >= 1 && a <= r {
                w[a - 1] = 1;
            } else if a > r && a <= 2 * r {
                w[a - r - 1] = -1;
            }
        }
        w
    }
}

/// Resolved variable instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotInfo {
    pub var: usize,
    /// 1-based index value, or 0 for scalars.
    pub index: usize,
    pub deriv: u32,
    pub parity: Parity,
}

/// A set of variable declarations over a concrete space dimension.
#[derive(Debug, Clone)]
pub struct Algebra {
    dim: usize,
    metric: Metric,
    vars: Vec<VariableDecl>,
    by_name: HashMap<String, usize>,
    slots: Vec<SlotInfo>,
    slot_of: HashMap<(usize, usize, u32), u32>,
}

impl Algebra {
    pub fn new(dim: usize, metric: Metric, decls: Vec<VariableDecl>) -> Result<Arc<Algebra>> {
        let mut by_name = HashMap::new();
        for (i, v) in decls.iter().enumerate() {
            if v.name.is_empty() || !parse::is_identifier(&v.name) {
                return Err(Error::Invalid(format!("bad variable name `{}`", v.name)));
            }
            if by_name.insert(v.name.clone(), i).is_some() {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let mut keys = Vec::new();
        for (i, v) in decls.iter().enumerate() {
            let indices: Vec<usize> = match v.index_range {
                None => vec![0],
                Some(n) => (1..=n).collect(),
            };
            for &idx in &indices {
                for k in 0..=v.jet_order {
                    keys.push((v.ghost_number, v.name.clone(), idx, k, i));
                }
            }
        }
        keys.sort();
        let mut slots = Vec::with_capacity(keys.len());
        let mut slot_of = HashMap::new();
        for (pos, (_, _, idx, k, var)) in keys.into_iter().enumerate() {
            slot_of.insert((var, idx, k), pos as u32);
            slots.push(SlotInfo {
                var,
                index: idx,
                deriv: k,
                parity: decls[var].parity,
            });
        }
        Ok(Arc::new(Algebra {
            dim,
            metric,
            vars: decls,
            by_name,
            slots,
            slot_of,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn vars(&self) -> &[VariableDecl] {
        &self.vars
    }

    pub fn var_id(&self, name: &str) -> Result<usize> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UndeclaredVariable(name.to_string()))
    }

    pub fn decl(&self, var: usize) -> &VariableDecl {
        &self.vars[var]
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_info(&self, slot: u32) -> &SlotInfo {
        &self.slots[slot as usize]
    }

    pub fn slot_parity(&self, slot: u32) -> Parity {
        self.slots[slot as usize].parity
    }

    /// Slot of `name_index` at derivative order `deriv`.
    pub fn slot(&self, var: usize, index: usize, deriv: u32) -> Result<u32> {
        let decl = &self.vars[var];
        let ok = match decl.index_range {
            None => index == 0,
            Some(n) => index >= 1 && index <= n,
        };
        if !ok {
            return Err(Error::IndexOutOfRange {
                name: decl.name.clone(),
                index,
            });
        }
        if deriv > decl.jet_order {
            return Err(Error::DerivativeOrderOverflow {
                order: deriv,
                bound: decl.jet_order,
            });
        }
        Ok(self.slot_of[&(var, index, deriv)])
    }

    pub fn slot_by_name(&self, name: &str, index: usize) -> Result<u32> {
        self.slot(self.var_id(name)?, index, 0)
    }

    /// Same field, one more time derivative.
    pub fn slot_dot(&self, slot: u32) -> Result<u32> {
        let s = &self.slots[slot as usize];
        self.slot(s.var, s.index, s.deriv + 1)
    }

    pub fn slot_bidegree(&self, slot: u32) -> (i32, i32) {
        self.vars[self.slots[slot as usize].var].bidegree
    }

    pub fn slot_ghost(&self, slot: u32) -> i32 {
        self.vars[self.slots[slot as usize].var].ghost_number
    }

    /// Torus weight of a slot (vector slots only, split metric only).
    pub fn slot_weight(&self, slot: u32) -> Vec<i32> {
        let s = &self.slots[slot as usize];
        if self.vars[s.var].index_range.is_some() {
            self.metric.index_weight(self.dim, s.index)
        } else {
            vec![0; self.dim / 2]
        }
    }

    /// Textual name of a slot in the expression grammar.
    pub fn slot_name(&self, slot: u32) -> String {
        let s = &self.slots[slot as usize];
        let mut out = self.vars[s.var].name.clone();
        if self.vars[s.var].index_range.is_some() {
            out.push('_');
            out.push_str(&s.index.to_string());
        }
        if s.deriv > 0 {
            out.push('.');
            for _ in 0..s.deriv {
                out.push('t');
            }
        }
        out
    }

    /// Monomial `name_index` as a polynomial.
    pub fn var(self: &Arc<Self>, name: &str, index: usize) -> Result<GradedPoly> {
        let slot = self.slot_by_name(name, index)?;
        Ok(GradedPoly::slot(self, slot))
    }

    pub fn one(self: &Arc<Self>) -> GradedPoly {
        GradedPoly::constant(self, BigRational::one())
    }

    pub fn zero(self: &Arc<Self>) -> GradedPoly {
        GradedPoly::constant(self, BigRational::zero())
    }

    /// `eta_ab` as a rational.
    pub fn eta(&self, a: usize, b: usize) -> i64 {
        self.metric
            .entries(self.dim)
            .into_iter()
            .find(|&(x, y, _)| x == a && y == b)
            .map(|(_, _, v)| v)
            .unwrap_or(0)
    }

    /// Lowered vector component `v_a = eta_ab v^b`.
    pub fn lower(self: &Arc<Self>, name: &str, a: usize) -> Result<GradedPoly> {
        let mut out = self.zero();
        for (x, b, v) in self.metric.entries(self.dim) {
            if x == a {
                out = out + self.var(name, b)?.scale_int(v);
            }
        }
        Ok(out)
    }

    /// Contraction `eta_ab u^a v^b`.
    pub fn dot(self: &Arc<Self>, u: &str, v: &str) -> Result<GradedPoly> {
        let mut out = self.zero();
        for (a, b, e) in self.metric.entries(self.dim) {
            out = out + (&self.var(u, a)? * &self.var(v, b)?).scale_int(e);
        }
        Ok(out)
    }
}

/// Super-inverse of a graded bilinear form `m_ij` over index parities:
/// returns `mt` with `mt^ik m_kj = (-1)^i delta^i_j`.
pub fn super_inverse(
    m: &[Vec<BigRational>],
    parities: &[Parity],
) -> Option<Vec<Vec<BigRational>>> {
    let inv = crate::linalg::invert(m)?;
    Some(
        inv.into_iter()
            .enumerate()
            .map(|(i, row)| {
                if parities[i].is_odd() {
                    row.into_iter().map(|x| -x).collect()
                } else {
                    row
                }
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64) -> BigRational {
        BigRational::from_integer(a.into())
    }

    #[test]
    fn slot_order_follows_ghost_then_name() {
        let alg = Algebra::new(
            2,
            Metric::Euclidean,
            vec![
                VariableDecl::scalar("b", Parity::Odd).ghost(-1),
                VariableDecl::vector("p", Parity::Even, 2),
                VariableDecl::vector("theta", Parity::Odd, 2),
            ],
        )
        .unwrap();
        let names: Vec<String> = (0..alg.num_slots() as u32).map(|s| alg.slot_name(s)).collect();
        assert_eq!(names, ["b", "p_1", "p_2", "theta_1", "theta_2"]);
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = Algebra::new(
            1,
            Metric::Euclidean,
            vec![
                VariableDecl::scalar("b", Parity::Odd),
                VariableDecl::scalar("b", Parity::Even),
            ],
        )
        .unwrap_err();
        assert_eq!(err, Error::DuplicateVariable("b".into()));
    }

    #[test]
    fn super_inverse_convention() {
        // one even pair (x, p) and one odd coordinate theta
        let parities = [Parity::Even, Parity::Even, Parity::Odd];
        let m = vec![
            vec![q(0), q(-1), q(0)],
            vec![q(1), q(0), q(0)],
            vec![q(0), q(0), q(1)],
        ];
        let mt = super_inverse(&m, &parities).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = q(0);
                for k in 0..3 {
                    acc += &mt[i][k] * &m[k][j];
                }
                let expect = if i == j {
                    if parities[i].is_odd() {
                        q(-1)
                    } else {
                        q(1)
                    }
                } else {
                    q(0)
                };
                assert_eq!(acc, expect, "entry ({i},{j})");
            }
        }
    }
}
