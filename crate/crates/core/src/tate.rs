//! Ghost spectrum of the Koszul-Tate resolution read off from `Log Z`.
//!
//! Entries of the ledger carry a sheet tag (number of top forms entering the
//! ghost, as far as it can be inferred) and a stage. Sheet one is the closed
//! form of [`crate::lightcone::sheet1_log_series`]. The remainder at
//! `m >= 2d` is tagged [`Sheet::Two`]; it may include higher sheets, which
//! cannot be told apart from the series alone. A remainder at `m < 2d` would
//! be tagged [`Sheet::Unresolved`].

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::Parity;
use crate::lightcone::{closed_form_series, sheet1_log_series};
use crate::pseries::{mobius, BiSeries, GeneratorTerm, Truncation};
use crate::repring::{SoGroup, VirtualRep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Sheet {
    Zero,
    One,
    /// Sheet two or higher.
    Two,
    Unresolved,
}

impl fmt::Display for Sheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sheet::Zero => "0",
            Sheet::One => "1",
            Sheet::Two => ">=2",
            Sheet::Unresolved => "unresolved",
        })
    }
}

/// Net `Log Z` coefficient at one bidegree, or one sheet's share of it.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub m: u32,
    pub n: u32,
    pub coeff: VirtualRep,
    pub sheet: Sheet,
    pub stage: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhostLedger {
    pub d: usize,
    pub trunc: Truncation,
    pub entries: Vec<LedgerEntry>,
}

impl GhostLedger {
    fn new(d: usize, trunc: Truncation, mut entries: Vec<LedgerEntry>) -> Self {
        entries.retain(|e| !e.coeff.is_zero());
        entries.sort_by_key(|e| (e.m + e.n, e.n, e.m, e.sheet));
        GhostLedger { d, trunc, entries }
    }

    pub fn group(&self) -> SoGroup {
        SoGroup::new(self.d).expect("ledger built for a valid group")
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all entries at `(m, n)`.
    pub fn coeff(&self, m: u32, n: u32) -> VirtualRep {
        let mut acc = VirtualRep::zero(self.group());
        for e in self.entries.iter().filter(|e| (e.m, e.n) == (m, n)) {
            acc += e.coeff.clone();
        }
        acc
    }

    /// The ledger as a series (the sum over sheets).
    pub fn series(&self) -> BiSeries<VirtualRep> {
        let mut out = BiSeries::zero(&VirtualRep::one(self.group()), self.trunc);
        for e in &self.entries {
            let cur = out.coeff(e.m, e.n);
            out.set(e.m, e.n, cur + e.coeff.clone());
        }
        out
    }

    /// Generator reading: each irreducible with positive multiplicity is an
    /// even generator, each with negative multiplicity an odd one.
    pub fn generators(&self) -> Vec<GeneratorTerm<VirtualRep>> {
        let g = self.group();
        let mut out = Vec::new();
        for e in &self.entries {
            for (lam, k) in e.coeff.terms() {
                let rep = VirtualRep::from_terms(g, [(lam.clone(), k.abs())])
                    .expect("diagram already in range");
                let parity = if k > 0 { Parity::Even } else { Parity::Odd };
                out.push(GeneratorTerm::new((e.m, e.n), rep, parity));
            }
        }
        out
    }

    pub fn json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|e| {
                serde_json::json!({
                    "m": e.m,
                    "n": e.n,
                    "coeff": e.coeff.to_string(),
                    "sheet": e.sheet.to_string(),
                    "stage": e.stage,
                })
            })
            .collect();
        serde_json::json!({"d": self.d, "entries": rows})
    }
}

/// Stage of a ghost: coordinates are stage 0, the ghosts of `T` and `U`
/// stage 1, and sheet-one ghosts at total degree `d + j` are stage `j`.
fn stage_of(d: u32, m: u32, n: u32, sheet: Sheet) -> Option<u32> {
    match sheet {
        Sheet::Zero => (m + n).checked_sub(1),
        Sheet::One => (m + n).checked_sub(d),
        _ => None,
    }
}

/// Ledger of `Log Z` for the exact series, split into sheets.
pub fn log_exact(d: usize, trunc: Truncation) -> Result<GhostLedger> {
    let z = closed_form_series(d, trunc)?;
    let log = z.plethystic_log()?;
    split_sheets(d, trunc, &log)
}

fn split_sheets(d: usize, trunc: Truncation, log: &BiSeries<VirtualRep>) -> Result<GhostLedger> {
    let s1 = sheet1_log_series(d, trunc)?;
    let du = d as u32;
    let mut entries = Vec::new();
    for (m, n) in trunc.points() {
        let c = log.coeff(m, n);
        if m < du {
            entries.push(LedgerEntry {
                m,
                n,
                coeff: c,
                sheet: Sheet::Zero,
                stage: stage_of(du, m, n, Sheet::Zero),
            });
            continue;
        }
        let one = s1.coeff(m, n);
        let rest = c - one.clone();
        entries.push(LedgerEntry {
            m,
            n,
            coeff: one,
            sheet: Sheet::One,
            stage: stage_of(du, m, n, Sheet::One),
        });
        let sheet = if m >= 2 * du { Sheet::Two } else { Sheet::Unresolved };
        entries.push(LedgerEntry {
            m,
            n,
            coeff: rest,
            sheet,
            stage: None,
        });
    }
    Ok(GhostLedger::new(d, trunc, entries))
}

/// Logarithm of the sheet-one prediction.
pub fn sheet1_log(d: usize, trunc: Truncation) -> Result<BiSeries<VirtualRep>> {
    sheet1_log_series(d, trunc)
}

/// `Log Z` minus the sheet-one prediction, restricted to `m >= 2d`.
pub fn sheet2_residual(d: usize, trunc: Truncation) -> Result<GhostLedger> {
    if trunc.max_m < 2 * d as u32 {
        return Err(Error::Invalid(format!(
            "truncation max_m = {} does not reach m = 2d = {}",
            trunc.max_m,
            2 * d
        )));
    }
    let ledger = log_exact(d, trunc)?;
    let du = d as u32;
    let entries = ledger
        .entries
        .into_iter()
        .filter(|e| e.m >= 2 * du && e.sheet != Sheet::One)
        .collect();
    Ok(GhostLedger::new(d, trunc, entries))
}

/// Bidegrees with `m < 2d` where `Log Z` differs from sheet one plus the
/// sheet-zero terms.
pub fn sheet1_remainder_below_2d(ledger: &GhostLedger) -> Vec<(u32, u32)> {
    let du = ledger.d as u32;
    ledger
        .entries
        .iter()
        .filter(|e| e.sheet == Sheet::Unresolved && e.m < 2 * du)
        .map(|e| (e.m, e.n))
        .collect()
}

/// `Log(1 - s + t)`: the complete resolution for `d = 1`.
pub fn d1_table(trunc: Truncation) -> Result<GhostLedger> {
    let g = SoGroup::new(1)?;
    let z = BiSeries::from_coeffs(
        &VirtualRep::one(g),
        trunc,
        [
            ((0, 0), VirtualRep::one(g)),
            ((1, 0), VirtualRep::scalar(g, -1)),
            ((0, 1), VirtualRep::one(g)),
        ],
    );
    let log = z.plethystic_log()?;
    let entries = log
        .iter()
        .map(|(&(m, n), c)| LedgerEntry {
            m,
            n,
            coeff: c.clone(),
            sheet: Sheet::Unresolved,
            stage: Some(m + n - 1),
        })
        .collect();
    Ok(GhostLedger::new(1, trunc, entries))
}

impl GhostLedger {
    /// Integer value at `(m, n)` for `d = 1` ledgers (virtual dimension).
    pub fn int_coeff(&self, m: u32, n: u32) -> i128 {
        self.coeff(m, n).dim()
    }
}

/// Generators of a free Lie (super)algebra with their parity and bidegree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WittSpec {
    pub generators: Vec<((u32, u32), Parity)>,
    /// Single-graded spelling (`even@1`), degrees land on `t`.
    pub single_graded: bool,
}

impl WittSpec {
    /// Parses `even@1,even@1` or `even@(1,0),odd@(0,1)`.
    pub fn parse(src: &str) -> Result<WittSpec> {
        let err = |pos: usize, msg: &str| Error::Parse {
            pos,
            msg: msg.to_string(),
        };
        let b = src.as_bytes();
        let mut pos = 0;
        let skip = |pos: &mut usize| {
            while *pos < b.len() && b[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
        };
        let number = |pos: &mut usize| -> Result<u32> {
            let start = *pos;
            while *pos < b.len() && b[*pos].is_ascii_digit() {
                *pos += 1;
            }
            src[start..*pos]
                .parse::<u32>()
                .map_err(|_| err(start, "expected a degree"))
        };
        let mut gens = Vec::new();
        let mut single = None;
        loop {
            skip(&mut pos);
            let parity = if src[pos..].starts_with("even") {
                pos += 4;
                Parity::Even
            } else if src[pos..].starts_with("odd") {
                pos += 3;
                Parity::Odd
            } else {
                return Err(err(pos, "expected `even` or `odd`"));
            };
            skip(&mut pos);
            if b.get(pos) != Some(&b'@') {
                return Err(err(pos, "expected `@`"));
            }
            pos += 1;
            skip(&mut pos);
            let (deg, is_single) = if b.get(pos) == Some(&b'(') {
                pos += 1;
                skip(&mut pos);
                let m = number(&mut pos)?;
                skip(&mut pos);
                if b.get(pos) != Some(&b',') {
                    return Err(err(pos, "expected `,` in bidegree"));
                }
                pos += 1;
                skip(&mut pos);
                let n = number(&mut pos)?;
                skip(&mut pos);
                if b.get(pos) != Some(&b')') {
                    return Err(err(pos, "expected `)`"));
                }
                pos += 1;
                ((m, n), false)
            } else {
                ((0, number(&mut pos)?), true)
            };
            if deg == (0, 0) {
                return Err(err(pos, "generator of degree zero"));
            }
            if *single.get_or_insert(is_single) != is_single {
                return Err(err(pos, "mixed single and double grading"));
            }
            gens.push((deg, parity));
            skip(&mut pos);
            match b.get(pos) {
                None => break,
                Some(b',') => pos += 1,
                Some(_) => return Err(err(pos, "expected `,` or end of input")),
            }
        }
        Ok(WittSpec {
            generators: gens,
            single_graded: single.unwrap_or(true),
        })
    }
}

/// Super-dimensions `sdim L_(m,n)` of the free Lie superalgebra on the
/// generators (positive for even pieces, negative for odd ones).
///
/// Counts signed words: `w = log 1/(1 - V)` has coefficients
/// `sum_j [x^a] V^j / j`, and `sdim L_a = sum_{k | a} mu(k)/k * w_{a/k}`.
pub fn witt_counts(spec: &WittSpec, trunc: Truncation) -> BTreeMap<(u32, u32), i128> {
    let pts = trunc.points();
    let idx = |m: u32, n: u32| (m as usize, n as usize);
    let (mm, nn) = (trunc.max_m as usize + 1, trunc.max_n as usize + 1);
    let maxlen = (trunc.max_m + trunc.max_n) as usize;
    // words[j][m][n]: signed number of words of length j
    let mut cur = vec![vec![0i128; nn]; mm];
    cur[0][0] = 1;
    let mut w = vec![vec![Ratio::<i128>::zero(); nn]; mm];
    for j in 1..=maxlen {
        let mut next = vec![vec![0i128; nn]; mm];
        for (m, row) in cur.iter().enumerate() {
            for (n, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &((a, b), p) in &spec.generators {
                    let (m2, n2) = (m + a as usize, n + b as usize);
                    if m2 < mm && n2 < nn {
                        next[m2][n2] += if p.is_odd() { -c } else { c };
                    }
                }
            }
        }
        for (m, row) in next.iter().enumerate() {
            for (n, &c) in row.iter().enumerate() {
                if c != 0 {
                    w[m][n] += Ratio::new(c, j as i128);
                }
            }
        }
        cur = next;
    }
    let mut out = BTreeMap::new();
    for (m, n) in pts {
        if (m, n) == (0, 0) {
            continue;
        }
        let g = num_integer::gcd(m, n);
        let mut acc = Ratio::<i128>::zero();
        for k in (1..=g).filter(|k| g % k == 0) {
            let (a, b) = idx(m / k, n / k);
            acc += w[a][b] * Ratio::new(mobius(k), k as i128);
        }
        assert!(acc.is_integer(), "Witt count is integral");
        let v = acc.to_integer();
        if v != 0 {
            out.insert((m, n), v);
        }
    }
    out
}

/// Pair of bidegrees related by the reflection through `m - n = d - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityViolation {
    pub at: (u32, u32),
    pub partner: (u32, u32),
    pub coeff: String,
    pub partner_coeff: String,
    /// Transposition left the stable range.
    pub out_of_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityReport {
    pub checked: usize,
    pub violations: Vec<DualityViolation>,
}

impl DualityReport {
    pub fn holds_on_diagonal(&self, total: u32) -> bool {
        !self.violations.iter().any(|v| v.at.0 + v.at.1 == total)
    }
}

/// `c(n+d-1, m-d+1) = (-1)^(m+n-d+1) transpose(c(m, n))`, tested on every
/// pair of bidegrees inside the ledger's truncation (each pair once).
pub fn duality_check(ledger: &GhostLedger) -> DualityReport {
    let d = ledger.d as i64;
    let trunc = ledger.trunc;
    let mut checked = 0;
    let mut violations = Vec::new();
    if ledger.is_empty() {
        return DualityReport {
            checked,
            violations,
        };
    }
    for (m, n) in trunc.points() {
        let (m2, n2) = (n as i64 + d - 1, m as i64 - d + 1);
        if m2 < 0 || n2 < 0 || !trunc.contains(m2 as u32, n2 as u32) {
            continue;
        }
        let (m2, n2) = (m2 as u32, n2 as u32);
        if (m2 + n2, n2) < (m + n, n) {
            continue;
        }
        checked += 1;
        let c = ledger.coeff(m, n);
        let c2 = ledger.coeff(m2, n2);
        let sign = if (m as i64 + n as i64 - d + 1).rem_euclid(2) == 1 { -1 } else { 1 };
        let (t, dropped) = c.transpose();
        let (_, dropped2) = c2.transpose();
        if dropped || dropped2 || t.scale(sign) != c2 {
            violations.push(DualityViolation {
                at: (m, n),
                partner: (m2, n2),
                coeff: c.to_string(),
                partner_coeff: c2.to_string(),
                out_of_range: dropped || dropped2,
            });
        }
    }
    DualityReport {
        checked,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseries::product_of_generators;

    fn g(d: usize) -> SoGroup {
        SoGroup::new(d).unwrap()
    }

    fn rep(d: usize, s: &str) -> VirtualRep {
        VirtualRep::parse(g(d), s).unwrap()
    }

    #[test]
    fn d1_table_entries() {
        let t = d1_table(Truncation::new(10, 10)).unwrap();
        for m in 0..=10 {
            assert_eq!(t.int_coeff(m, 1), 1);
        }
        assert_eq!(t.int_coeff(5, 3), 7);
        assert_eq!(t.int_coeff(4, 4), -8);
        assert_eq!(t.int_coeff(2, 9), 5);
        assert_eq!(t.int_coeff(1, 0), -1);
        assert_eq!(t.int_coeff(0, 2), -1);
    }

    #[test]
    fn witt_matches_two_generator_example() {
        let spec = WittSpec::parse("even@1,even@1").unwrap();
        let c = witt_counts(&spec, Truncation::new(0, 5));
        let v: Vec<i128> = (1..=5).map(|n| c[&(0, n)]).collect();
        assert_eq!(v, [2, 1, 2, 3, 6]);
        let single = witt_counts(&WittSpec::parse("even@1").unwrap(), Truncation::new(0, 6));
        assert_eq!(single.into_iter().collect::<Vec<_>>(), [((0, 1), 1)]);
    }

    #[test]
    fn witt_matches_d1_table() {
        let trunc = Truncation::new(10, 10);
        let spec = WittSpec::parse("even@(1,0), odd@(0,1)").unwrap();
        let w = witt_counts(&spec, trunc);
        let t = d1_table(trunc).unwrap();
        for (m, n) in trunc.points() {
            let x = w.get(&(m, n)).copied().unwrap_or(0);
            assert_eq!(-x, t.int_coeff(m, n), "({m},{n})");
        }
    }

    #[test]
    fn witt_spec_errors() {
        for bad in ["", "even", "even@", "even@(1,0", "odd@(0,0)", "even@1,odd@(1,0)", "even@1;"] {
            assert!(WittSpec::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn low_stages_at_d5() {
        let d = 5;
        let du = d as u32;
        let led = log_exact(d, Truncation::new(du + 3, 3).with_total(du + 3)).unwrap();
        // sigma = -1
        assert_eq!(led.coeff(du + 1, 1), rep(d, "1"));
        assert_eq!(led.coeff(du, 2), rep(d, "-1"));
        assert_eq!(led.coeff(du + 2, 1), rep(d, "[1]"));
        assert_eq!(led.coeff(du + 1, 2), rep(d, "-2*[1]"));
        assert_eq!(led.coeff(du, 3), rep(d, "[1]"));
        assert_eq!(led.coeff(1, 0), rep(d, "-[1]"));
        assert_eq!(led.coeff(0, 2), rep(d, "-1"));
        assert!(sheet1_remainder_below_2d(&led).is_empty());
        let s: Vec<_> = led.entries.iter().filter(|e| e.sheet == Sheet::Zero).collect();
        assert_eq!(s.len(), 4);
        for e in &led.entries {
            if e.sheet == Sheet::One {
                assert_eq!(e.stage, Some(e.m + e.n - du));
            }
        }
    }

    #[test]
    fn generator_reading_reproduces_the_series() {
        for d in [2usize, 3] {
            let trunc = Truncation::new(2 * d as u32 + 1, 4);
            let led = log_exact(d, trunc).unwrap();
            let z = product_of_generators(&VirtualRep::one(g(d)), &led.generators(), trunc).unwrap();
            assert_eq!(z, closed_form_series(d, trunc).unwrap());
        }
    }

    #[test]
    fn duality_on_the_d1_table() {
        let t = d1_table(Truncation::new(11, 11).with_total(11)).unwrap();
        let r = duality_check(&t);
        for k in [1, 3, 4, 5, 7, 8, 9, 11] {
            assert!(r.holds_on_diagonal(k), "m+n={k}");
        }
        for k in [2, 6, 10] {
            assert!(!r.holds_on_diagonal(k), "m+n={k}");
        }
        let empty = GhostLedger::new(3, Truncation::new(4, 4), Vec::new());
        assert!(duality_check(&empty).violations.is_empty());
    }

    #[test]
    fn sheet_two_grids() {
        let cells = |d: usize| -> Vec<((u32, u32), VirtualRep)> {
            let du = d as u32;
            let r = sheet2_residual(d, Truncation::new(2 * du + 3, 5)).unwrap();
            assert!(r.entries.iter().all(|e| e.sheet == Sheet::Two));
            let mut v: Vec<_> = r
                .entries
                .iter()
                .filter(|e| e.m + e.n <= 2 * du + 5)
                .map(|e| ((e.m - 2 * du, e.n), e.coeff.clone()))
                .collect();
            v.sort_by_key(|x| x.0);
            v
        };
        let odd = [
            ((0, 5), rep(3, "[1]")),
            ((1, 3), rep(3, "1")),
            ((1, 4), rep(3, "-3*[1]")),
            ((2, 2), rep(3, "-1")),
            ((2, 3), rep(3, "3*[1]")),
            ((3, 2), rep(3, "-[1]")),
        ];
        assert_eq!(cells(3), odd);
        let even = [
            ((0, 4), rep(4, "-1")),
            ((0, 5), rep(4, "[1]")),
            ((1, 3), rep(4, "1")),
            ((1, 4), rep(4, "-3*[1]")),
            ((2, 3), rep(4, "3*[1]")),
            ((3, 2), rep(4, "-[1]")),
        ];
        assert_eq!(cells(4), even);
    }

    #[test]
    fn residual_needs_reach() {
        assert!(sheet2_residual(3, Truncation::new(5, 4)).is_err());
    }
}
