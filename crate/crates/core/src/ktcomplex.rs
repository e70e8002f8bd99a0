//! First stages of the Koszul-Tate differential on `Sym(p, theta, ...)`.
//!
//! Stage 1 adds the ghosts `b`, `beta` of the constraints `T = p.p` and
//! `U = p.theta`; stage 2 adds `b'`, `beta'` for the saturation
//! reducibilities `U Omega = 0`, `T Omega - U i_p Omega = 0`; stage 3 adds
//! four vector ghosts `beta''1..4` killing the classes `omega_1..4`.
//!
//! Vectors are stored with upper indices. `Omega = theta^1 ... theta^d`
//! (`eps_{1..d} = +1`), `i_m` is the left derivative by `theta^m`, and the
//! vector ghosts carry the raised index of the class they kill. The parity
//! of each ghost is the parity of its image plus one.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grading::{Algebra, Derivation, GradedPoly, Metric, Monomial, Parity, VariableDecl};
use crate::linalg;
use crate::repring::{Character, SoGroup, VirtualRep};
use crate::tate::GhostLedger;

/// Largest `d` accepted by [`build_stage`].
pub const D_MAX_COMPLEX: usize = 4;

/// Default bound on the size of a tri-graded slice.
pub const SLICE_BOUND: usize = 20_000;

/// The variables and differential of one stage.
#[derive(Debug, Clone)]
pub struct StagedComplex {
    pub d: usize,
    pub stage: u32,
    pub alg: Arc<Algebra>,
    pub diff: Derivation,
    /// Ghost names in the order they were introduced.
    pub ghosts: Vec<String>,
}

fn theta_omega(alg: &Arc<Algebra>) -> Result<GradedPoly> {
    let mut out = alg.one();
    for a in 1..=alg.dim() {
        out = &out * &alg.var("theta", a)?;
    }
    Ok(out)
}

/// Forms built from `Omega` in an algebra containing `p` and `theta`.
pub struct Forms {
    alg: Arc<Algebra>,
    pub omega: GradedPoly,
    /// `i_m Omega`, lower index `m = 1..=d` at position `m - 1`.
    pub i_omega: Vec<GradedPoly>,
    pub ip_omega: GradedPoly,
    /// `i_m i_p Omega`.
    pub i_ip_omega: Vec<GradedPoly>,
}

impl Forms {
    pub fn new(alg: &Arc<Algebra>) -> Result<Forms> {
        let d = alg.dim();
        let omega = theta_omega(alg)?;
        let th = |a: usize| alg.slot_by_name("theta", a);
        let i_omega: Vec<GradedPoly> = (1..=d)
            .map(|a| Ok(omega.left_partial(th(a)?)))
            .collect::<Result<_>>()?;
        let mut ip_omega = alg.zero();
        for a in 1..=d {
            ip_omega = ip_omega + &alg.var("p", a)? * &i_omega[a - 1];
        }
        let i_ip_omega = (1..=d)
            .map(|a| Ok(ip_omega.left_partial(th(a)?)))
            .collect::<Result<_>>()?;
        Ok(Forms {
            alg: alg.clone(),
            omega,
            i_omega,
            ip_omega,
            i_ip_omega,
        })
    }

    pub fn t(&self) -> Result<GradedPoly> {
        self.alg.dot("p", "p")
    }

    pub fn u(&self) -> Result<GradedPoly> {
        self.alg.dot("p", "theta")
    }

    /// `v^a = eta^{am} v_m` (the metric is its own inverse in every basis
    /// offered).
    pub fn raise(&self, lower: &[GradedPoly]) -> Vec<GradedPoly> {
        let d = self.alg.dim();
        let mut out = vec![self.alg.zero(); d];
        for (a, m, e) in self.alg.metric().entries(d) {
            out[a - 1] = &out[a - 1] + &lower[m - 1].scale_int(e);
        }
        out
    }
}

fn ghost_decl(name: &str, image: &GradedPoly, vector: Option<usize>) -> Result<VariableDecl> {
    let parity = image
        .parity()
        .ok_or_else(|| Error::Invalid(format!("image of {name} has mixed parity")))?;
    let ghost = image
        .ghost_number()
        .ok_or_else(|| Error::Invalid(format!("image of {name} has mixed ghost number")))?;
    let split = image.bigrade_split();
    let &(m, n) = match split.keys().collect::<Vec<_>>().as_slice() {
        [k] => *k,
        _ => return Err(Error::Invalid(format!("image of {name} is not bihomogeneous"))),
    };
    let decl = match vector {
        Some(r) => VariableDecl::vector(name, parity + Parity::Odd, r),
        None => VariableDecl::scalar(name, parity + Parity::Odd),
    };
    Ok(decl.bidegree(m, n).ghost(ghost - 1))
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

/// Builds the stage-`stage` complex at dimension `d`.
pub fn build_stage(d: usize, stage: u32, metric: Metric) -> Result<StagedComplex> {
    build_stage_bounded(d, stage, metric, D_MAX_COMPLEX)
}

pub fn build_stage_bounded(d: usize, stage: u32, metric: Metric, d_max: usize) -> Result<StagedComplex> {
    if !(1..=3).contains(&stage) {
        return Err(Error::UnsupportedStage(stage));
    }
    if d == 0 || d > d_max {
        return Err(Error::BruteForceTooLarge(format!("d = {d} outside 1..={d_max}")));
    }
    let mut decls = vec![
        VariableDecl::vector("p", Parity::Even, d).bidegree(0, 1),
        VariableDecl::vector("theta", Parity::Odd, d).bidegree(1, 0),
    ];
    let base = Algebra::new(d, metric, decls.clone())?;
    let f = Forms::new(&base)?;
    // (name, index (0 for scalars), image in the algebra of its stage)
    let mut images: Vec<(String, usize, GradedPoly)> = Vec::new();
    let t = f.t()?;
    let u = f.u()?;
    decls.push(ghost_decl("b", &t, None)?);
    decls.push(ghost_decl("beta", &u, None)?);
    images.push(("b".into(), 0, t));
    images.push(("beta".into(), 0, u));
    let mut ghosts = vec!["b".to_string(), "beta".to_string()];
    if stage >= 2 {
        let a1 = Algebra::new(d, metric, decls.clone())?;
        let f1 = Forms::new(&a1)?;
        let (b, beta) = (a1.var("b", 0)?, a1.var("beta", 0)?);
        let img_bp = &b * &f1.omega - &beta * &f1.ip_omega;
        let img_betap = &beta * &f1.omega;
        decls.push(ghost_decl("b'", &img_bp, None)?);
        decls.push(ghost_decl("beta'", &img_betap, None)?);
        images.push(("b'".into(), 0, img_bp));
        images.push(("beta'".into(), 0, img_betap));
        ghosts.push("b'".into());
        ghosts.push("beta'".into());
    }
    if stage >= 3 {
        let a2 = Algebra::new(d, metric, decls.clone())?;
        let f2 = Forms::new(&a2)?;
        let (b, beta) = (a2.var("b", 0)?, a2.var("beta", 0)?);
        let (bp, betap) = (a2.var("b'", 0)?, a2.var("beta'", 0)?);
        let beta2 = (&beta * &beta).scale(&half());
        let lower = |name: &str| -> Result<Vec<GradedPoly>> {
            (1..=d).map(|m| a2.lower(name, m)).collect()
        };
        let (p_l, th_l) = (lower("p")?, lower("theta")?);
        let mut omegas: Vec<Vec<GradedPoly>> = vec![Vec::new(); 4];
        for m in 0..d {
            omegas[0].push(&th_l[m] * &betap);
            omegas[1].push(&p_l[m] * &betap - &beta2 * &f2.i_omega[m]);
            omegas[2].push(&th_l[m] * &bp - &beta2 * &f2.i_omega[m]);
            omegas[3].push(
                &p_l[m] * &bp + &(&b * &beta) * &f2.i_omega[m] + &beta2 * &f2.i_ip_omega[m],
            );
        }
        for (i, om) in omegas.iter().enumerate() {
            let name = format!("beta''{}", i + 1);
            let up = f2.raise(om);
            let nonzero = up.iter().find(|x| !x.is_zero()).ok_or_else(|| {
                Error::Invalid(format!("omega_{} vanishes identically", i + 1))
            })?;
            decls.push(ghost_decl(&name, nonzero, Some(d))?);
            for (a, x) in up.into_iter().enumerate() {
                images.push((name.clone(), a + 1, x));
            }
            ghosts.push(name);
        }
    }
    let alg = Algebra::new(d, metric, decls)?;
    let mut diff = Derivation::odd(&alg);
    for (name, idx, img) in images {
        let slot = alg.slot_by_name(&name, idx)?;
        diff.set_image(slot, img.embed(&alg)?);
    }
    let diff = diff.with_zero_images();
    Ok(StagedComplex {
        d,
        stage,
        alg,
        diff,
        ghosts,
    })
}

impl StagedComplex {
    pub fn var(&self, name: &str, index: usize) -> Result<GradedPoly> {
        self.alg.var(name, index)
    }

    pub fn forms(&self) -> Result<Forms> {
        Forms::new(&self.alg)
    }

    /// `d` applied to a polynomial.
    pub fn apply(&self, x: &GradedPoly) -> Result<GradedPoly> {
        self.diff.apply(x)
    }

    /// Every generator slot with its printable name.
    pub fn generator_slots(&self) -> Vec<(String, u32)> {
        (0..self.alg.num_slots() as u32)
            .map(|s| (self.alg.slot_name(s), s))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NilpotenceEntry {
    pub generator: String,
    pub image: String,
    pub identity: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NilpotenceReport {
    pub d: usize,
    pub stage: u32,
    pub entries: Vec<NilpotenceEntry>,
}

fn identity_for(name: &str) -> &'static str {
    match name {
        "p" | "theta" => "d of a coordinate vanishes",
        "b" => "d(T) = 0",
        "beta" => "d(U) = 0",
        "b'" => "T Omega - U i_p Omega = 0",
        "beta'" => "U Omega = 0",
        "beta''1" => "theta_m Omega = 0 and U Omega = 0",
        "beta''2" => "p_m Omega = U i_m Omega",
        "beta''3" => "theta_m i_p Omega = U i_m Omega",
        "beta''4" => "p_m Omega = U i_m Omega and p_m i_p Omega = T i_m Omega + U i_m i_p Omega",
        _ => "",
    }
}

/// Verifies `d(d(v)) = 0` on every generator; `d^2` is a derivation, so this
/// covers the whole algebra.
pub fn check_nilpotent(c: &StagedComplex) -> Result<NilpotenceReport> {
    let mut entries = Vec::new();
    for (name, slot) in c.generator_slots() {
        let v = GradedPoly::slot(&c.alg, slot);
        let img = c.apply(&v)?;
        let dd = c.apply(&img)?;
        if !dd.is_zero() {
            return Err(Error::NilpotenceFailure {
                generator: name,
                residue: dd.to_string(),
            });
        }
        let var = c.alg.decl(c.alg.slot_info(slot).var).name.clone();
        entries.push(NilpotenceEntry {
            generator: name,
            image: img.to_string(),
            identity: identity_for(&var),
        });
    }
    Ok(NilpotenceReport {
        d: c.d,
        stage: c.stage,
        entries,
    })
}

/// The contraction identities and the two saturation reducibilities, each
/// with a flag telling whether it holds as a polynomial identity.
pub fn contraction_identities(d: usize, metric: Metric) -> Result<Vec<(String, bool)>> {
    let alg = Algebra::new(
        d,
        metric,
        vec![
            VariableDecl::vector("p", Parity::Even, d).bidegree(0, 1),
            VariableDecl::vector("theta", Parity::Odd, d).bidegree(1, 0),
        ],
    )?;
    let f = Forms::new(&alg)?;
    let (t, u) = (f.t()?, f.u()?);
    let mut out = Vec::new();
    let mut all = [true; 4];
    for m in 1..=d {
        let th = alg.lower("theta", m)?;
        let p = alg.lower("p", m)?;
        let im = &f.i_omega[m - 1];
        all[0] &= (&th * &f.omega).is_zero();
        all[1] &= &p * &f.omega == &u * im;
        all[2] &= &th * &f.ip_omega == &u * im;
        all[3] &= &p * &f.ip_omega == &(&t * im) + &(&u * &f.i_ip_omega[m - 1]);
    }
    out.push(("theta_m Omega = 0".to_string(), all[0]));
    out.push(("p_m Omega = U i_m Omega".to_string(), all[1]));
    out.push(("theta_m i_p Omega = U i_m Omega".to_string(), all[2]));
    out.push(("p_m i_p Omega = T i_m Omega + U i_m i_p Omega".to_string(), all[3]));
    out.push(("U Omega = 0".to_string(), (&u * &f.omega).is_zero()));
    out.push((
        "T Omega - U i_p Omega = 0".to_string(),
        (&(&t * &f.omega) - &(&u * &f.ip_omega)).is_zero(),
    ));
    Ok(out)
}

/// Cohomology of one tri-graded slice.
#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyReport {
    pub bidegree: (u32, u32),
    pub ghost: i32,
    pub dimension: usize,
    pub rep: VirtualRep,
    pub representatives: Vec<GradedPoly>,
}

/// Monomials of the given bidegree and ghost number, grouped by weight.
fn slice_basis(
    alg: &Algebra,
    bideg: (u32, u32),
    ghost: i32,
    bound: usize,
) -> Result<BTreeMap<Vec<i32>, Vec<Monomial>>> {
    let slots: Vec<u32> = (0..alg.num_slots() as u32).collect();
    let info: Vec<((i32, i32), i32, bool)> = slots
        .iter()
        .map(|&s| (alg.slot_bidegree(s), alg.slot_ghost(s), alg.slot_parity(s).is_odd()))
        .collect();
    if info.iter().any(|&((a, b), g, _)| a < 0 || b < 0 || a + b == 0 || g > 0) {
        return Err(Error::Invalid("slice enumeration needs positive bidegrees".into()));
    }
    let mut out: Vec<Monomial> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        left: (i32, i32),
        g: i32,
        target: i32,
        info: &[((i32, i32), i32, bool)],
        cur: &mut Vec<(u32, u32)>,
        out: &mut Vec<Monomial>,
        bound: usize,
    ) -> bool {
        if g < target {
            return true;
        }
        if left == (0, 0) {
            if g == target {
                out.push(Monomial(cur.iter().copied().collect()));
                if out.len() > bound {
                    return false;
                }
            }
            return true;
        }
        if i == info.len() {
            return true;
        }
        let ((a, b), h, odd) = info[i];
        let mut e = 0u32;
        loop {
            let rest = (left.0 - a * e as i32, left.1 - b * e as i32);
            if rest.0 < 0 || rest.1 < 0 || (odd && e > 1) {
                break;
            }
            if e > 0 {
                cur.push((i as u32, e));
            }
            let ok = rec(i + 1, rest, g + h * e as i32, target, info, cur, out, bound);
            if e > 0 {
                cur.pop();
            }
            if !ok {
                return false;
            }
            e += 1;
        }
        true
    }
    let target = (bideg.0 as i32, bideg.1 as i32);
    if !rec(0, target, 0, ghost, &info, &mut Vec::new(), &mut out, bound) {
        return Err(Error::SliceTooLarge {
            size: out.len(),
            bound,
        });
    }
    let mut blocks: BTreeMap<Vec<i32>, Vec<Monomial>> = BTreeMap::new();
    for m in out {
        blocks.entry(m.weight(alg)).or_default().push(m);
    }
    Ok(blocks)
}

fn matrix_of(
    c: &StagedComplex,
    source: &[Monomial],
    target: &[Monomial],
) -> Result<Vec<Vec<BigRational>>> {
    let index: HashMap<&Monomial, usize> = target.iter().enumerate().map(|(i, m)| (m, i)).collect();
    source
        .iter()
        .map(|m| {
            let x = GradedPoly::from_terms(&c.alg, [(m.clone(), BigRational::one())]);
            let dx = c.apply(&x)?;
            let mut row = vec![BigRational::zero(); target.len()];
            for (mono, coeff) in dx.terms() {
                let j = index.get(mono).ok_or_else(|| {
                    Error::Invalid("differential leaves its slice".into())
                })?;
                row[*j] = coeff.clone();
            }
            Ok(row)
        })
        .collect()
}

fn transpose(m: &[Vec<BigRational>], cols: usize) -> Vec<Vec<BigRational>> {
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Cohomology of `d` at bidegree `(m, n)` and ghost number `ghost`; needs
/// the split metric so that slots carry torus weights.
pub fn cohomology_at(
    c: &StagedComplex,
    bidegree: (u32, u32),
    ghost: i32,
    bound: usize,
) -> Result<CohomologyReport> {
    if c.alg.metric() != Metric::Split {
        return Err(Error::Invalid("cohomology needs the split metric".into()));
    }
    let here = slice_basis(&c.alg, bidegree, ghost, bound)?;
    let up = slice_basis(&c.alg, bidegree, ghost + 1, bound)?;
    let down = slice_basis(&c.alg, bidegree, ghost - 1, bound)?;
    let empty = Vec::new();
    let blocks: Vec<(Vec<i32>, usize, Vec<GradedPoly>)> = here
        .par_iter()
        .map(|(w, basis)| {
            let tgt = up.get(w).unwrap_or(&empty);
            let src = down.get(w).unwrap_or(&empty);
            let dg = matrix_of(c, basis, tgt)?;
            let dprev = matrix_of(c, src, basis)?;
            let ker = linalg::kernel(&transpose(&dg, tgt.len()), basis.len());
            let mut span: Vec<Vec<BigRational>> = dprev.clone();
            let mut rank = linalg::rank(&span);
            let mut reps = Vec::new();
            for v in ker {
                span.push(v.clone());
                let r = linalg::rank(&span);
                if r > rank {
                    rank = r;
                    let terms = basis.iter().cloned().zip(v).filter(|(_, x)| !x.is_zero());
                    reps.push(GradedPoly::from_terms(&c.alg, terms));
                } else {
                    span.pop();
                }
            }
            Ok((w.clone(), reps.len(), reps))
        })
        .collect::<Result<_>>()?;
    let group = SoGroup::new(c.d)?;
    let mut dominant = Vec::new();
    let mut dimension = 0;
    let mut representatives = Vec::new();
    for (w, k, reps) in blocks {
        dimension += k;
        representatives.extend(reps);
        if k > 0 && w.iter().all(|&x| x >= 0) && w.windows(2).all(|p| p[0] >= p[1]) {
            dominant.push((w, k as i128));
        }
    }
    let rep = Character::from_dominant(group, dominant)?.decompose()?;
    if rep.dim() != dimension as i128 {
        return Err(Error::NotWeylInvariant);
    }
    Ok(CohomologyReport {
        bidegree,
        ghost,
        dimension,
        rep,
        representatives,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub m: u32,
    pub n: u32,
    pub ghost: i32,
    pub ledger: String,
    pub cohomology: String,
    pub agrees: bool,
}

/// For every ledger entry of stage `k + 1` (`k` = the complex's stage),
/// compares the cohomology at ghost number `-k` with the entry. A class of
/// parity `m - k` is killed by a ghost of the opposite parity, which enters
/// `Log Z` with sign `(-1)^(m - k + 1)`.
pub fn compare_with_series(c: &StagedComplex, ledger: &GhostLedger) -> Result<Vec<ComparisonRow>> {
    if ledger.d != c.d {
        return Err(Error::GroupMismatch(ledger.d, c.d));
    }
    let k = c.stage;
    let mut seen = Vec::new();
    for e in &ledger.entries {
        if e.stage == Some(k + 1) && !seen.contains(&(e.m, e.n)) {
            seen.push((e.m, e.n));
        }
    }
    seen.sort_by_key(|&(m, n)| (m + n, n));
    seen.into_iter()
        .map(|(m, n)| {
            let h = cohomology_at(c, (m, n), -(k as i32), SLICE_BOUND)?;
            let sign = if (m + 1 + k) % 2 == 0 { 1 } else { -1 };
            let expected = ledger.coeff(m, n);
            Ok(ComparisonRow {
                m,
                n,
                ghost: -(k as i32),
                ledger: expected.to_string(),
                cohomology: h.rep.to_string(),
                agrees: h.rep.scale(sign) == expected,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grading::parse_poly;
    use crate::pseries::Truncation;
    use crate::tate::{d1_table, log_exact};

    const METRICS: [Metric; 3] = [Metric::Euclidean, Metric::Minkowski, Metric::Split];

    #[test]
    fn images_at_d3() {
        let c = build_stage(3, 3, Metric::Euclidean).unwrap();
        let img = |s: &str, i: usize| c.apply(&c.var(s, i).unwrap()).unwrap();
        let p = |s: &str| parse_poly(&c.alg, s).unwrap();
        assert_eq!(img("beta'", 0), p("beta*theta_1*theta_2*theta_3"));
        assert_eq!(
            img("b'", 0),
            p("b*theta_1*theta_2*theta_3 - beta*(p_1*theta_2*theta_3 - p_2*theta_1*theta_3 + p_3*theta_1*theta_2)")
        );
        assert_eq!(img("beta''3", 1), p("theta_1*b' - 1/2*beta^2*theta_2*theta_3"));
        assert_eq!(img("b", 0), p("p_1^2 + p_2^2 + p_3^2"));
    }

    #[test]
    fn parities_follow_the_dimension() {
        for d in 1..=4usize {
            let c = build_stage(d, 3, Metric::Euclidean).unwrap();
            let par = |s: &str| c.alg.decl(c.alg.var_id(s).unwrap()).parity;
            let pd = Parity::from_int(d as i64);
            let pd1 = Parity::from_int(d as i64 + 1);
            assert_eq!(par("b"), Parity::Odd);
            assert_eq!(par("beta"), Parity::Even);
            assert_eq!(par("b'"), pd);
            assert_eq!(par("beta'"), pd1);
            assert_eq!([par("beta''1"), par("beta''2"), par("beta''3"), par("beta''4")], [pd1, pd, pd, pd1]);
            let bd = |s: &str| c.alg.decl(c.alg.var_id(s).unwrap()).bidegree;
            let di = d as i32;
            assert_eq!(bd("b'"), (di, 2));
            assert_eq!(bd("beta'"), (di + 1, 1));
            assert_eq!(bd("beta''1"), (di + 2, 1));
            assert_eq!(bd("beta''4"), (di, 3));
            assert_eq!(c.alg.decl(c.alg.var_id("beta''2").unwrap()).ghost_number, -3);
        }
    }

    #[test]
    fn nilpotent_under_every_metric() {
        for d in 1..=4 {
            for m in METRICS {
                for stage in 1..=3 {
                    let c = build_stage(d, stage, m).unwrap();
                    let r = check_nilpotent(&c).unwrap();
                    assert_eq!(r.entries.len(), c.alg.num_slots());
                }
                for (name, ok) in contraction_identities(d, m).unwrap() {
                    assert!(ok, "d={d} {m:?}: {name}");
                }
            }
        }
    }

    #[test]
    fn stage_errors() {
        assert_eq!(build_stage(3, 4, Metric::Split).unwrap_err(), Error::UnsupportedStage(4));
        assert!(matches!(build_stage(5, 1, Metric::Split), Err(Error::BruteForceTooLarge(_))));
        let c = build_stage(3, 1, Metric::Euclidean).unwrap();
        assert!(cohomology_at(&c, (4, 1), -1, 100).is_err());
        let c = build_stage(3, 1, Metric::Split).unwrap();
        let r = cohomology_at(&c, (3, 6), -1, 10);
        assert!(matches!(r, Err(Error::SliceTooLarge { .. })), "{r:?}");
    }

    #[test]
    fn stage_one_classes() {
        for d in 1..=3usize {
            let du = d as u32;
            let c = build_stage(d, 1, Metric::Split).unwrap();
            let g = SoGroup::new(d).unwrap();
            for bideg in [(du + 1, 1), (du, 2)] {
                let h = cohomology_at(&c, bideg, -1, SLICE_BOUND).unwrap();
                assert_eq!(h.dimension, 1, "d={d} {bideg:?}");
                assert_eq!(h.rep, VirtualRep::one(g));
                assert_eq!(h.representatives.len(), 1);
            }
        }
    }

    #[test]
    fn stage_two_vectors_then_killed() {
        for d in 1..=3usize {
            let du = d as u32;
            let c2 = build_stage(d, 2, Metric::Split).unwrap();
            let c3 = build_stage(d, 3, Metric::Split).unwrap();
            let v = VirtualRep::vector(SoGroup::new(d).unwrap());
            for (bideg, k) in [((du + 2, 1), 1), ((du + 1, 2), 2), ((du, 3), 1)] {
                let h = cohomology_at(&c2, bideg, -2, SLICE_BOUND).unwrap();
                assert_eq!(h.rep, v.scale(k), "d={d} {bideg:?}");
                assert_eq!(h.representatives.len(), d * k as usize);
                let h3 = cohomology_at(&c3, bideg, -2, SLICE_BOUND).unwrap();
                assert_eq!(h3.dimension, 0, "d={d} {bideg:?}");
            }
        }
    }

    #[test]
    fn series_comparison() {
        let led = d1_table(Truncation::new(4, 4)).unwrap();
        let c = build_stage(1, 1, Metric::Split).unwrap();
        let rows = compare_with_series(&c, &led).unwrap();
        let at: Vec<(u32, u32)> = rows.iter().map(|r| (r.m, r.n)).collect();
        assert_eq!(at, [(2, 1), (1, 2)]);
        assert!(rows.iter().all(|r| r.agrees), "{rows:?}");
        for d in [2usize, 3] {
            let du = d as u32;
            let led = log_exact(d, Truncation::new(du + 4, 4).with_total(du + 4)).unwrap();
            for stage in 1..=3 {
                let c = build_stage(d, stage, Metric::Split).unwrap();
                let rows = compare_with_series(&c, &led).unwrap();
                assert!(!rows.is_empty());
                assert!(rows.iter().all(|r| r.agrees), "d={d} stage {stage}: {rows:?}");
            }
        }
    }
}
