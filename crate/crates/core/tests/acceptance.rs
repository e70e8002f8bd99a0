//! Acceptance criteria, one verdict line each. Runs without the libtest
//! harness so the verdicts show in the test log; exits non-zero if any
//! criterion fails.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};

use kt_core::bvjet::{
    build_action, check_cocycle, closure_sides, find_primitive, master_check, spinning, ActionLevel, BvTheory,
    LocalFunctional, Primitive, PrimitiveBound, SuperAlgebraSpec,
};
use kt_core::grading::{GradedPoly, Metric};
use kt_core::ktcomplex::{build_stage, check_nilpotent, cohomology_at, contraction_identities, SLICE_BOUND};
use kt_core::lightcone::{brute_quotient_series, closed_form_series, support_report, BruteOptions};
use kt_core::pseries::{BiSeries, Truncation};
use kt_core::repring::{Diagram, SoGroup, VirtualRep};
use kt_core::table::{parse_golden, Golden};
use kt_core::tate::{d1_table, duality_check, log_exact, sheet2_residual, witt_counts, GhostLedger, WittSpec};

/// Coefficients are compared exactly everywhere.
const TOLERANCE: &str = "exact";
/// Random cases per property in criterion 10.
const PROPERTY_CASES: u32 = 200;
const PROPERTY_SEED: u64 = 0x5eed_0010;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn golden(name: &str) -> Golden {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../tables").join(name);
    parse_golden(&std::fs::read_to_string(p).expect("golden file")).expect("golden grid")
}

fn golden_misses(g: &Golden, led: &GhostLedger) -> usize {
    g.compare(led.group(), |m, n| led.coeff(m, n)).expect("golden cells parse").len()
}

fn c1_witt() -> Verdict {
    let spec = WittSpec::parse("even@1,even@1").unwrap();
    let w = witt_counts(&spec, Truncation::new(0, 5));
    let witt: Vec<i128> = (1..=5).map(|n| w.get(&(0, n)).copied().unwrap_or(0)).collect();
    let z = BiSeries::from_coeffs(&1i128, Truncation::new(0, 5), [((0, 0), 1), ((0, 1), -2)]);
    let log: Vec<i128> = z.plethystic_log().unwrap().t_coeffs()[1..].iter().map(|c| -c).collect();
    let want = vec![2, 1, 2, 3, 6];
    verdict(witt == want && log == want, format!("witt {witt:?}, -Log(1-2t) {log:?}"))
}

fn c2_d1_resolution() -> Verdict {
    let led = d1_table(Truncation::new(10, 10)).unwrap();
    let misses = golden_misses(&golden("table3.tsv"), &led);
    let spots = [((5, 3), 7), ((4, 4), -8), ((2, 9), 5)];
    let spots_ok = spots.iter().all(|&((m, n), v)| led.int_coeff(m, n) == v);
    let dual = duality_check(&d1_table(Truncation::new(11, 11).with_total(11)).unwrap());
    let sym: Vec<u32> = (1..=11).filter(|&k| dual.holds_on_diagonal(k)).collect();
    let ok = misses == 0 && spots_ok && sym == [1, 3, 4, 5, 7, 8, 9, 11];
    verdict(ok, format!("{misses} golden mismatches, spot cells ok = {spots_ok}, symmetric diagonals {sym:?}"))
}

fn c3_oracles() -> Verdict {
    let mut bad = Vec::new();
    for d in 1..=4usize {
        let trunc = Truncation::new(2 * d as u32 + 4, 8);
        let a = closed_form_series(d, trunc).unwrap();
        let b = brute_quotient_series(d, trunc, BruteOptions::default()).unwrap();
        if a != b {
            bad.push(d);
        }
    }
    verdict(bad.is_empty(), format!("closed form = brute force at (2d+4, 8) for d = 1..4; failing d: {bad:?}"))
}

fn c4_stage_grid() -> Verdict {
    let d = 11u32;
    let g = golden("table1.tsv");
    let (mm, nn) = g.extent(d);
    let led = log_exact(d as usize, Truncation::new(mm, nn).with_total(d + 7)).unwrap();
    let misses = golden_misses(&g, &led);
    let sign = if d % 2 == 1 { -1 } else { 1 };
    let mult = |m: u32, n: u32, lam: &Diagram| led.coeff(m, n).scale(sign).multiplicity(lam);
    let scalars = [mult(d + 1, 1, &Diagram::empty()), mult(d, 2, &Diagram::empty())];
    let vec = Diagram::new(vec![1]);
    let vectors = [mult(d + 2, 1, &vec), mult(d + 1, 2, &vec), mult(d, 3, &vec)];
    let ok = misses == 0 && scalars.map(i128::abs) == [1, 1] && vectors.map(i128::abs) == [1, 2, 1];
    verdict(
        ok,
        format!("d=11: {misses} golden mismatches; scalars {scalars:?}, vectors {vectors:?} (sign (-1)^d removed)"),
    )
}

fn c5_residuals() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (d, name) in [(3usize, "table2_odd.tsv"), (4, "table2_even.tsv")] {
        let g = golden(name);
        let du = d as u32;
        let (mm, nn) = g.extent(du);
        let r = sheet2_residual(d, Truncation::new(mm, nn)).unwrap();
        let misses = golden_misses(&g, &r);
        let grp = r.group();
        let staircase = r.coeff(2 * du + 2, 2);
        let expect = if d % 2 == 1 { VirtualRep::scalar(grp, -1) } else { VirtualRep::zero(grp) };
        ok &= misses == 0 && staircase == expect;
        parts.push(format!(
            "d={d}: {misses} mismatches, (2d+2,2) = {}, literal (2d,2) = {}",
            show(&staircase),
            show(&r.coeff(2 * du, 2))
        ));
    }
    verdict(ok, parts.join("; "))
}

fn show(v: &VirtualRep) -> String {
    if v.is_zero() {
        "0".into()
    } else {
        v.to_string()
    }
}

fn c6_support() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [2usize, 3] {
        let r = support_report(d, Truncation::new(2 * d as u32 + 4, 8)).unwrap();
        ok &= r.confined() && r.agrees_on_support();
        parts.push(format!(
            "d={d}: {} discrepancies, confined = {}, agrees on support = {}",
            r.entries.len(),
            r.confined(),
            r.agrees_on_support()
        ));
    }
    verdict(ok, parts.join("; "))
}

fn c7_kt() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for d in 1..=3usize {
        let du = d as u32;
        let g = SoGroup::new(d).unwrap();
        for stage in 1..=3 {
            for metric in [Metric::Euclidean, Metric::Minkowski, Metric::Split] {
                ok &= build_stage(d, stage, metric).and_then(|c| check_nilpotent(&c)).is_ok();
            }
        }
        for metric in [Metric::Euclidean, Metric::Minkowski, Metric::Split] {
            ok &= contraction_identities(d, metric).unwrap().iter().all(|x| x.1);
        }
        let c1 = build_stage(d, 1, Metric::Split).unwrap();
        for bideg in [(du + 1, 1), (du, 2)] {
            let h = cohomology_at(&c1, bideg, -1, SLICE_BOUND).unwrap();
            ok &= h.dimension == 1 && h.rep == VirtualRep::one(g);
        }
        let c2 = build_stage(d, 2, Metric::Split).unwrap();
        let mut quad = Vec::new();
        for (bideg, k) in [((du + 2, 1), 1), ((du + 1, 2), 2), ((du, 3), 1)] {
            let h = cohomology_at(&c2, bideg, -2, SLICE_BOUND).unwrap();
            ok &= h.rep == VirtualRep::vector(g).scale(k) && h.dimension == d * k as usize;
            quad.push(h.dimension / d);
        }
        notes.push(format!("d={d} vectors {quad:?}"));
    }
    verdict(ok, format!("nilpotent at stages 1..3 under three metrics, identities hold, scalar pair found; {}", notes.join(", ")))
}

fn particle(d: usize, extended: bool) -> BvTheory {
    BvTheory::new(SuperAlgebraSpec::spinning_particle(d).unwrap(), extended).unwrap()
}

fn c8_master() -> Verdict {
    let th = particle(3, false);
    let s = build_action(&th, ActionLevel::Two).unwrap();
    let plain = master_check(&th, &s).unwrap().is_zero();
    let ext = particle(3, true);
    let sp = build_action(&ext, ActionLevel::Prime).unwrap();
    let extended = master_check(&ext, &sp).unwrap().is_zero();
    let (l, r) = closure_sides(&th).unwrap();
    let closure = l == r && !l.is_zero();
    let bad = BvTheory::new(SuperAlgebraSpec::spinning_particle_corrupted(3).unwrap(), false).unwrap();
    let sb = build_action(&bad, ActionLevel::Two).unwrap();
    let residue = master_check(&bad, &sb).unwrap();
    let ok = plain && extended && closure && !residue.is_zero();
    verdict(
        ok,
        format!(
            "(S,S)=0: {plain}; (S',S')=0: {extended}; closure: {closure}; corrupted residue has {} terms",
            residue.integrand().terms().count()
        ),
    )
}

fn c9_cocycles() -> Verdict {
    let th = particle(3, false);
    let s = build_action(&th, ActionLevel::Two).unwrap();
    let ext = particle(3, true);
    let sp = build_action(&ext, ActionLevel::Prime).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    let cochains = |t: &BvTheory| {
        [
            ("zeta1", spinning::zeta(t, 1, &t.alg.one()).unwrap()),
            ("psi*Omega", spinning::psi_star_omega(t).unwrap()),
        ]
    };
    for (name, f) in cochains(&th) {
        let closed = check_cocycle(&th, &f, &s, true).unwrap().closed;
        let p = find_primitive(&th, &f, &s, true, PrimitiveBound::around(&f)).unwrap();
        ok &= closed && !p.is_exact();
        notes.push(format!("{name} closed={closed} exact={}", p.is_exact()));
    }
    for (name, f) in cochains(&ext) {
        let closed = check_cocycle(&ext, &f, &sp, true).unwrap().closed;
        match find_primitive(&ext, &f, &sp, true, PrimitiveBound::around(&f)).unwrap() {
            Primitive::Exact(g) => {
                let back = ext.ideal_reduce(&ext.differential(&sp).apply(&g).unwrap());
                ok &= closed && back == f;
                notes.push(format!("extended {name} = s({g})"));
            }
            Primitive::NotExact { .. } => {
                ok = false;
                notes.push(format!("extended {name} not exact"));
            }
        }
    }
    for k in 1..=2 {
        ok &= th.ideal_reduce(&spinning::alpha(&th, k).unwrap()).is_zero();
    }
    notes.push("alpha_1, alpha_2 reduce to 0".into());
    verdict(ok, notes.join("; "))
}

struct BracketFixture {
    th: BvTheory,
    slots: Vec<u32>,
}

fn bracket_fixture() -> &'static BracketFixture {
    static F: OnceLock<BracketFixture> = OnceLock::new();
    F.get_or_init(|| {
        let th = BvTheory::with_jets(SuperAlgebraSpec::spinning_particle(1).unwrap(), false, 8).unwrap();
        let slots = (0..th.alg.num_slots() as u32).filter(|&s| th.alg.slot_info(s).deriv <= 1).collect();
        BracketFixture { th, slots }
    })
}

fn arb_functional() -> impl Strategy<Value = LocalFunctional> {
    let n = bracket_fixture().slots.len();
    prop::collection::vec((prop::collection::vec(0..n, 1..=3), prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3])), 1..=3)
        .prop_map(|terms| {
            let fx = bracket_fixture();
            let mut out = fx.th.alg.zero();
            for (picks, c) in terms {
                let mut m = fx.th.alg.one();
                for i in picks {
                    m = &m * &GradedPoly::slot(&fx.th.alg, fx.slots[i]);
                }
                out = out + m.scale_int(c);
            }
            let first = out.terms().next().map(|(m, _)| m.parity(&fx.th.alg));
            if let Some(p) = first {
                out = out.filter(|m| m.parity(&fx.th.alg) == p);
            }
            fx.th.functional(out).unwrap()
        })
}

fn arb_unit_series() -> impl Strategy<Value = BiSeries<i128>> {
    prop::collection::vec(((0u32..4, 0u32..4), -3i128..4), 0..8).prop_map(|v| {
        let mut z = BiSeries::from_coeffs(&1, Truncation::new(3, 3), v);
        z.set(0, 0, 1);
        z
    })
}

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: PROPERTY_CASES,
        rng_seed: RngSeed::Fixed(PROPERTY_SEED),
        failure_persistence: None,
        ..Config::default()
    })
}

fn odd(f: &LocalFunctional) -> bool {
    f.parity().is_some_and(|p| p.is_odd())
}

fn c10_properties() -> Verdict {
    let mut results = Vec::new();
    results.push((
        "Exp(Log Z) = Z",
        runner().run(&arb_unit_series(), |z| {
            prop_assert_eq!(z.plethystic_log().unwrap().plethystic_exp().unwrap(), z);
            Ok(())
        })
        .map_err(|e| e.to_string()),
    ));
    results.push((
        "Log(AB) = Log A + Log B",
        runner().run(&(arb_unit_series(), arb_unit_series()), |(a, b)| {
            let lhs = a.mul(&b).plethystic_log().unwrap();
            prop_assert_eq!(lhs, a.plethystic_log().unwrap().add(&b.plethystic_log().unwrap()));
            Ok(())
        })
        .map_err(|e| e.to_string()),
    ));
    let th = &bracket_fixture().th;
    results.push((
        "graded antisymmetry",
        runner().run(&(arb_functional(), arb_functional()), |(f, g)| {
            let fg = th.antibracket(&f, &g).unwrap();
            let gf = th.antibracket(&g, &f).unwrap();
            let both_even = !odd(&f) && !odd(&g);
            prop_assert_eq!(fg, if both_even { gf } else { gf.neg() });
            Ok(())
        })
        .map_err(|e| e.to_string()),
    ));
    results.push((
        "graded Jacobi",
        runner().run(&(arb_functional(), arb_functional(), arb_functional()), |(f, g, h)| {
            let lhs = th.antibracket(&f, &th.antibracket(&g, &h).unwrap()).unwrap();
            let r1 = th.antibracket(&th.antibracket(&f, &g).unwrap(), &h).unwrap();
            let r2 = th.antibracket(&g, &th.antibracket(&f, &h).unwrap()).unwrap();
            let both_even = !odd(&f) && !odd(&g);
            prop_assert_eq!(lhs, r1.add(&if both_even { r2.neg() } else { r2 }));
            Ok(())
        })
        .map_err(|e| e.to_string()),
    ));
    let ok = results.iter().all(|r| r.1.is_ok());
    let parts: Vec<String> = results
        .iter()
        .map(|(name, r)| match r {
            Ok(()) => format!("{name} ok"),
            Err(e) => format!("{name} FAILED: {e}"),
        })
        .collect();
    verdict(ok, format!("{PROPERTY_CASES} cases each, seed {PROPERTY_SEED:#x}: {}", parts.join(", ")))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Verdict); 10] = [
        ("1 free Lie exponents of 1 - 2t", 1, c1_witt),
        ("2 d = 1 resolution grid and diagonal symmetry", 5, c2_d1_resolution),
        ("3 closed form equals brute force", 120, c3_oracles),
        ("4 stage 2-4 grid at d = 11", 600, c4_stage_grid),
        ("5 sheet-two residuals at d = 3, 4", 600, c5_residuals),
        ("6 sheet-one support at d = 2, 3", 300, c6_support),
        ("7 Koszul-Tate differential at d = 1..3", 300, c7_kt),
        ("8 BV master equation at d = 3", 120, c8_master),
        ("9 worldline cocycles at d = 3", 120, c9_cocycles),
        ("10 property suites", 120, c10_properties),
    ];
    println!("acceptance: tolerance {TOLERANCE}");
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let t = Instant::now();
        let v = f();
        let dt = t.elapsed();
        let timely = dt <= Duration::from_secs(budget);
        let pass = v.ok && timely;
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {name}: {} ({:.2}s of {budget}s budget)",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            dt.as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
