//! Shipped golden grids against the engine.

use std::path::PathBuf;

use kt_core::pseries::Truncation;
use kt_core::repring::SoGroup;
use kt_core::table::{parse_golden, Golden};
use kt_core::tate::{d1_table, log_exact, sheet2_residual, GhostLedger, Sheet};

fn golden(name: &str) -> Golden {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../tables").join(name);
    parse_golden(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn check(g: &Golden, led: &GhostLedger, keep: impl Fn(u32, u32) -> bool) {
    let grp = SoGroup::new(led.d).unwrap();
    let bad: Vec<_> = g
        .compare(grp, |m, n| led.coeff(m, n))
        .unwrap()
        .into_iter()
        .filter(|x| keep(x.m, x.n))
        .collect();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn d1_resolution_grid() {
    let g = golden("table3.tsv");
    let led = d1_table(Truncation::new(10, 10)).unwrap();
    check(&g, &led, |_, _| true);
    assert_eq!(g.expected(SoGroup::new(1).unwrap()).unwrap().len(), 11 * 12 / 2 + 10);
}

#[test]
fn residual_grids() {
    for (d, name) in [(3usize, "table2_odd.tsv"), (5, "table2_odd.tsv"), (4, "table2_even.tsv")] {
        let g = golden(name);
        let (mm, nn) = g.extent(d as u32);
        let r = sheet2_residual(d, Truncation::new(mm, nn)).unwrap();
        assert!(r.entries.iter().all(|e| e.sheet == Sheet::Two));
        check(&g, &r, |_, _| true);
    }
}

#[test]
fn stage_grid_at_d11() {
    let d = 11u32;
    let g = golden("table1.tsv");
    let (mm, nn) = g.extent(d);
    let led = log_exact(d as usize, Truncation::new(mm, nn).with_total(d + 7)).unwrap();
    check(&g, &led, |_, _| true);
}
