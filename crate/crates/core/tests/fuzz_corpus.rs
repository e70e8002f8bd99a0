//! Replays the fuzz corpus and every prefix of each seed through the parsers.

use std::path::PathBuf;

use kt_core::bvjet::{BvTheory, SuperAlgebraSpec};
use kt_core::repring::{SoGroup, VirtualRep};
use kt_core::table::parse_golden;
use kt_core::tate::WittSpec;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(!files.is_empty(), "{}", dir.display());
    files.iter().map(|p| std::fs::read(p).unwrap()).collect()
}

fn prefixes(data: &[u8]) -> impl Iterator<Item = &str> {
    let s = std::str::from_utf8(data).unwrap();
    (0..=s.len()).filter(|&i| s.is_char_boundary(i)).map(move |i| &s[..i])
}

#[test]
fn poly_roundtrip() {
    let th = BvTheory::new(SuperAlgebraSpec::spinning_particle(2).unwrap(), true).unwrap();
    for seed in seeds("parse_poly") {
        let full = th.parse(std::str::from_utf8(&seed).unwrap());
        assert!(full.is_ok(), "{:?}", String::from_utf8_lossy(&seed));
        for src in prefixes(&seed) {
            if let Ok(f) = th.parse(src) {
                assert_eq!(th.parse(&f.to_string()).unwrap(), f, "{src:?}");
            }
        }
    }
}

#[test]
fn virtual_rep_roundtrip() {
    for seed in seeds("virtual_rep") {
        let g = SoGroup::new(1 + seed[0] as usize % 12).unwrap();
        assert!(VirtualRep::parse(g, std::str::from_utf8(&seed[1..]).unwrap()).is_ok());
        for src in prefixes(&seed[1..]) {
            if let Ok(r) = VirtualRep::parse(g, src) {
                assert_eq!(VirtualRep::parse(g, &r.to_string()).unwrap(), r, "{src:?}");
            }
        }
    }
}

#[test]
fn witt_spec_prefixes() {
    for seed in seeds("witt_spec") {
        assert!(WittSpec::parse(std::str::from_utf8(&seed).unwrap()).is_ok());
        for src in prefixes(&seed) {
            let _ = WittSpec::parse(src);
        }
    }
}

#[test]
fn algebra_spec_roundtrip() {
    for seed in seeds("algebra_spec") {
        let text = std::str::from_utf8(&seed).unwrap();
        assert_eq!(SuperAlgebraSpec::parse(text).unwrap().to_text(), text);
        for src in prefixes(&seed) {
            if let Ok(spec) = SuperAlgebraSpec::parse(src) {
                let _ = spec.validate();
                let again = SuperAlgebraSpec::parse(&spec.to_text()).unwrap();
                assert_eq!(again.to_text(), spec.to_text());
            }
        }
    }
}

#[test]
fn golden_prefixes() {
    for seed in seeds("golden_table") {
        assert!(parse_golden(std::str::from_utf8(&seed).unwrap()).is_ok());
        for src in prefixes(&seed).step_by(7) {
            if let Ok(g) = parse_golden(src) {
                for d in [1, 3, 4] {
                    let _ = g.extent(d);
                    let _ = g.expected(SoGroup::new(d as usize).unwrap());
                }
            }
        }
    }
}
