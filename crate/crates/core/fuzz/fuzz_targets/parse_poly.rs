#![no_main]

use std::sync::OnceLock;

use kt_core::bvjet::{BvTheory, SuperAlgebraSpec};
use libfuzzer_sys::fuzz_target;

fn theory() -> &'static BvTheory {
    static T: OnceLock<BvTheory> = OnceLock::new();
    T.get_or_init(|| BvTheory::new(SuperAlgebraSpec::spinning_particle(2).unwrap(), true).unwrap())
}

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(f) = theory().parse(src) {
        // printing and reparsing must be stable
        let again = theory().parse(&f.to_string()).expect("printed form reparses");
        assert_eq!(f, again);
    }
});
