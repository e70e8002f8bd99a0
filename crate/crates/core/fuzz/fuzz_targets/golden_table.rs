#![no_main]

use kt_core::repring::SoGroup;
use kt_core::table::parse_golden;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_golden(src) {
        for d in [1, 3, 4] {
            let _ = g.extent(d);
            let _ = g.expected(SoGroup::new(d as usize).unwrap());
        }
    }
});
