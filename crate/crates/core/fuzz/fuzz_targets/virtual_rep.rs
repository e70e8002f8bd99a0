#![no_main]

use kt_core::repring::{SoGroup, VirtualRep};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&d, rest)) = data.split_first() else { return };
    let Ok(group) = SoGroup::new(1 + d as usize % 12) else { return };
    let Ok(src) = std::str::from_utf8(rest) else { return };
    if let Ok(r) = VirtualRep::parse(group, src) {
        let again = VirtualRep::parse(group, &r.to_string()).expect("printed form reparses");
        assert_eq!(r, again);
    }
});
