#![no_main]

use kt_core::tate::WittSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(src) = std::str::from_utf8(data) {
        let _ = WittSpec::parse(src);
    }
});
