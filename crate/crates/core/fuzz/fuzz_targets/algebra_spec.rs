#![no_main]

use kt_core::bvjet::SuperAlgebraSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = SuperAlgebraSpec::parse(src) {
        let _ = spec.validate();
        let again = SuperAlgebraSpec::parse(&spec.to_text()).expect("printed form reparses");
        assert_eq!(spec.to_text(), again.to_text());
    }
});
