#![no_main]

use libfuzzer_sys::fuzz_target;
use ultratight::signal::RawSidecar;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = RawSidecar::from_json(text) {
        let back = RawSidecar::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
});
