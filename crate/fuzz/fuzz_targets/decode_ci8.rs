#![no_main]

use libfuzzer_sys::fuzz_target;
use ultratight::signal::{decode_ci8, encode_ci8};

fuzz_target!(|data: &[u8]| {
    match decode_ci8(data) {
        Ok(samples) => assert_eq!(encode_ci8(&samples), data),
        Err(_) => assert!(data.len() % 2 == 1),
    }
});
