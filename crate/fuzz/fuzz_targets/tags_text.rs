#![no_main]
use fiberpair::tags::{parse_text, DEFAULT_CHANNELS};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(s) = parse_text(text, &DEFAULT_CHANNELS) {
            assert!(s.records().windows(2).all(|w| w[0] <= w[1]));
        }
    }
});
