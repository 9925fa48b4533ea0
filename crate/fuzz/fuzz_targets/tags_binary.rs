#![no_main]
use fiberpair::tags::{parse_tags, write_binary, DEFAULT_CHANNELS};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = parse_tags(data, &DEFAULT_CHANNELS) {
        let back = parse_tags(&write_binary(&s), &DEFAULT_CHANNELS).expect("re-read");
        assert_eq!(back.records(), s.records());
    }
});
