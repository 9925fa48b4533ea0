#![no_main]
use fiberpair::profile::TaperProfile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = TaperProfile::parse("fuzz", text) {
            let _ = p.segment(7);
            let _ = p.diameter_at(0.5 * (p.z_range().0 + p.z_range().1));
        }
    }
});
