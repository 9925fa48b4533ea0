#![no_main]
use fiberpair::rates::{fit_power_scan, parse_power_scan, Weighting};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(points) = parse_power_scan(text) {
            let _ = fit_power_scan(&points, Weighting::Unweighted);
        }
    }
});
