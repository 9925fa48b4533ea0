#![no_main]
use fiberpair::dispersion::SellmeierGlass;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(g) = SellmeierGlass::parse(text) {
            // whatever parses must survive a round trip
            let again = SellmeierGlass::parse(&g.to_text()).expect("round trip");
            assert_eq!(again.to_text(), g.to_text());
        }
    }
});
