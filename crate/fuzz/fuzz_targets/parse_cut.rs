#![no_main]

use libfuzzer_sys::fuzz_target;
use ptmoments::io::parse_cut;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sites) = parse_cut(text) {
        assert!(!sites.is_empty());
        assert!(sites.windows(2).all(|w| w[0] < w[1]));
    }
});
