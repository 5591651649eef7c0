#![no_main]

use libfuzzer_sys::fuzz_target;
use ptmoments::io::parse_moment_list;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_moment_list(text) {
        assert!(!values.is_empty() && values.iter().all(|v| v.is_finite()));
    }
});
