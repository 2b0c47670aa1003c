#![no_main]

use entroswarm::io::parse_numeric_column;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(xs) = parse_numeric_column(text) {
            assert!(!xs.is_empty());
            assert!(xs.iter().all(|x| x.is_finite()));
        }
    }
});
