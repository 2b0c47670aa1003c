#![no_main]

use entroswarm::experiments::SweepSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(s) = SweepSpec::from_toml(text) {
            assert!(!s.values.is_empty() && !s.seeds.is_empty());
        }
    }
});
