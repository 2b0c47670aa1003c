#![no_main]

use entroswarm::experiments::ScenarioSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = ScenarioSpec::from_toml(text) else { return };
    if spec.validate().is_err() {
        return;
    }
    // whatever parses and validates must survive a round trip
    let back = ScenarioSpec::from_toml(&spec.to_toml().expect("valid spec serializes")).expect("round trip parses");
    assert_eq!(back.digest(), spec.digest());
});
