#![no_main]

use entroswarm::io::parse_metrics_jsonl;
use entroswarm::io::plots::phases_chart;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(events) = parse_metrics_jsonl(text) else { return };
    if let Ok(chart) = phases_chart(&events) {
        let _ = chart.render();
    }
});
