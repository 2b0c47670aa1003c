#![no_main]

use entroswarm::io::plots::{pv_chart, scaling_chart};
use entroswarm::io::parse_summary_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(table) = parse_summary_csv(text) else { return };
    for chart in [pv_chart(&table), scaling_chart(&table)].into_iter().flatten() {
        let _ = chart.render();
    }
});
