//! Text formats for runs and sweeps: snapshots and summary CSV, the
//! metrics event log, and SVG plots.
//!
//! Every float is written with 9 significant digits in its shortest form,
//! so identical runs give identical bytes.

mod events;
pub mod plots;
pub mod svg;
mod tables;

pub use events::{metrics_events, metrics_jsonl, parse_metrics_jsonl};
pub use tables::{
    parse_numeric_column, parse_snapshots_csv, parse_summary_csv, snapshots_csv, summary_csv, SnapshotRow,
    SummaryTable, SNAPSHOT_HEADER,
};

/// `x` rounded to 9 significant digits.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// `x` to 9 significant digits, shortest representation.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round9(x);
    // -0 and 0 print the same
    if r == 0.0 {
        return "0".into();
    }
    format!("{r}")
}
