//! Scenario configs, the run loop, sweeps and the metrics computed from runs.

mod metrics;
mod run;
mod scenario;
mod summary;
mod sweep;

pub use metrics::*;
pub use run::{run_scenario, CrossingLog, Driver, ExitEvent, RobotSnap, RunReport, Snapshot};
pub use scenario::*;
pub use summary::{report_gate, scalar_metrics};
pub use sweep::{aggregate, apply_param, run_sweep, AggregateRow, SweepParam, SweepRow, SweepSpec};
