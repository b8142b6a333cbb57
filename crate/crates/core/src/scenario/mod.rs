//! Experiment definitions, the run loop and post-processing.

mod bench;
mod config;
mod fd;
mod ring;
mod run;

pub use bench::{benchmark_cpu, BenchRow};
pub use config::{Derived, ModelKind, ScenarioConfig, Scheme, Spacing, Span};
pub use fd::{fundamental_diagram, mean_bin_spread, FdPoint};
pub use ring::{run_ring, RingConfig, RingLog, RingSample};
pub use run::{build_scenario, run, RunLog, Snapshot, VehicleRecord};
