//! Load generation and latency metrics for threshold clusters.

pub mod emit;
pub mod error;
pub mod metrics;
pub mod plan;
pub mod remote;
pub mod report;
pub mod samples;
pub mod sim;

pub use emit::{emit_report, METRICS_HEADER};
pub use error::BenchError;
pub use plan::{CostModel, ExperimentPlan};
pub use report::{analyze_run, build_report, Capacity, MetricsReport, MetricsRow, NodeScope};
pub use samples::{LatencySample, Recording, RunResult};
pub use sim::{deal_for, run_plan, run_point, RunSpec, SchemeKeys};
