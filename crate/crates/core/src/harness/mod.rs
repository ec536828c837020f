//! Configuration-driven runs: simulation, trace analysis, sweeps and
//! calibration, with report and figure-data output.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod sweep;

pub use config::ExperimentConfig;
pub use pipeline::{
    analyze_frame, analyze_traces, calibrate, calibrate_from_traces, model_point, simulate,
    FrameRecord, ModelPoint, RunOptions, RunOutput,
};
pub use report::{summarize, write_reports, RunSummary};
pub use sweep::{sweep, SweepAxis, SweepReport};
