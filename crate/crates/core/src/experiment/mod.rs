//! End-to-end experiments: configuration, the single-run pipeline, and
//! parameter sweeps.

mod config;
mod pipeline;
mod sweep;

pub use config::{
    resolve_out_dir, DataConfig, DataSource, ExperimentConfig, ForgetConfig, Method, ModelConfig, OutputConfig,
    TrainSection, UnlearnSection, DEFAULT_OUT_DIR, OUT_ENV,
};
pub use pipeline::{
    artifact, evaluate, files, load_data, method_label, run_pipeline, select_forget, split_data, train_on,
    unlearn_model, PipelineOutcome, PipelineReport,
};
pub use sweep::{expand, sweep, SweepAxes, SweepRow, SWEEP_CSV};
