//! Dataset ingestion, configuration and batch runs.

mod config;
mod dataset;
mod pipeline;

pub use config::PipelineConfig;
pub use dataset::{list_images, load_dataset, DatasetIndex, Record};
pub use pipeline::{
    emit_report, evaluate_directories, quality_maps, run_pipeline, write_json, Failure,
    ReportFormat, RunOutcome,
};
