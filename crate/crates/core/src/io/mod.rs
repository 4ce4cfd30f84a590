//! Input documents and output artefacts.

mod documents;
mod export;

pub use documents::{parse_config, parse_task, ConfigDocument, SCHEMA_VERSION};
pub use export::{
    export_plot_data, mission_summary, write_events, write_trajectory, ExportError, MissionSummary, PlotKind,
    TRAJECTORY_COLUMNS,
};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("missing field {0}")]
    MissingField(String),
    #[error("unsupported schema_version {found} (expected {expected})")]
    UnsupportedSchema { found: u32, expected: u32 },
    #[error("field {field} out of range: {reason}")]
    Range { field: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}
