//! End-to-end steps shared by the CLI and the HTTP service.

mod demo;
mod evaluate;
mod shade;

pub use demo::{campus_scene, run_demo, DemoConfig, DemoOutput, CAMPUS_BUILDINGS, CAMPUS_ROADS};
pub use evaluate::{evaluate_dirs, EvaluationReport, ScoredRecord};
pub use shade::{compute_shade, load_graph, plan_on_shade, ShadeProduct, ShadeSettings};

use thiserror::Error;

use crate::dataset::DatasetError;
use crate::ingest::IngestError;
use crate::metrics::MetricsError;
use crate::routing::RoutingError;
use crate::shadowcast::ShadowError;
use crate::solar::SolarError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Solar(#[from] SolarError),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
