//! Image metrics, mask metrics and the contrastive loss terms.

mod contrastive;
mod pixel;
mod mask;
mod report;

pub use pixel::{mse, ssim, ssim_with, SsimParams};
pub use contrastive::{
    contrastive_loss, cross_similarity, info_nce, reference_embedding, similarity_matrix, total_loss, EmbeddingBatch,
    LossTerms, SimilarityMatrix, REFERENCE_POOL,
};
pub use mask::{b_iou, boundary, dilate, erode, miou, BinaryMask, DEFAULT_GRAY_THRESHOLD};
pub use report::{aggregate, evaluate_pair, Aggregate, MetricSummary, RecordMetrics};

use thiserror::Error;

use crate::shadowcast::ShadeRaster;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("image {width}x{height} smaller than the {window}px window")]
    TooSmall { width: usize, height: usize, window: usize },
    #[error("embedding {0} is the zero vector")]
    ZeroVector(usize),
    #[error("non-finite value at {0}")]
    NonFinite(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Slot for externally supplied perceptual metrics (e.g. a network-based
/// distance). Nothing in this crate implements it.
pub trait PerceptualMetric {
    fn name(&self) -> &str;
    fn perceptual(&self, a: &ShadeRaster, b: &ShadeRaster) -> Result<f64, MetricsError>;
}

pub(crate) fn same_dims(a: (usize, usize), b: (usize, usize)) -> Result<(), MetricsError> {
    if a != b {
        return Err(MetricsError::DimensionMismatch(a.0, a.1, b.0, b.1));
    }
    Ok(())
}
