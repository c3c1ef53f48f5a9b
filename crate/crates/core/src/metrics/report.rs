use serde::{Deserialize, Serialize};

use super::{b_iou, miou, mse, ssim, BinaryMask, MetricsError};
use crate::shadowcast::ShadeRaster;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordMetrics {
    pub ssim: f64,
    pub mse: f64,
    pub miou: f64,
    pub b_iou: f64,
}

/// Scores a predicted raster against a ground truth; masks are taken at
/// `gray > threshold`.
pub fn evaluate_pair(pred: &ShadeRaster, gt: &ShadeRaster, threshold: u8) -> Result<RecordMetrics, MetricsError> {
    let (mp, mg) = (BinaryMask::from_raster(pred, threshold), BinaryMask::from_raster(gt, threshold));
    Ok(RecordMetrics {
        ssim: ssim(pred, gt)?,
        mse: mse(pred, gt)?,
        miou: miou(&mp, &mg)?,
        b_iou: b_iou(&mp, &mg)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub ssim: MetricSummary,
    pub mse: MetricSummary,
    pub miou: MetricSummary,
    pub b_iou: MetricSummary,
}

fn summarize(values: impl Iterator<Item = f64> + Clone) -> MetricSummary {
    let n = values.clone().count();
    if n == 0 {
        return MetricSummary { mean: f64::NAN, std: f64::NAN };
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    MetricSummary { mean, std: var.sqrt() }
}

pub fn aggregate(records: &[RecordMetrics]) -> Aggregate {
    Aggregate {
        count: records.len(),
        ssim: summarize(records.iter().map(|r| r.ssim)),
        mse: summarize(records.iter().map(|r| r.mse)),
        miou: summarize(records.iter().map(|r| r.miou)),
        b_iou: summarize(records.iter().map(|r| r.b_iou)),
    }
}
