use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::ingest::GeoBounds;
use crate::metrics::{aggregate, evaluate_pair, Aggregate, RecordMetrics};
use crate::shadowcast::{RasterGrid, RasterKind, ShadeRaster};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    /// Path relative to the ground-truth directory.
    pub name: String,
    #[serde(flatten)]
    pub metrics: RecordMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub records: Vec<ScoredRecord>,
    /// Ground-truth files without a prediction.
    pub missing: Vec<String>,
    pub aggregate: Aggregate,
}

fn pngs(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            pngs(root, &path, out)?;
        } else if path.extension().is_some_and(|e| e == "png") {
            out.push(path.strip_prefix(root).expect("under root").to_path_buf());
        }
    }
    Ok(())
}

fn load_gray(path: &Path) -> Result<ShadeRaster, PipelineError> {
    let img = image::open(path).map_err(crate::shadowcast::ShadowError::from)?.into_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    // geometry is irrelevant for scoring; a unit box keeps the raster valid
    let bounds = GeoBounds {
        min_lon: 0.0,
        min_lat: 0.0,
        max_lon: 1.0,
        max_lat: 1.0,
    };
    Ok(ShadeRaster::new(RasterGrid::new(bounds, w, h), RasterKind::ShadedSnapshot, img.into_raw())?)
}

/// Scores every PNG under `gt_dir` against the file at the same relative path
/// under `pred_dir`. Masks are taken at `gray > threshold`.
pub fn evaluate_dirs(pred_dir: &Path, gt_dir: &Path, threshold: u8) -> Result<EvaluationReport, PipelineError> {
    let mut names = Vec::new();
    pngs(gt_dir, gt_dir, &mut names)?;
    names.sort();
    let (present, missing): (Vec<PathBuf>, Vec<PathBuf>) = names.into_iter().partition(|n| pred_dir.join(n).is_file());
    let records = present
        .par_iter()
        .map(|name| {
            let gt = load_gray(&gt_dir.join(name))?;
            let pred = load_gray(&pred_dir.join(name))?;
            Ok(ScoredRecord {
                name: name.to_string_lossy().replace('\\', "/"),
                metrics: evaluate_pair(&pred, &gt, threshold)?,
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let metrics: Vec<RecordMetrics> = records.iter().map(|r| r.metrics).collect();
    Ok(EvaluationReport {
        aggregate: aggregate(&metrics),
        records,
        missing: missing.iter().map(|n| n.to_string_lossy().replace('\\', "/")).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::DEFAULT_GRAY_THRESHOLD;

    fn write(dir: &Path, name: &str, px: Vec<u8>) {
        let path = dir.join(name);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        let img = image::GrayImage::from_raw(16, 16, px).unwrap();
        img.save(path).unwrap();
    }

    #[test]
    fn identical_dirs_score_perfectly() {
        let gt = tempfile::tempdir().unwrap();
        let pred = tempfile::tempdir().unwrap();
        let square: Vec<u8> = (0..256).map(|i| if (i % 16) > 4 && (i / 16) > 6 { 255 } else { 0 }).collect();
        for dir in [gt.path(), pred.path()] {
            write(dir, "a/x_gt.png", square.clone());
            write(dir, "b.png", vec![0; 256]);
        }
        write(gt.path(), "c.png", vec![255; 256]);
        let report = evaluate_dirs(pred.path(), gt.path(), DEFAULT_GRAY_THRESHOLD).unwrap();
        assert_eq!(report.records.len(), 2);
        assert_eq!(report.missing, vec!["c.png".to_string()]);
        assert_eq!(report.records[0].name, "a/x_gt.png");
        assert_eq!(report.aggregate.mse.mean, 0.0);
        assert_eq!(report.aggregate.miou.mean, 1.0);
        assert_eq!(report.aggregate.b_iou.mean, 1.0);
        assert!((report.aggregate.ssim.mean - 1.0).abs() < 1e-12);
    }
}
