//! Dataset records, edge conditioning, contrastive pairs and the grouped
//! train/test split.

mod builder;
mod canny;
mod conditioning;
mod pairs;
mod split;

pub use builder::{
    build_dataset, load_manifest, load_pairs, load_scenes, verify_manifest, BuildOptions, BuildSummary, GridSpec,
    Location, PromptChoice, MANIFEST_FILE, PAIRS_FILE,
};
pub use canny::{canny_edges, CannyParams};
pub use conditioning::{build_conditioning, split_conditioning, ConditioningTensor};
pub use pairs::{build_pair_buffer, label_pair, ContrastiveConfig, ContrastivePair};
pub use split::{split_dataset, Split, DEFAULT_TRAIN_FRACTION};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::IngestError;
use crate::shadowcast::ShadowError;
use crate::solar::{SolarError, SunPosition, TextPrompt, TimeStamp};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("no records")]
    Empty,
    #[error("a grouped split needs at least 2 locations, found {0}")]
    TooFewLocations(usize),
    #[error("record {0} already has a split")]
    AlreadySplit(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Solar(#[from] SolarError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// One manifest line. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub record_id: String,
    pub location_id: String,
    pub x_shade_path: String,
    pub x_sk_path: String,
    pub x_gt_path: String,
    pub x_sat_path: Option<String>,
    pub prompt: TextPrompt,
    pub theta_sun: SunPosition<f64>,
    pub t_day: TimeStamp,
    pub split: Option<Split>,
}

#[cfg(test)]
pub(crate) fn test_record(location: &str, hour: u32) -> DatasetRecord {
    use crate::solar::{format_prompt, sun_position, PromptTemplate, SolarOptions};
    let t = TimeStamp::new(2024, 6, 1, hour as f64, -7.0).unwrap();
    let sun = sun_position(33.42, -111.93, &t, SolarOptions::default());
    DatasetRecord {
        record_id: format!("{location}_{hour:02}"),
        location_id: location.to_string(),
        x_shade_path: String::new(),
        x_sk_path: String::new(),
        x_gt_path: String::new(),
        x_sat_path: None,
        prompt: format_prompt(&sun, &t, PromptTemplate::Angle),
        theta_sun: sun,
        t_day: t,
        split: None,
    }
}
