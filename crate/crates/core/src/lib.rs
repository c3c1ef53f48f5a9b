//! Analytic shade simulation for city scenes: sun position, building shadow
//! rasters, shade datasets with contrastive pairs, evaluation metrics and
//! shade-aware routing.
//!
//! The numeric kernels are generic over [`num::Scalar`]; the aliases below
//! fix the scalar type for the common cases.

pub mod dataset;
pub mod ingest;
pub mod metrics;
pub mod num;
pub mod pipeline;
pub mod routing;
pub mod shadowcast;
pub mod solar;

pub use ingest::{BuildingFootprint, GeoPoint, Scene};
pub use routing::{RoadGraph, RoutePlan, RouteRequest};
pub use shadowcast::{ShadeRaster, SimConfig};
pub use solar::{TextPrompt, TimeStamp};

pub type SunPosition = solar::SunPosition<f64>;
pub type SunPosition32 = solar::SunPosition<f32>;
pub type EmbeddingBatch = metrics::EmbeddingBatch<f64>;
pub type EmbeddingBatch32 = metrics::EmbeddingBatch<f32>;
pub type SimilarityMatrix = metrics::SimilarityMatrix<f64>;
pub type SimilarityMatrix32 = metrics::SimilarityMatrix<f32>;
pub type LossTerms = metrics::LossTerms<f64>;
pub type LossTerms32 = metrics::LossTerms<f32>;
