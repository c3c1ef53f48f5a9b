//! HTTP service and command-line front end for the shade engine.

pub mod api;
pub mod cache;
pub mod cli;
mod error;
pub mod store;

pub use api::{router, AppState, DEFAULT_CACHE_SIZE};
pub use error::ServiceError;
