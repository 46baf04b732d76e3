//! Analytics engine for national wind (and blended wind + solar) capacity
//! factors: ingestion into immutable snapshots, choropleth and profile
//! aggregates, low-wind-power event detection, cross-country correlation
//! and climate-index / price overlays.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the service uses.

pub mod analytics;
pub mod calendar;
pub mod datastore;
mod error;
pub mod lwp;
pub mod scalar;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Snapshot = datastore::DatasetSnapshot<f64>;
pub type Snapshot32 = datastore::DatasetSnapshot<f32>;
pub type Series = datastore::HourlySeries<f64>;
pub type Weights = analytics::MixWeights<f64>;
pub type Threshold = lwp::LwpThreshold<f64>;
pub type Correlation = stats::CorrelationEntry<f64>;
