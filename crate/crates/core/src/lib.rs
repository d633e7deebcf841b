//! Conflict detection for merging a new geospatial dataset into an existing one.
//!
//! Each incoming object is compared with the existing objects inside a
//! search radius. Candidates are ranked by a per-field BM25 text score plus
//! an inverse-distance boost; the best candidate above the threshold is
//! reported as a conflict and classified.
//!
//! Module map:
//! - [`geo`]: geometry types, centroids, point and shape distances.
//! - [`spatial`]: frozen uniform grid for exact radius queries.
//! - [`text`]: tokenizer, stopwords and the Porter stemmer.
//! - [`similarity`]: BM25 corpus statistics, distance boost, containment baseline.
//! - [`engine`]: the detection pipeline and conflict classification.
//! - [`ingest`]: GeoJSON and CSV readers and writers.
//! - [`eval`]: precision/recall scoring, radius sweeps, synthetic benchmarks.

pub mod engine;
pub mod error;
pub mod eval;
pub mod geo;
pub mod ingest;
pub mod similarity;
pub mod spatial;
pub mod text;

pub use engine::{
    check_internal_consistency, classify, detect, detect_baseline, Category, ConflictReport, DetectorConfig,
    FieldWeight, GeoObject, SystemIndex,
};
pub use geo::{centroid, geo_distance, GeoLine, GeoPoint, GeoPolygon, Geometry};
