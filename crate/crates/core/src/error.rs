use std::path::PathBuf;

use thiserror::Error;

/// Errors from geometry construction and distance evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("latitude {0} outside [-90, 90]")]
    LatitudeOutOfRange(f64),
    #[error("longitude {0} outside [-180, 180]")]
    LongitudeOutOfRange(f64),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("line needs at least 2 vertices, got {0}")]
    LineTooShort(usize),
    #[error("line start and end vertex coincide")]
    LineClosed,
    #[error("consecutive duplicate vertex at position {0}")]
    RepeatedVertex(usize),
    #[error("polygon ring needs at least 4 vertices (closing vertex included), got {0}")]
    RingTooShort(usize),
    #[error("polygon ring is not closed")]
    RingNotClosed,
    #[error("polygon ring has zero area")]
    ZeroArea,
    #[error("vertex set is empty")]
    EmptyVertexSet,
}

/// Errors from building the frozen search structures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("duplicate object id `{0}`")]
    DuplicateId(String),
    #[error("search radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("object `{id}`: {source}")]
    Geometry {
        id: String,
        #[source]
        source: GeometryError,
    },
}

/// Errors from BM25 scoring primitives.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("average field length must be positive (empty corpus?)")]
    EmptyCorpus,
}

/// Invalid detector configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("epsilon_m must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("threshold must be non-negative and finite, got {0}")]
    Threshold(f64),
    #[error("weight for field `{0}` must be positive and finite")]
    Weight(String),
    #[error("no similarity fields configured")]
    NoFields,
    #[error("field `{0}` configured twice")]
    DuplicateField(String),
    #[error("bm25 parameter {0} out of range")]
    Bm25(&'static str),
    #[error("detector fields or text pipeline differ from those the index was built with")]
    IndexMismatch,
}

#[derive(Debug, Error)]
pub enum DetectError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Errors while reading or writing datasets and auxiliary files.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed document: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("{path}: feature {index}: unsupported geometry type `{kind}`")]
    UnsupportedGeometry { path: PathBuf, index: usize, kind: String },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("invalid schema mapping: {0}")]
    Mapping(String),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no labeled conflicts: recall is undefined")]
    NoTruth,
    #[error("ground truth lists new object `{0}` more than once")]
    DuplicateTruth(String),
    #[error("radius list must be non-empty and strictly ascending")]
    BadRadii,
    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}
