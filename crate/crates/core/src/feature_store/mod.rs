//! Feature interchange: FMAP files, per-illustration pyramids, manuscript
//! manifests and synthetic fixtures.

mod manifest;
mod map;
mod pyramid;
mod synth;

use std::path::PathBuf;

use thiserror::Error;

pub use manifest::{
    load_feature_map, load_manuscript, save_manuscript, IllustrationEntry, Manifest,
};
pub use map::{
    read_feature_map, write_feature_map, FeatureMap, FMAP_HEADER_LEN, FMAP_MAGIC, FMAP_VERSION,
};
pub use pyramid::{FeaturePyramid, ManuscriptFeatures, DEFAULT_SCALE_TAGS};
pub use synth::{
    grid_for_tag, local_permutation, random_permutation, render_pyramid, synth_manuscripts,
    SynthSpec, SyntheticField,
};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}, expected \"FMAP\"")]
    BadMagic([u8; 4]),
    #[error("unsupported FMAP version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("truncated {section}: expected {expected} bytes, got {actual}")]
    Truncated {
        section: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("invalid dimensions {height}x{width}x{channels}")]
    EmptyDimension {
        height: usize,
        width: usize,
        channels: usize,
    },
    #[error("data length {actual} does not match shape ({expected})")]
    DataLength { expected: usize, actual: usize },
    #[error("{illustration}: map {height}x{width} does not match scale tag {scale_tag}")]
    ShapeMismatch {
        illustration: String,
        scale_tag: u32,
        height: usize,
        width: usize,
    },
    #[error("{illustration}: {found} channels, expected {expected}")]
    ChannelMismatch {
        illustration: String,
        expected: usize,
        found: usize,
    },
    #[error("{illustration}: scale tags {tags:?} are not strictly increasing")]
    ScaleOrder {
        illustration: String,
        tags: Vec<u32>,
    },
    #[error("{illustration}: fixed map {height}x{width} is not square")]
    FixedMapNotSquare {
        illustration: String,
        height: usize,
        width: usize,
    },
    #[error("duplicate illustration id {0:?}")]
    DuplicateIllustration(String),
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<FeatureError>,
    },
    #[error("manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("scale key {0:?} is not an integer")]
    InvalidScaleKey(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl FeatureError {
    /// The underlying error with file context stripped.
    pub fn kind(&self) -> &FeatureError {
        match self {
            FeatureError::File { source, .. } => source.kind(),
            other => other,
        }
    }
}
