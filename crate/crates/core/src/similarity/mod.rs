//! Image similarities between illustration feature pyramids: global feature
//! cosine, reciprocal local matching with a displacement penalty, and a
//! transformation-aware variant that scores residuals to a RANSAC affine fit.

mod config;
mod features;
mod matching;
mod pairwise;
mod ransac;
mod trans;

use thiserror::Error;

use crate::feature_store::FeaturePyramid;
pub use config::{Method, SimilarityConfig};
pub use features::{cosine, s_features};
pub use matching::{best_matches, s_matching, Match, MatchSet};
pub use pairwise::{pair_similarity, similarity_matrix, similarity_matrix_with_progress};
pub use ransac::{
    affine_objective, ransac_affine, ransac_affine_seeded, AffineTransform, DEGENERATE_DET,
};
pub use trans::{direction_seed, s_trans};

use crate::matrix::MatrixError;

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("descriptor length mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature map shapes differ: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize, usize),
        right: (usize, usize, usize),
    },
    #[error("illustration {illustration:?} has no scale {tag}")]
    MissingScale { illustration: String, tag: u32 },
    #[error("invalid similarity configuration: {0}")]
    Config(String),
    #[error("pair ({i}, {j}): {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<SimilarityError>,
    },
    #[error("illustration {index} of {manuscript:?}: {source}")]
    Illustration {
        manuscript: String,
        index: usize,
        #[source]
        source: Box<SimilarityError>,
    },
    #[error("worker pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}
