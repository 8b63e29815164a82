use collate_core::collation::CollationError;
use collate_core::feature_store::FeatureError;
use collate_core::matrix::MatrixError;
use collate_core::similarity::SimilarityError;

use crate::project::Stage;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("unknown manuscript {0:?}")]
    UnknownManuscript(String),
    #[error("manuscript {0:?} is already part of the project")]
    DuplicateManuscript(String),
    #[error("{axis} index {index} out of range for {len} illustrations")]
    IndexOutOfRange {
        axis: &'static str,
        index: usize,
        len: usize,
    },
    #[error("stage {stage} needs an up-to-date {missing} stage; run it first")]
    StageOrder { stage: Stage, missing: Stage },
    #[error("no {stage} output for pair ({a}, {b})")]
    MissingStage { a: String, b: String, stage: Stage },
    #[error("nothing to export for pair ({0}, {1})")]
    NothingToExport(String, String),
    #[error("a pipeline run is already in progress for pair ({0}, {1})")]
    RunInProgress(String, String),
    #[error("unknown image {0:?}")]
    UnknownImage(String),
    #[error("image for {0:?} is marked missing")]
    ImageMissing(String),
    #[error("invalid project: {0}")]
    Project(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Collation(#[from] CollationError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
