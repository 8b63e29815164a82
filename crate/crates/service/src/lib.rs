//! Review workbench backend for illustration collation.
//!
//! A [`Project`] is a directory holding JSON metadata, the manuscripts'
//! manifests by reference, per-pair similarity matrices in FMAP format and
//! the reviewer's annotations. [`run_pipeline`] recomputes the stages of one
//! manuscript pair (similarity → normalize → propagate → match), skipping
//! any stage whose inputs hash to the value recorded on disk. Confirmed
//! correspondences join the cycle-consistent seeds of the propagate stage;
//! rejected ones are removed from it.
//!
//! [`ProjectService`] wraps a project for concurrent use: readers take a
//! cheap snapshot, writers are serialized, and pipeline runs execute on a
//! background thread with pollable status. [`api::router`] exposes it over
//! HTTP.

pub mod api;
mod error;
mod images;
mod pipeline;
mod project;
mod service;

pub use error::ServiceError;
pub use images::{ImageEntry, ImageSize, ImageStore};
pub use pipeline::{run_pipeline, stage_hashes, RunReport};
pub use project::{
    Candidate, ExportFormat, ManuscriptRef, MatchAlgorithm, PairRecord, PipelineConfig, Project,
    ProjectMeta, Stage, StageRecord, PROJECT_FILE,
};
pub use service::{ProjectService, RunState, RunStatus};
