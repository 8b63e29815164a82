//! Correspondence extraction from similarity matrices and evaluation
//! metrics.

mod correspondence;
mod metrics;
mod retrieval;

use thiserror::Error;

pub use correspondence::{Correspondence, CorrespondenceSet, Source, Status};
pub use metrics::{
    accuracy, evaluate, format_cell, ground_truth_pairs, map_at_r, nn_recall, recall_at_n,
    recall_at_n_with, render_table, Accuracy, EvalOptions, EvalReport, RecallMode, DEFAULT_NN_KS,
};
pub use retrieval::{argmax_correspondences, greedy_one_to_one, top_k, top_k_masked, Direction};

#[derive(Debug, Error)]
pub enum CollationError {
    #[error("duplicate correspondence ({i}, {j})")]
    DuplicateEntry { i: usize, j: usize },
    #[error("index {index} out of range for axis of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("ground truth is empty")]
    EmptyGroundTruth,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
