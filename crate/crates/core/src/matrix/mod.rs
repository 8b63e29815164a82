//! Similarity-matrix transforms: normalization, cycle-consistent seeds and
//! seed propagation.

mod cycles;
mod normalize;
mod propagate;
mod similarity_matrix;

use thiserror::Error;

pub(crate) use cycles::argmax;
pub use cycles::{three_cycle_seeds, two_cycle_seeds, SeedOrigin, SeedSet};
pub use normalize::{
    col_normalized, normalize, row_normalized, Axis, Combine, NormalizationKind,
    NormalizationScheme, NormalizationWarning, Normalized, DEFAULT_SOFTMAX_LAMBDA,
};
pub use propagate::{propagate, PropagationConfig};
pub use similarity_matrix::{Provenance, SimilarityMatrix};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("{len} values do not fill a {rows}x{cols} matrix")]
    Shape {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("rows have different lengths")]
    Ragged,
    #[error("non-finite value at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("expected a {expected} matrix, got {found}")]
    Provenance {
        expected: Provenance,
        found: Provenance,
    },
    #[error("incompatible dimensions: {0}")]
    DimensionMismatch(String),
    #[error("seed ({i}, {j}) outside a {rows}x{cols} matrix")]
    SeedOutOfRange {
        i: usize,
        j: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid normalization scheme: {0}")]
    Scheme(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("matrix header: {0}")]
    Header(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
