//! Find corresponding illustrations across copies of the same manuscript.
//!
//! The pipeline runs in four steps:
//!
//! 1. [`feature_store`] loads per-illustration convolutional feature maps: a
//!    fixed-size map plus a pyramid of scales.
//! 2. [`similarity`] scores every illustration pair, giving a raw
//!    [`SimilarityMatrix`].
//! 3. [`matrix`] normalizes the matrix by rows and columns, finds
//!    cycle-consistent seeds and propagates them to neighbouring positions.
//! 4. [`collation`] extracts correspondences, either per-query argmax or
//!    greedy one-to-one, and evaluates them against annotations.
//!
//! ```
//! use collate_core::prelude::*;
//!
//! let (a, b, truth) = synth_manuscripts(&SynthSpec::new(7, 6, 8).with_noise(0.2)).unwrap();
//! let raw = similarity_matrix(&a, &b, Method::Matching, &SimilarityConfig::default(), 0).unwrap();
//! let norm = normalize(&raw, &NormalizationScheme::default()).unwrap().matrix;
//! let seeds = two_cycle_seeds(&norm);
//! let prop = propagate(&norm, &seeds, &PropagationConfig::default()).unwrap();
//! let matches = greedy_one_to_one(&prop);
//! let report = EvalReport::from_predictions(&matches, &matches, &truth);
//! assert_eq!(report.n_annotated, 6);
//! ```

pub mod collation;
pub mod feature_store;
pub mod matrix;
pub mod similarity;

pub use matrix::{Provenance, SimilarityMatrix};

/// The common types and entry points in one import.
pub mod prelude {
    pub use crate::collation::{
        argmax_correspondences, evaluate, greedy_one_to_one, top_k, top_k_masked, Correspondence,
        CorrespondenceSet, Direction, EvalOptions, EvalReport, Source, Status,
    };
    pub use crate::feature_store::{
        load_manuscript, save_manuscript, synth_manuscripts, FeatureMap, FeaturePyramid,
        ManuscriptFeatures, SynthSpec,
    };
    pub use crate::matrix::{
        normalize, propagate, three_cycle_seeds, two_cycle_seeds, Combine, NormalizationKind,
        NormalizationScheme, PropagationConfig, Provenance, SeedSet, SimilarityMatrix,
    };
    pub use crate::similarity::{similarity_matrix, Method, SimilarityConfig};
}
