//! All-pairs similarity between two manuscripts on a worker pool.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use super::features::s_features;
use super::matching::{s_matching_prepared, PreparedPyramid};
use super::trans::s_trans_prepared;
use super::{s_matching, s_trans, Method, SimilarityConfig, SimilarityError};
use crate::feature_store::{FeaturePyramid, ManuscriptFeatures};
use crate::matrix::{Provenance, SimilarityMatrix};

/// Similarity of one pair of illustrations under `method`.
pub fn pair_similarity(
    a: &FeaturePyramid,
    b: &FeaturePyramid,
    method: Method,
    cfg: &SimilarityConfig,
) -> Result<f64, SimilarityError> {
    match method {
        Method::Features => s_features(a.fixed_map(), b.fixed_map()),
        Method::Matching => s_matching(a, b, cfg),
        Method::Trans => s_trans(a, b, cfg),
    }
}

/// Raw similarity matrix between every illustration of `a` (rows) and of `b`
/// (columns). `workers == 0` uses the default pool size. The result does not
/// depend on the worker count.
pub fn similarity_matrix(
    a: &ManuscriptFeatures,
    b: &ManuscriptFeatures,
    method: Method,
    cfg: &SimilarityConfig,
    workers: usize,
) -> Result<SimilarityMatrix, SimilarityError> {
    similarity_matrix_with_progress(a, b, method, cfg, workers, &|_, _| {})
}

/// Like [`similarity_matrix`], calling `progress(done, total)` as pairs
/// complete. Calls may arrive from any worker thread.
pub fn similarity_matrix_with_progress(
    a: &ManuscriptFeatures,
    b: &ManuscriptFeatures,
    method: Method,
    cfg: &SimilarityConfig,
    workers: usize,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<SimilarityMatrix, SimilarityError> {
    cfg.validate()?;
    if let (Some(ca), Some(cb)) = (a.channels(), b.channels()) {
        if ca != cb {
            return Err(SimilarityError::DimensionMismatch {
                expected: ca,
                found: cb,
            });
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimilarityError::ThreadPool(e.to_string()))?;
    let (rows, cols) = (a.len(), b.len());
    let values = pool.install(|| compute(a, b, method, cfg, progress))?;
    let matrix = SimilarityMatrix::new(rows, cols, values, Provenance::Raw, method.as_str())?
        .with_echo("similarity", cfg.echo())
        .with_echo(
            "manuscripts",
            serde_json::json!([a.manuscript_id(), b.manuscript_id()]),
        );
    Ok(matrix)
}

fn prepare(
    m: &ManuscriptFeatures,
    cfg: &SimilarityConfig,
) -> Result<Vec<PreparedPyramid>, SimilarityError> {
    m.pyramids()
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            PreparedPyramid::new(p, cfg).map_err(|e| SimilarityError::Illustration {
                manuscript: m.manuscript_id().to_owned(),
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

fn compute(
    a: &ManuscriptFeatures,
    b: &ManuscriptFeatures,
    method: Method,
    cfg: &SimilarityConfig,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<Vec<f64>, SimilarityError> {
    let (rows, cols) = (a.len(), b.len());
    let total = rows * cols;
    let done = AtomicUsize::new(0);
    let tick = || progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
    let wrap = |i: usize, j: usize| {
        move |e: SimilarityError| SimilarityError::Pair {
            i,
            j,
            source: Box::new(e),
        }
    };

    // Each pair writes to its own slot, so the result is addressed by
    // position, never by completion order.
    match method {
        Method::Features => (0..total)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / cols, k % cols);
                let s = s_features(a.pyramids()[i].fixed_map(), b.pyramids()[j].fixed_map())
                    .map_err(wrap(i, j))?;
                tick();
                Ok(s)
            })
            .collect(),
        Method::Matching | Method::Trans => {
            let pa = prepare(a, cfg)?;
            let pb = prepare(b, cfg)?;
            let score = match method {
                Method::Matching => s_matching_prepared,
                _ => s_trans_prepared,
            };
            Ok((0..total)
                .into_par_iter()
                .map(|k| {
                    let s = score(&pa[k / cols], &pb[k % cols], cfg);
                    tick();
                    s
                })
                .collect())
        }
    }
}
