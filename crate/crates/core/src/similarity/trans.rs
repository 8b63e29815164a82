//! Transformation-aware matching similarity.
//!
//! Each direction fits an affine transform to its reciprocal matches and
//! penalizes residuals to that transform instead of raw displacements, so a
//! copy that is shifted, scaled or slightly sheared still scores highly.

use super::matching::{check_channels, directional_matches, PreparedPyramid};
use super::ransac::{ransac_affine_seeded, residual_weight};
use super::{FeaturePyramid, SimilarityConfig, SimilarityError};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(state, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// RANSAC seed for the direction `src → tgt`.
///
/// The pair is hashed in sorted order and the direction contributes one bit,
/// so `(a, b)` and `(b, a)` produce the same two seeds with roles swapped.
/// That makes the total similarity exactly symmetric.
pub fn direction_seed(base_seed: u64, src_id: &str, tgt_id: &str) -> u64 {
    let (lo, hi, forward) = if src_id <= tgt_id {
        (src_id, tgt_id, 0u8)
    } else {
        (tgt_id, src_id, 1u8)
    };
    let mut h = fnv1a(FNV_OFFSET, &base_seed.to_le_bytes());
    h = fnv1a(h, lo.as_bytes());
    h = fnv1a(h, &[0xff]);
    h = fnv1a(h, hi.as_bytes());
    fnv1a(h, &[forward])
}

fn trans_term(src: &PreparedPyramid, tgt: &PreparedPyramid, cfg: &SimilarityConfig) -> f64 {
    let n = src.base.len();
    if n == 0 {
        return 0.0;
    }
    let matches = directional_matches(src, tgt).matches;
    let t = ransac_affine_seeded(
        &matches,
        cfg,
        direction_seed(cfg.rng_seed, &src.id, &tgt.id),
    );
    let k = cfg.inv_two_var();
    let total: f64 = matches
        .iter()
        .map(|m| residual_weight(&t, m, k) * m.weight)
        .sum();
    total / (2 * n) as f64
}

pub(crate) fn s_trans_prepared(
    a: &PreparedPyramid,
    b: &PreparedPyramid,
    cfg: &SimilarityConfig,
) -> f64 {
    trans_term(a, b, cfg) + trans_term(b, a, cfg)
}

/// Symmetric transformation-aware similarity.
pub fn s_trans(
    a: &FeaturePyramid,
    b: &FeaturePyramid,
    cfg: &SimilarityConfig,
) -> Result<f64, SimilarityError> {
    cfg.validate()?;
    check_channels(a, b)?;
    let pa = PreparedPyramid::new(a, cfg)?;
    let pb = PreparedPyramid::new(b, cfg)?;
    Ok(s_trans_prepared(&pa, &pb, cfg))
}
