//! Reciprocal multi-scale local feature matching.
//!
//! A source feature is matched, independently at every target scale, to its
//! most similar target feature; the match is kept at that scale only if the
//! target feature's most similar source feature is the original one. The
//! best surviving match across scales (highest cosine, earliest scale on
//! ties) represents the source feature.

use ndarray::{Array2, ArrayView1};

use super::{SimilarityConfig, SimilarityError};
use crate::feature_store::{FeatureMap, FeaturePyramid};

/// One reciprocal match from a source feature to a target feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    /// Source position, normalized grid coordinates `[x, y]`.
    pub src_pos: [f64; 2],
    /// Target position in the target's normalized frame (shared by all its scales).
    pub tgt_pos: [f64; 2],
    /// Cosine similarity of the two descriptors.
    pub weight: f64,
    pub src_index: usize,
    pub tgt_index: usize,
    pub tgt_scale_tag: u32,
}

impl Match {
    pub fn displacement_sq(&self) -> f64 {
        (self.src_pos[0] - self.tgt_pos[0]).powi(2) + (self.src_pos[1] - self.tgt_pos[1]).powi(2)
    }
}

/// Matches from one illustration to another, at most one per source index,
/// ordered by source index.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    pub direction: (String, String),
    pub matches: Vec<Match>,
}

impl MatchSet {
    pub fn new(src: impl Into<String>, tgt: impl Into<String>, matches: Vec<Match>) -> Self {
        Self {
            direction: (src.into(), tgt.into()),
            matches,
        }
    }

    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Match> {
        self.matches.iter()
    }
}

/// Descriptors scaled to unit length (zero vectors stay zero), with cell
/// positions. Dot products of rows are cosines.
#[derive(Debug, Clone)]
pub(crate) struct UnitMap {
    pub tag: u32,
    pub units: Array2<f64>,
    pub positions: Vec<[f64; 2]>,
}

impl UnitMap {
    pub fn new(tag: u32, map: &FeatureMap) -> Self {
        let (n, c) = (map.len(), map.channels());
        let mut units = Array2::<f64>::zeros((n, c));
        for (d, mut row) in map.descriptors().zip(units.rows_mut()) {
            let norm = d
                .iter()
                .map(|&x| (x as f64) * (x as f64))
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                for (o, &x) in row.iter_mut().zip(d) {
                    *o = x as f64 / norm;
                }
            }
        }
        let positions = (0..n).map(|i| map.position(i)).collect();
        Self {
            tag,
            units,
            positions,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }
}

/// A pyramid prepared for repeated matching: unit descriptors for the
/// configured target scales and the base (source) scale.
#[derive(Debug, Clone)]
pub(crate) struct PreparedPyramid {
    pub id: String,
    pub targets: Vec<UnitMap>,
    pub base: UnitMap,
}

impl PreparedPyramid {
    pub fn new(p: &FeaturePyramid, cfg: &SimilarityConfig) -> Result<Self, SimilarityError> {
        let scale = |tag: u32| {
            p.scale(tag).ok_or_else(|| SimilarityError::MissingScale {
                illustration: p.illustration_id().to_owned(),
                tag,
            })
        };
        let targets = cfg
            .scale_tags
            .iter()
            .map(|&t| Ok(UnitMap::new(t, scale(t)?)))
            .collect::<Result<Vec<_>, SimilarityError>>()?;
        let base = UnitMap::new(cfg.base_scale, scale(cfg.base_scale)?);
        Ok(Self {
            id: p.illustration_id().to_owned(),
            targets,
            base,
        })
    }
}

/// Lowest index of the maximum.
fn argmax_view(v: ArrayView1<'_, f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, &x) in v.iter().enumerate() {
        if x > best.1 {
            best = (k, x);
        }
    }
    best
}

pub(crate) fn match_units(src: &UnitMap, targets: &[UnitMap]) -> Vec<Match> {
    let n = src.len();
    let mut best: Vec<Option<Match>> = vec![None; n];
    for tgt in targets {
        if tgt.len() == 0 || n == 0 {
            continue;
        }
        let sims = src.units.dot(&tgt.units.t());
        let back: Vec<usize> = sims
            .columns()
            .into_iter()
            .map(|col| argmax_view(col).0)
            .collect();
        for (i, row) in sims.rows().into_iter().enumerate() {
            let (j, weight) = argmax_view(row);
            if back[j] != i {
                continue;
            }
            if best[i].is_none_or(|m| weight > m.weight) {
                best[i] = Some(Match {
                    src_pos: src.positions[i],
                    tgt_pos: tgt.positions[j],
                    weight,
                    src_index: i,
                    tgt_index: j,
                    tgt_scale_tag: tgt.tag,
                });
            }
        }
    }
    best.into_iter().flatten().collect()
}

/// Reciprocal best matches from every feature of `src` into all scale maps
/// of `tgt`.
pub fn best_matches(src: &FeatureMap, tgt: &FeaturePyramid) -> Result<MatchSet, SimilarityError> {
    if src.channels() != tgt.channels() {
        return Err(SimilarityError::DimensionMismatch {
            expected: src.channels(),
            found: tgt.channels(),
        });
    }
    let src_units = UnitMap::new(0, src);
    let targets: Vec<UnitMap> = tgt
        .scale_maps()
        .iter()
        .map(|(t, m)| UnitMap::new(*t, m))
        .collect();
    Ok(MatchSet::new(
        "source",
        tgt.illustration_id(),
        match_units(&src_units, &targets),
    ))
}

/// `(1/2N) Σ exp(−‖x_src − x_tgt‖² / 2σ²) · weight` over one direction.
pub(crate) fn displacement_term(matches: &[Match], n_src: usize, cfg: &SimilarityConfig) -> f64 {
    if n_src == 0 {
        return 0.0;
    }
    let k = cfg.inv_two_var();
    let total: f64 = matches
        .iter()
        .map(|m| (-m.displacement_sq() * k).exp() * m.weight)
        .sum();
    total / (2 * n_src) as f64
}

/// Matches from `src`'s base scale into `tgt`'s configured scales.
pub(crate) fn directional_matches(src: &PreparedPyramid, tgt: &PreparedPyramid) -> MatchSet {
    MatchSet::new(
        src.id.clone(),
        tgt.id.clone(),
        match_units(&src.base, &tgt.targets),
    )
}

pub(crate) fn s_matching_prepared(
    a: &PreparedPyramid,
    b: &PreparedPyramid,
    cfg: &SimilarityConfig,
) -> f64 {
    let ab = displacement_term(&directional_matches(a, b).matches, a.base.len(), cfg);
    let ba = displacement_term(&directional_matches(b, a).matches, b.base.len(), cfg);
    ab + ba
}

/// Symmetric matching similarity: the sum of both directional terms, each
/// matching the source's base scale against the target's scales.
pub fn s_matching(
    a: &FeaturePyramid,
    b: &FeaturePyramid,
    cfg: &SimilarityConfig,
) -> Result<f64, SimilarityError> {
    cfg.validate()?;
    check_channels(a, b)?;
    let pa = PreparedPyramid::new(a, cfg)?;
    let pb = PreparedPyramid::new(b, cfg)?;
    Ok(s_matching_prepared(&pa, &pb, cfg))
}

pub(crate) fn check_channels(
    a: &FeaturePyramid,
    b: &FeaturePyramid,
) -> Result<(), SimilarityError> {
    if a.channels() != b.channels() {
        return Err(SimilarityError::DimensionMismatch {
            expected: a.channels(),
            found: b.channels(),
        });
    }
    Ok(())
}
