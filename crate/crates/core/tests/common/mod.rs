//! Independent brute-force reference implementations and random fixtures
//! shared by the integration tests.
//!
//! The oracles deliberately avoid the library's fast paths: cosines are
//! computed pair by pair from raw `f32` descriptors, positions from the grid
//! formula, rankings by a full sort.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use collate_core::collation::{Correspondence, CorrespondenceSet, Source, Status};
use collate_core::feature_store::{FeatureMap, FeaturePyramid};
use collate_core::matrix::{Provenance, SimilarityMatrix};
use collate_core::similarity::SimilarityConfig;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// `|x − y| ≤ tol · max(|x|, |y|)`, with a tiny absolute floor for values
/// at zero.
pub fn close_rel(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()) || (x - y).abs() <= 1e-15
}

pub fn naive_cosine(u: &[f32], v: &[f32]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(&a, &b)| a as f64 * b as f64).sum();
    let nu: f64 = u.iter().map(|&a| (a as f64).powi(2)).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|&b| (b as f64).powi(2)).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu * nv)
    }
}

fn cell(map: &FeatureMap, k: usize) -> &[f32] {
    let c = map.channels();
    &map.data()[k * c..(k + 1) * c]
}

fn grid_position(map: &FeatureMap, k: usize) -> [f64; 2] {
    let extent = map.height().max(map.width()) as f64;
    let (r, c) = (k / map.width(), k % map.width());
    [(c as f64 + 0.5) / extent, (r as f64 + 0.5) / extent]
}

pub fn naive_s_features(a: &FeatureMap, b: &FeatureMap) -> f64 {
    let n = a.height() * a.width();
    (0..n)
        .map(|k| naive_cosine(cell(a, k), cell(b, k)))
        .sum::<f64>()
        / n as f64
}

/// `(src_index, tgt_index, scale_tag, weight, src_pos, tgt_pos)`.
pub type NaiveMatch = (usize, usize, u32, f64, [f64; 2], [f64; 2]);

/// Reciprocal nearest neighbours scale by scale; the best reciprocal match
/// over scales (earliest scale on ties) represents each source feature.
pub fn naive_best_matches(src: &FeatureMap, targets: &[(u32, &FeatureMap)]) -> Vec<NaiveMatch> {
    let n = src.height() * src.width();
    let mut out = Vec::new();
    for i in 0..n {
        let mut best: Option<NaiveMatch> = None;
        for &(tag, tgt) in targets {
            let m = tgt.height() * tgt.width();
            let sim = |a: usize, b: usize| naive_cosine(cell(src, a), cell(tgt, b));
            let mut j = 0;
            for b in 1..m {
                if sim(i, b) > sim(i, j) {
                    j = b;
                }
            }
            let mut back = 0;
            for a in 1..n {
                if sim(a, j) > sim(back, j) {
                    back = a;
                }
            }
            if back != i {
                continue;
            }
            let w = sim(i, j);
            if best.is_none() || w > best.unwrap().3 {
                best = Some((i, j, tag, w, grid_position(src, i), grid_position(tgt, j)));
            }
        }
        out.extend(best);
    }
    out
}

fn naive_direction(src: &FeaturePyramid, tgt: &FeaturePyramid, cfg: &SimilarityConfig) -> f64 {
    let base = src.scale(cfg.base_scale).expect("base scale");
    let targets: Vec<(u32, &FeatureMap)> = cfg
        .scale_tags
        .iter()
        .map(|&t| (t, tgt.scale(t).expect("target scale")))
        .collect();
    let n = base.height() * base.width();
    let total: f64 = naive_best_matches(base, &targets)
        .iter()
        .map(|&(_, _, _, w, p, q)| {
            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
            (-d2 / (2.0 * cfg.sigma * cfg.sigma)).exp() * w
        })
        .sum();
    total / (2.0 * n as f64)
}

pub fn naive_s_matching(a: &FeaturePyramid, b: &FeaturePyramid, cfg: &SimilarityConfig) -> f64 {
    naive_direction(a, b, cfg) + naive_direction(b, a, cfg)
}

pub fn naive_propagate(
    n: &[Vec<f64>],
    seeds: &[(usize, usize)],
    alpha: f64,
    sigma_p: f64,
) -> Vec<Vec<f64>> {
    n.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let mut f = 1.0;
                    for &(k, l) in seeds {
                        let d2 = ((i as f64) - k as f64).powi(2) + ((j as f64) - l as f64).powi(2);
                        f *= 1.0 + alpha * (-d2 / (2.0 * sigma_p * sigma_p)).exp();
                    }
                    v * f
                })
                .collect()
        })
        .collect()
}

/// Indices of `row` best first; ties to the lower index.
fn sorted_row(row: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
    idx
}

pub fn naive_recall_at_n(s: &[Vec<f64>], gt: &[(usize, usize)]) -> f64 {
    let mut all = Vec::new();
    for (i, row) in s.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            all.push((v, i, j));
        }
    }
    all.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let truth: HashSet<(usize, usize)> = gt.iter().copied().collect();
    let hits = all[..truth.len()]
        .iter()
        .filter(|&&(_, i, j)| truth.contains(&(i, j)))
        .count();
    100.0 * hits as f64 / truth.len() as f64
}

pub fn naive_map_at_r(s: &[Vec<f64>], gt: &[(usize, usize)]) -> f64 {
    let mut partners: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(i, j) in gt {
        partners.entry(i).or_default().push(j);
    }
    let mut sum_ap = 0.0;
    for (&i, js) in &partners {
        let order = sorted_row(&s[i]);
        let mut precisions = Vec::new();
        for (rank, j) in order.iter().enumerate() {
            if js.contains(j) {
                let hits_so_far = order[..=rank].iter().filter(|x| js.contains(x)).count();
                precisions.push(hits_so_far as f64 / (rank + 1) as f64);
            }
        }
        sum_ap += precisions.iter().sum::<f64>() / js.len() as f64;
    }
    100.0 * sum_ap / partners.len() as f64
}

pub fn naive_nn_recall(s: &[Vec<f64>], gt: &[(usize, usize)], k: usize) -> f64 {
    let hits = gt
        .iter()
        .filter(|&&(i, j)| sorted_row(&s[i]).iter().take(k).any(|&x| x == j))
        .count();
    100.0 * hits as f64 / gt.len() as f64
}

// ---- random fixtures -------------------------------------------------------

pub fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// A map with standard-normal entries; roughly one cell in ten is zeroed.
pub fn random_map(rng: &mut impl Rng, h: usize, w: usize, c: usize) -> FeatureMap {
    FeatureMap::from_fn(h, w, c, |_, _| {
        if rng.random_bool(0.1) {
            vec![0.0; c]
        } else {
            (0..c).map(|_| normal(rng) as f32).collect()
        }
    })
    .unwrap()
}

/// A small pyramid whose scale maps have largest side equal to their tag
/// and a random aspect ratio.
pub fn random_pyramid(
    rng: &mut impl Rng,
    id: &str,
    tags: &[u32],
    fixed_side: usize,
    c: usize,
) -> FeaturePyramid {
    let fixed = random_map(rng, fixed_side, fixed_side, c);
    let scales = tags
        .iter()
        .map(|&t| {
            let t = t as usize;
            let other = rng.random_range(1..=t);
            let (h, w) = if rng.random_bool(0.5) {
                (t, other)
            } else {
                (other, t)
            };
            (t as u32, random_map(rng, h, w, c))
        })
        .collect();
    FeaturePyramid::new(id, fixed, scales).unwrap()
}

/// Configuration for small pyramids with scale tags 2..=4 and base scale 3.
pub fn small_config() -> SimilarityConfig {
    SimilarityConfig {
        scale_tags: vec![2, 3, 4],
        base_scale: 3,
        ..SimilarityConfig::default()
    }
}

pub fn random_rows(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

pub fn matrix(rows: &[Vec<f64>], provenance: Provenance) -> SimilarityMatrix {
    SimilarityMatrix::from_rows(rows)
        .unwrap()
        .with_provenance(provenance)
}

/// Random ground truth: each chosen row gets one or two distinct partners.
pub fn random_gt(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    let count = rng.random_range(1..=rows.max(1));
    for _ in 0..count {
        let i = rng.random_range(0..rows);
        for _ in 0..rng.random_range(1..=2usize) {
            let j = rng.random_range(0..cols);
            if seen.insert((i, j)) {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

pub fn gt_set(pairs: &[(usize, usize)]) -> CorrespondenceSet {
    CorrespondenceSet::from_entries(
        "A",
        "B",
        pairs.iter().map(|&(i, j)| Correspondence {
            i,
            j,
            status: Status::Confirmed,
            score: 1.0,
            source: Source::Manual,
        }),
    )
}
