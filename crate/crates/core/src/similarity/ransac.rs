//! Score-maximizing RANSAC for 2D affine transforms.
//!
//! Hypotheses come from exact solves on three sampled matches. Each is scored
//! by `Σ exp(−‖T·x_src − x_tgt‖² / 2σ²) · weight` over all matches rather
//! than by an inlier count, and the best-scoring one wins. The identity
//! transform is the initial incumbent, so the result never scores below it.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Match, MatchSet, SimilarityConfig};

/// Minimal-sample systems with `|det|` below this are treated as collinear.
pub const DEGENERATE_DET: f64 = 1e-12;

/// `(x, y) ↦ (a·x + b·y + e, c·x + d·y + f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl AffineTransform {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
        e: 0.0,
        f: 0.0,
    };

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.a * p[0] + self.b * p[1] + self.e,
            self.c * p[0] + self.d * p[1] + self.f,
        ]
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d, self.e, self.f]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Exact transform taking `src[k]` to `dst[k]` for three point pairs,
    /// or `None` when the source points are (nearly) collinear.
    pub fn from_three(src: [[f64; 2]; 3], dst: [[f64; 2]; 3]) -> Option<Self> {
        let m = [
            [src[0][0], src[0][1], 1.0],
            [src[1][0], src[1][1], 1.0],
            [src[2][0], src[2][1], 1.0],
        ];
        let det = det3(m);
        if det.abs() < DEGENERATE_DET {
            return None;
        }
        let solve = |rhs: [f64; 3]| -> [f64; 3] {
            let mut out = [0.0; 3];
            for (col, slot) in out.iter_mut().enumerate() {
                let mut mc = m;
                for row in 0..3 {
                    mc[row][col] = rhs[row];
                }
                *slot = det3(mc) / det;
            }
            out
        };
        let [a, b, e] = solve([dst[0][0], dst[1][0], dst[2][0]]);
        let [c, d, f] = solve([dst[0][1], dst[1][1], dst[2][1]]);
        let t = Self { a, b, c, d, e, f };
        t.is_finite().then_some(t)
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `exp(−‖T·x_src − x_tgt‖² / 2σ²)` for one match.
pub(crate) fn residual_weight(t: &AffineTransform, m: &Match, inv_two_var: f64) -> f64 {
    let p = t.apply(m.src_pos);
    let r2 = (p[0] - m.tgt_pos[0]).powi(2) + (p[1] - m.tgt_pos[1]).powi(2);
    (-r2 * inv_two_var).exp()
}

/// Score of `t` on `matches`: `Σ exp(−‖T·x_src − x_tgt‖² / 2σ²) · weight`.
pub fn affine_objective(t: &AffineTransform, matches: &[Match], sigma: f64) -> f64 {
    let k = 1.0 / (2.0 * sigma * sigma);
    matches
        .iter()
        .map(|m| residual_weight(t, m, k) * m.weight)
        .sum()
}

/// Best transform found by RANSAC, seeded from `cfg.rng_seed`.
pub fn ransac_affine(matches: &MatchSet, cfg: &SimilarityConfig) -> AffineTransform {
    ransac_affine_seeded(&matches.matches, cfg, cfg.rng_seed)
}

/// RANSAC with an explicit seed. Every iteration draws one 3-sample;
/// collinear samples are dropped and still consume the iteration.
pub fn ransac_affine_seeded(
    matches: &[Match],
    cfg: &SimilarityConfig,
    seed: u64,
) -> AffineTransform {
    let mut best = AffineTransform::IDENTITY;
    if matches.len() < 3 {
        return best;
    }
    let mut best_score = affine_objective(&best, matches, cfg.sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.ransac_iterations {
        let picks = index::sample(&mut rng, matches.len(), 3);
        let (p, q, r) = (
            &matches[picks.index(0)],
            &matches[picks.index(1)],
            &matches[picks.index(2)],
        );
        let Some(t) = AffineTransform::from_three(
            [p.src_pos, q.src_pos, r.src_pos],
            [p.tgt_pos, q.tgt_pos, r.tgt_pos],
        ) else {
            continue;
        };
        let score = affine_objective(&t, matches, cfg.sigma);
        if score > best_score {
            best = t;
            best_score = score;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(src: [f64; 2], tgt: [f64; 2], weight: f64) -> Match {
        Match {
            src_pos: src,
            tgt_pos: tgt,
            weight,
            src_index: 0,
            tgt_index: 0,
            tgt_scale_tag: 20,
        }
    }

    #[test]
    fn exact_three_point_solve() {
        let t0 = AffineTransform {
            a: 1.1,
            b: -0.2,
            c: 0.15,
            d: 0.9,
            e: 0.05,
            f: -0.1,
        };
        let src = [[0.1, 0.2], [0.8, 0.3], [0.4, 0.9]];
        let dst = src.map(|p| t0.apply(p));
        let t = AffineTransform::from_three(src, dst).unwrap();
        for (x, y) in [t.a, t.b, t.c, t.d, t.e, t.f]
            .iter()
            .zip([t0.a, t0.b, t0.c, t0.d, t0.e, t0.f])
        {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_is_degenerate() {
        let src = [[0.1, 0.1], [0.2, 0.2], [0.3, 0.3]];
        assert!(AffineTransform::from_three(src, src).is_none());
    }

    #[test]
    fn fewer_than_three_matches_gives_identity() {
        let set = MatchSet::new(
            "a",
            "b",
            vec![
                m([0.1, 0.1], [0.5, 0.5], 1.0),
                m([0.3, 0.2], [0.9, 0.1], 1.0),
            ],
        );
        assert_eq!(
            ransac_affine(&set, &SimilarityConfig::default()),
            AffineTransform::IDENTITY
        );
    }

    #[test]
    fn all_degenerate_gives_identity() {
        let line: Vec<Match> = (0..6)
            .map(|k| {
                let x = k as f64 / 10.0;
                m([x, x], [x + 0.3, x], 1.0)
            })
            .collect();
        let t = ransac_affine_seeded(&line, &SimilarityConfig::default(), 3);
        assert_eq!(t, AffineTransform::IDENTITY);
    }

    #[test]
    fn zero_residual_matches_keep_full_score() {
        let pts = [[0.1, 0.2], [0.7, 0.25], [0.45, 0.8], [0.3, 0.5]];
        let matches: Vec<Match> = pts.iter().map(|&p| m(p, p, 0.8)).collect();
        let cfg = SimilarityConfig::default();
        let t = ransac_affine_seeded(&matches, &cfg, 1);
        let score = affine_objective(&t, &matches, cfg.sigma);
        assert!(score >= affine_objective(&AffineTransform::IDENTITY, &matches, cfg.sigma));
        assert!((score - 3.2).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let matches: Vec<Match> = (0..12)
            .map(|k| {
                let x = (k as f64 * 0.37).fract();
                let y = (k as f64 * 0.61).fract();
                m([x, y], [(x * 1.7).fract(), (y + 0.3).fract()], 0.5)
            })
            .collect();
        let cfg = SimilarityConfig::default();
        assert_eq!(
            ransac_affine_seeded(&matches, &cfg, 42),
            ransac_affine_seeded(&matches, &cfg, 42)
        );
    }
}
