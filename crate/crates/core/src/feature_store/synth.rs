//! Synthetic manuscripts for tests and examples.
//!
//! Each illustration is a continuous descriptor field over its normalized
//! image plane (largest side = 1): a few Gaussian blobs and plane waves with
//! random descriptor directions, plus a manuscript-wide shared field mixed in
//! with a per-illustration weight. The shared part makes some illustrations
//! look alike (row and column biases in the similarity matrix). Sampling the
//! same field at grids of different resolution yields a consistent pyramid.
//!
//! The second manuscript is a permuted copy of the first with i.i.d.
//! Gaussian noise of standard deviation `style_noise` added to every
//! descriptor component of every map.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{FeatureError, FeatureMap, FeaturePyramid, ManuscriptFeatures, DEFAULT_SCALE_TAGS};
use crate::collation::{Correspondence, CorrespondenceSet, Source, Status};

/// Arguments of [`synth_manuscripts`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub n_illustrations: usize,
    pub channels: usize,
    /// Per-component standard deviation of the noise added to manuscript B.
    pub style_noise: f64,
    /// `permutation[i]` is the position in B of A's illustration `i`.
    pub permutation: Vec<usize>,
    /// Upper bound of the per-illustration weight of the shared field.
    pub shared_weight: f64,
    pub fixed_side: usize,
    pub scale_tags: Vec<u32>,
}

impl SynthSpec {
    /// Noise-free, identity-permuted spec with default grid sizes.
    pub fn new(seed: u64, n_illustrations: usize, channels: usize) -> Self {
        Self {
            seed,
            n_illustrations,
            channels,
            style_noise: 0.0,
            permutation: (0..n_illustrations).collect(),
            shared_weight: 0.0,
            fixed_side: 16,
            scale_tags: DEFAULT_SCALE_TAGS.to_vec(),
        }
    }

    pub fn with_noise(mut self, style_noise: f64) -> Self {
        self.style_noise = style_noise;
        self
    }

    pub fn with_permutation(mut self, permutation: Vec<usize>) -> Self {
        self.permutation = permutation;
        self
    }

    pub fn with_shared_weight(mut self, shared_weight: f64) -> Self {
        self.shared_weight = shared_weight;
        self
    }

    pub fn with_fixed_side(mut self, fixed_side: usize) -> Self {
        self.fixed_side = fixed_side;
        self
    }

    fn validate(&self) -> Result<(), FeatureError> {
        let bad = |msg: String| Err(FeatureError::InvalidArgument(msg));
        if self.n_illustrations == 0 {
            return bad("n_illustrations must be at least 1".into());
        }
        if self.channels == 0 || self.fixed_side == 0 {
            return bad("channels and fixed_side must be positive".into());
        }
        if !(self.style_noise >= 0.0 && self.style_noise.is_finite()) {
            return bad(format!(
                "style_noise must be >= 0, got {}",
                self.style_noise
            ));
        }
        if !(0.0..=1.0).contains(&self.shared_weight) {
            return bad(format!(
                "shared_weight must lie in [0, 1], got {}",
                self.shared_weight
            ));
        }
        let mut seen = vec![false; self.n_illustrations];
        if self.permutation.len() != self.n_illustrations {
            return bad("permutation length must equal n_illustrations".into());
        }
        for &j in &self.permutation {
            if j >= self.n_illustrations || std::mem::replace(&mut seen[j], true) {
                return bad("permutation is not a bijection".into());
            }
        }
        Ok(())
    }
}

/// Generates manuscripts `A`, `B` and the ground-truth correspondences
/// `(i, permutation[i])`. Pure function of `spec`.
pub fn synth_manuscripts(
    spec: &SynthSpec,
) -> Result<(ManuscriptFeatures, ManuscriptFeatures, CorrespondenceSet), FeatureError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shared = SyntheticField::random(&mut rng, spec.channels);

    let mut pyramids_a = Vec::with_capacity(spec.n_illustrations);
    for i in 0..spec.n_illustrations {
        let extents = random_extents(&mut rng);
        let own = SyntheticField::random(&mut rng, spec.channels);
        let weight = spec.shared_weight * rng.random::<f64>();
        let field = |p: [f64; 2]| {
            let mut v = own.eval(p);
            if weight > 0.0 {
                for (x, s) in v.iter_mut().zip(shared.eval(p)) {
                    *x = (1.0 - weight) * *x + weight * s;
                }
            }
            v
        };
        pyramids_a.push(render_pyramid(
            format!("A{i:04}"),
            extents,
            spec.fixed_side,
            &spec.scale_tags,
            spec.channels,
            field,
        )?);
    }

    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut slots: Vec<Option<FeaturePyramid>> = vec![None; spec.n_illustrations];
    for (i, pa) in pyramids_a.iter().enumerate() {
        let mut perturb = |m: &FeatureMap| add_noise(m, spec.style_noise, &mut noise_rng);
        let fixed = perturb(pa.fixed_map())?;
        let scales = pa
            .scale_maps()
            .iter()
            .map(|(t, m)| Ok((*t, perturb(m)?)))
            .collect::<Result<Vec<_>, FeatureError>>()?;
        let j = spec.permutation[i];
        slots[j] = Some(FeaturePyramid::new(format!("B{j:04}"), fixed, scales)?);
    }
    let pyramids_b = slots.into_iter().map(|p| p.expect("bijection")).collect();

    let a = ManuscriptFeatures::new("A", pyramids_a)?;
    let b = ManuscriptFeatures::new("B", pyramids_b)?;
    let mut truth = CorrespondenceSet::new("A", "B");
    for (i, &j) in spec.permutation.iter().enumerate() {
        truth.insert(Correspondence {
            i,
            j,
            status: Status::Confirmed,
            score: 1.0,
            source: Source::Manual,
        });
    }
    Ok((a, b, truth))
}

/// Random permutation of `0..n` in which no index moves by more than
/// `max_shift` positions.
pub fn local_permutation(seed: u64, n: usize, max_shift: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Sorting i + u_i with u_i in [0, max_shift] bounds every displacement by max_shift.
    let mut keyed: Vec<(f64, usize)> = (0..n)
        .map(|i| (i as f64 + rng.random::<f64>() * max_shift as f64, i))
        .collect();
    keyed.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut perm = vec![0; n];
    for (rank, (_, i)) in keyed.into_iter().enumerate() {
        perm[i] = rank;
    }
    perm
}

/// Uniformly random permutation of `0..n`.
pub fn random_permutation(seed: u64, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm
}

fn random_extents(rng: &mut impl Rng) -> [f64; 2] {
    let short = rng.random_range(0.6..=1.0);
    if rng.random_bool(0.5) {
        [1.0, short]
    } else {
        [short, 1.0]
    }
}

fn add_noise(map: &FeatureMap, sigma: f64, rng: &mut impl Rng) -> Result<FeatureMap, FeatureError> {
    if sigma == 0.0 {
        return Ok(map.clone());
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    map.map_values(|v| (v as f64 + normal.sample(rng)) as f32)
}

/// A smooth random descriptor field over the normalized image plane.
#[derive(Debug, Clone)]
pub struct SyntheticField {
    channels: usize,
    blobs: Vec<Blob>,
    waves: Vec<Wave>,
}

#[derive(Debug, Clone)]
struct Blob {
    center: [f64; 2],
    inv_two_r2: f64,
    descriptor: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Wave {
    freq: [f64; 2],
    phase: f64,
    descriptor: Vec<f64>,
}

impl SyntheticField {
    pub fn random(rng: &mut impl Rng, channels: usize) -> Self {
        let vector = |scale: f64, rng: &mut dyn rand::RngCore| -> Vec<f64> {
            (0..channels)
                .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
                .collect::<Vec<f64>>()
        };
        let blobs = (0..6)
            .map(|_| {
                let r: f64 = rng.random_range(0.1..0.25);
                Blob {
                    center: [rng.random(), rng.random()],
                    inv_two_r2: 1.0 / (2.0 * r * r),
                    descriptor: vector(1.0, rng),
                }
            })
            .collect();
        let waves = (0..4)
            .map(|_| {
                let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let cycles: f64 = rng.random_range(2.0..6.0);
                let k = std::f64::consts::TAU * cycles;
                Wave {
                    freq: [k * angle.cos(), k * angle.sin()],
                    phase: rng.random_range(0.0..std::f64::consts::TAU),
                    descriptor: vector(0.5, rng),
                }
            })
            .collect();
        Self {
            channels,
            blobs,
            waves,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn eval(&self, p: [f64; 2]) -> Vec<f64> {
        let mut out = vec![0.0; self.channels];
        for b in &self.blobs {
            let d2 = (p[0] - b.center[0]).powi(2) + (p[1] - b.center[1]).powi(2);
            let g = (-d2 * b.inv_two_r2).exp();
            for (o, d) in out.iter_mut().zip(&b.descriptor) {
                *o += g * d;
            }
        }
        for w in &self.waves {
            let s = (w.freq[0] * p[0] + w.freq[1] * p[1] + w.phase).sin();
            for (o, d) in out.iter_mut().zip(&w.descriptor) {
                *o += s * d;
            }
        }
        out
    }
}

/// Grid shape whose largest side is `tag`, following `extents` (width, height).
pub fn grid_for_tag(extents: [f64; 2], tag: u32) -> (usize, usize) {
    let tag = tag as usize;
    let [w, h] = extents;
    let other = |ratio: f64| ((tag as f64 * ratio).round() as usize).clamp(1, tag);
    if w >= h {
        (other(h / w), tag)
    } else {
        (tag, other(w / h))
    }
}

/// Samples `field` into a pyramid. Scale maps sample at cell centres in
/// normalized coordinates (same convention as [`FeatureMap::position`]); the
/// fixed map squashes the image extents onto a `fixed_side` square.
pub fn render_pyramid(
    id: String,
    extents: [f64; 2],
    fixed_side: usize,
    scale_tags: &[u32],
    channels: usize,
    field: impl Fn([f64; 2]) -> Vec<f64>,
) -> Result<FeaturePyramid, FeatureError> {
    let to_f32 = |v: Vec<f64>| v.into_iter().map(|x| x as f32).collect::<Vec<f32>>();
    let side = fixed_side as f64;
    let fixed = FeatureMap::from_fn(fixed_side, fixed_side, channels, |r, c| {
        to_f32(field([
            (c as f64 + 0.5) / side * extents[0],
            (r as f64 + 0.5) / side * extents[1],
        ]))
    })?;
    let scales = scale_tags
        .iter()
        .map(|&tag| {
            let (h, w) = grid_for_tag(extents, tag);
            let extent = h.max(w) as f64;
            let map = FeatureMap::from_fn(h, w, channels, |r, c| {
                to_f32(field([
                    (c as f64 + 0.5) / extent,
                    (r as f64 + 0.5) / extent,
                ]))
            })?;
            Ok((tag, map))
        })
        .collect::<Result<Vec<_>, FeatureError>>()?;
    FeaturePyramid::new(id, fixed, scales)
}
