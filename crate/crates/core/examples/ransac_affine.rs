//! Fit an affine transform to matches contaminated by outliers.
//!
//! ```bash
//! cargo run -p collate-core --example ransac_affine
//! ```

use collate_core::similarity::{
    affine_objective, ransac_affine, AffineTransform, Match, MatchSet, SimilarityConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    run();
}

pub fn run() {
    let truth = AffineTransform {
        a: 0.92,
        b: 0.05,
        c: -0.04,
        d: 0.95,
        e: 0.06,
        f: 0.03,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let matches: Vec<Match> = (0..40)
        .map(|k| {
            let src = [rng.random::<f64>(), rng.random::<f64>()];
            // Every fourth match points somewhere random.
            let tgt = if k % 4 == 0 {
                [rng.random(), rng.random()]
            } else {
                truth.apply(src)
            };
            Match {
                src_pos: src,
                tgt_pos: tgt,
                weight: rng.random_range(0.5..1.0),
                src_index: k,
                tgt_index: k,
                tgt_scale_tag: 20,
            }
        })
        .collect();

    let cfg = SimilarityConfig::default();
    let fit = ransac_affine(&MatchSet::new("a", "b", matches.clone()), &cfg);
    println!("true      {truth:?}");
    println!("recovered {fit:?}");
    for (label, t) in [
        ("identity", AffineTransform::IDENTITY),
        ("true", truth),
        ("recovered", fit),
    ] {
        println!(
            "{label:>9} objective {:.4}",
            affine_objective(&t, &matches, cfg.sigma)
        );
    }
}
