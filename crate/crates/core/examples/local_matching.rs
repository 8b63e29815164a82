//! Reciprocal multi-scale matching between two illustrations, and the
//! resulting feature, matching and transformation-aware similarities.
//!
//! ```bash
//! cargo run -p collate-core --example local_matching
//! ```

use collate_core::feature_store::{synth_manuscripts, SynthSpec};
use collate_core::similarity::{best_matches, s_features, s_matching, s_trans, SimilarityConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let (a, b, _) = synth_manuscripts(&SynthSpec::new(3, 2, 32).with_noise(1.0))?;
    let cfg = SimilarityConfig::default();
    let (p, q) = (&a.pyramids()[0], &b.pyramids()[0]);

    let source = p.scale(cfg.base_scale).expect("base scale present");
    let matches = best_matches(source, q)?;
    println!(
        "{} -> {}: {} of {} source features have a reciprocal match",
        p.illustration_id(),
        q.illustration_id(),
        matches.len(),
        source.len()
    );
    let mut per_scale = std::collections::BTreeMap::new();
    for m in matches.iter() {
        *per_scale.entry(m.tgt_scale_tag).or_insert(0) += 1;
    }
    println!("winning target scale counts: {per_scale:?}");
    for m in matches.iter().take(5) {
        println!(
            "  src {:>3} @ ({:.3}, {:.3})  ->  tgt {:>3} @ ({:.3}, {:.3}) scale {}  cos {:.3}",
            m.src_index,
            m.src_pos[0],
            m.src_pos[1],
            m.tgt_index,
            m.tgt_pos[0],
            m.tgt_pos[1],
            m.tgt_scale_tag,
            m.weight
        );
    }

    let other = &b.pyramids()[1];
    for (label, target) in [("same illustration", q), ("different illustration", other)] {
        println!(
            "{label:>22}: features {:.3}  matching {:.3}  trans {:.3}",
            s_features(p.fixed_map(), target.fixed_map())?,
            s_matching(p, target, &cfg)?,
            s_trans(p, target, &cfg)?
        );
    }
    Ok(())
}
