//! Normalize a raw similarity matrix by rows and columns, find 2-cycle
//! seeds and propagate them, tracking accuracy at each stage.
//!
//! ```bash
//! cargo run --release -p collate-core --example normalize_propagate
//! ```

use collate_core::collation::{accuracy, argmax_correspondences, CorrespondenceSet, Direction};
use collate_core::feature_store::{local_permutation, synth_manuscripts, SynthSpec};
use collate_core::matrix::{
    normalize, propagate, two_cycle_seeds, Combine, NormalizationKind, NormalizationScheme,
    PropagationConfig, SimilarityMatrix,
};
use collate_core::similarity::{similarity_matrix, Method, SimilarityConfig};

fn acc(s: &SimilarityMatrix, truth: &CorrespondenceSet) -> f64 {
    accuracy(
        &argmax_correspondences(s, Direction::Rows),
        &argmax_correspondences(s, Direction::Cols),
        truth,
    )
    .map_or(f64::NAN, |a| a.avg)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let n = 24;
    let spec = SynthSpec::new(1, n, 16)
        .with_noise(3.4)
        .with_shared_weight(0.8)
        .with_permutation(local_permutation(1, n, 3));
    let (a, b, truth) = synth_manuscripts(&spec)?;
    let raw = similarity_matrix(&a, &b, Method::Matching, &SimilarityConfig::default(), 0)?;
    println!("raw                         {:5.1}%", acc(&raw, &truth));

    for kind in [
        NormalizationKind::OverMax,
        NormalizationKind::OverAvg,
        NormalizationKind::Softmax,
        NormalizationKind::SoftmaxOverMax,
    ] {
        let scheme = NormalizationScheme::new(kind, None, Combine::Sum)?;
        let out = normalize(&raw, &scheme)?;
        println!(
            "{:<27} {:5.1}%  ({} zero-denominator warnings)",
            format!("{kind:?}"),
            acc(&out.matrix, &truth),
            out.warnings.len()
        );
    }

    let norm = normalize(&raw, &NormalizationScheme::over_max())?.matrix;
    let seeds = two_cycle_seeds(&norm);
    let correct = seeds.iter().filter(|&(i, j)| truth.contains(i, j)).count();
    println!("2-cycle seeds: {} ({} correct)", seeds.len(), correct);
    let prop = propagate(&norm, &seeds, &PropagationConfig::default())?;
    println!("over_max + propagation      {:5.1}%", acc(&prop, &truth));
    Ok(())
}
