//! Extract correspondences with argmax and greedy one-to-one matching,
//! then print the evaluation report and export the matches.
//!
//! ```bash
//! cargo run --release -p collate-core --example collate_and_evaluate
//! ```

use collate_core::collation::{
    argmax_correspondences, evaluate, greedy_one_to_one, render_table, top_k, Direction,
    EvalOptions, EvalReport,
};
use collate_core::feature_store::{local_permutation, synth_manuscripts, SynthSpec};
use collate_core::matrix::{
    normalize, propagate, two_cycle_seeds, NormalizationScheme, PropagationConfig,
};
use collate_core::similarity::{similarity_matrix, Method, SimilarityConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let n = 16;
    let spec = SynthSpec::new(4, n, 16)
        .with_noise(3.0)
        .with_shared_weight(0.7)
        .with_permutation(local_permutation(4, n, 3));
    let (a, b, truth) = synth_manuscripts(&spec)?;
    let raw = similarity_matrix(&a, &b, Method::Matching, &SimilarityConfig::default(), 0)?;
    let norm = normalize(&raw, &NormalizationScheme::over_max())?.matrix;
    let prop = propagate(
        &norm,
        &two_cycle_seeds(&norm),
        &PropagationConfig::default(),
    )?;

    let options = EvalOptions {
        nn_ks: vec![1, 5],
        ..EvalOptions::default()
    };
    let raw_report = evaluate(&raw, &truth, &options)?;
    let prop_report = evaluate(&prop, &truth, &options)?;
    let greedy = greedy_one_to_one(&prop);
    let greedy_report = EvalReport::from_predictions(&greedy, &greedy, &truth);
    print!(
        "{}",
        render_table(&[
            ("A-B raw", &raw_report),
            ("A-B propagated", &prop_report),
            ("A-B greedy", &greedy_report)
        ])
    );

    println!(
        "\ncandidates for illustration 0: {:?}",
        top_k(&prop, 0, Direction::Rows, 3)?
    );
    let rows = argmax_correspondences(&prop, Direction::Rows);
    println!("row argmax predictions: {}", rows.len());

    let mut csv = Vec::new();
    greedy.write_csv(&mut csv)?;
    println!("\ngreedy matches (CSV, first lines):");
    for line in String::from_utf8(csv)?.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
