//! Score every illustration pair of two manuscripts with each method and
//! report how often the true partner is the row maximum.
//!
//! ```bash
//! cargo run --release -p collate-core --example similarity_matrix
//! ```

use std::time::Instant;

use collate_core::collation::{accuracy, argmax_correspondences, Direction};
use collate_core::feature_store::{local_permutation, synth_manuscripts, SynthSpec};
use collate_core::similarity::{similarity_matrix, Method, SimilarityConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let n = 12;
    let spec = SynthSpec::new(2, n, 16)
        .with_noise(2.5)
        .with_shared_weight(0.6)
        .with_permutation(local_permutation(2, n, 3));
    let (a, b, truth) = synth_manuscripts(&spec)?;
    let cfg = SimilarityConfig::default();

    for method in Method::ALL {
        let start = Instant::now();
        let s = similarity_matrix(&a, &b, method, &cfg, 0)?;
        let acc = accuracy(
            &argmax_correspondences(&s, Direction::Rows),
            &argmax_correspondences(&s, Direction::Cols),
            &truth,
        )
        .expect("ground truth present");
        println!(
            "{method:>8}: {}x{} in {:>6.2?}, argmax accuracy {:.1}%",
            s.rows(),
            s.cols(),
            start.elapsed(),
            acc.avg
        );
    }
    Ok(())
}
