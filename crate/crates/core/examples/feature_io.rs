//! Write a synthetic manuscript to disk as FMAP files plus a manifest, read
//! it back, and show what validation catches.
//!
//! ```bash
//! cargo run -p collate-core --example feature_io
//! ```

use std::fs;

use collate_core::feature_store::{
    load_manuscript, read_feature_map, save_manuscript, synth_manuscripts, FeatureMap, SynthSpec,
    FMAP_HEADER_LEN,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let (manuscript, _, _) = synth_manuscripts(&SynthSpec::new(42, 3, 32))?;
    let manifest = save_manuscript(&manuscript, dir.path())?;
    println!("wrote {}", manifest.display());
    println!(
        "{}",
        fs::read_to_string(&manifest)?
            .lines()
            .take(12)
            .collect::<Vec<_>>()
            .join("\n")
    );

    let loaded = load_manuscript(&manifest)?;
    for p in loaded.pyramids() {
        let shapes: Vec<String> = p
            .scale_maps()
            .iter()
            .map(|(tag, m)| format!("{tag}:{}x{}", m.height(), m.width()))
            .collect();
        println!(
            "{}  fixed {}x{}x{}  scales {}",
            p.illustration_id(),
            p.fixed_map().height(),
            p.fixed_map().width(),
            p.channels(),
            shapes.join(" ")
        );
    }

    // A 1x1x1 map is a 24-byte header plus one little-endian f32.
    let tiny = FeatureMap::new(1, 1, 1, vec![0.5])?;
    let bytes = tiny.to_bytes();
    println!(
        "1x1x1 map: {} bytes (header {FMAP_HEADER_LEN})",
        bytes.len()
    );

    let mut corrupt = bytes.clone();
    corrupt[0] = b'X';
    println!(
        "bad magic -> {}",
        read_feature_map(corrupt.as_slice()).unwrap_err()
    );
    println!(
        "truncated -> {}",
        read_feature_map(&bytes[..26]).unwrap_err()
    );
    Ok(())
}
