//! Manuscript manifests: a JSON index of FMAP files, one entry per
//! illustration in folio order.
//!
//! ```json
//! { "manuscript_id": "D1",
//!   "illustrations": [
//!     { "id": "f012r-1", "fixed_map": "f012r-1/fixed.fmap",
//!       "scales": { "18": "f012r-1/s18.fmap", "19": "...", "22": "..." } } ] }
//! ```
//!
//! Paths are relative to the manifest's directory.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureMap, FeaturePyramid, ManuscriptFeatures};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manuscript_id: String,
    pub illustrations: Vec<IllustrationEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IllustrationEntry {
    pub id: String,
    pub fixed_map: String,
    pub scales: BTreeMap<String, String>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, FeatureError> {
        let file = File::open(path).map_err(|e| missing_or_io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|source| FeatureError::Manifest {
            path: path.to_owned(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), FeatureError> {
        let file = File::create(path)?;
        serde_json::to_writer_pretty(BufWriter::new(file), self).map_err(|source| {
            FeatureError::Manifest {
                path: path.to_owned(),
                source,
            }
        })
    }
}

fn missing_or_io(path: &Path, e: std::io::Error) -> FeatureError {
    if e.kind() == std::io::ErrorKind::NotFound {
        FeatureError::MissingFile(path.to_owned())
    } else {
        FeatureError::Io(e)
    }
}

/// Loads and validates one FMAP file.
pub fn load_feature_map(path: &Path) -> Result<FeatureMap, FeatureError> {
    let file = File::open(path).map_err(|e| missing_or_io(path, e))?;
    FeatureMap::read_from(BufReader::new(file)).map_err(|source| FeatureError::File {
        path: path.to_owned(),
        source: Box::new(source),
    })
}

/// Loads every map referenced by the manifest at `manifest_path`, in
/// parallel, and validates the resulting pyramids.
pub fn load_manuscript(manifest_path: &Path) -> Result<ManuscriptFeatures, FeatureError> {
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let pyramids = manifest
        .illustrations
        .par_iter()
        .map(|entry| load_pyramid(base, entry))
        .collect::<Result<Vec<_>, _>>()?;
    ManuscriptFeatures::new(manifest.manuscript_id, pyramids)
}

fn load_pyramid(base: &Path, entry: &IllustrationEntry) -> Result<FeaturePyramid, FeatureError> {
    let fixed_map = load_feature_map(&base.join(&entry.fixed_map))?;
    let mut tagged = entry
        .scales
        .iter()
        .map(|(key, rel)| {
            let tag: u32 = key
                .trim()
                .parse()
                .map_err(|_| FeatureError::InvalidScaleKey(key.clone()))?;
            Ok((tag, base.join(rel)))
        })
        .collect::<Result<Vec<(u32, PathBuf)>, FeatureError>>()?;
    // Keys sort as strings in the JSON map; order numerically.
    tagged.sort_by_key(|(tag, _)| *tag);
    let scale_maps = tagged
        .into_iter()
        .map(|(tag, path)| Ok((tag, load_feature_map(&path)?)))
        .collect::<Result<Vec<_>, FeatureError>>()?;
    FeaturePyramid::new(entry.id.clone(), fixed_map, scale_maps)
}

/// Writes `features` under `dir` as FMAP files plus `manifest.json` and
/// returns the manifest path. File names are derived from the illustration
/// index, so arbitrary ids are safe.
pub fn save_manuscript(features: &ManuscriptFeatures, dir: &Path) -> Result<PathBuf, FeatureError> {
    fs::create_dir_all(dir)?;
    let mut illustrations = Vec::with_capacity(features.len());
    for (index, pyramid) in features.pyramids().iter().enumerate() {
        let stem = format!("ill{index:05}");
        let fixed_name = format!("{stem}_fixed.fmap");
        write_map_file(pyramid.fixed_map(), &dir.join(&fixed_name))?;
        let mut scales = BTreeMap::new();
        for (tag, map) in pyramid.scale_maps() {
            let name = format!("{stem}_s{tag}.fmap");
            write_map_file(map, &dir.join(&name))?;
            scales.insert(tag.to_string(), name);
        }
        illustrations.push(IllustrationEntry {
            id: pyramid.illustration_id().to_owned(),
            fixed_map: fixed_name,
            scales,
        });
    }
    let manifest = Manifest {
        manuscript_id: features.manuscript_id().to_owned(),
        illustrations,
    };
    let path = dir.join("manifest.json");
    manifest.write(&path)?;
    Ok(path)
}

fn write_map_file(map: &FeatureMap, path: &Path) -> Result<(), FeatureError> {
    map.write_to(BufWriter::new(File::create(path)?))?;
    Ok(())
}
