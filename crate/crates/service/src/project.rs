//! On-disk project layout and the operations that mutate it.
//!
//! ```text
//! <dir>/project.json                 metadata, annotations, stage records
//! <dir>/pairs/<a>__<b>/<stage>-<hash>.json (+ .fmap)   stage outputs
//! ```
//!
//! Stage outputs are named after the hash of their inputs, so a record in
//! `project.json` always points at the content it describes even if a later
//! run is interrupted before the metadata is rewritten.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use collate_core::collation::{
    top_k, top_k_masked, Correspondence, CorrespondenceSet, Direction, Source, Status,
};
use collate_core::feature_store::{load_manuscript, Manifest, ManuscriptFeatures};
use collate_core::matrix::{NormalizationScheme, PropagationConfig, Provenance, SimilarityMatrix};
use collate_core::similarity::{Method, SimilarityConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ServiceError;
use crate::images::ImageStore;

pub const PROJECT_FILE: &str = "project.json";
const PAIRS_DIR: &str = "pairs";

/// One step of the per-pair pipeline, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Similarity,
    Normalize,
    Propagate,
    Match,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::Similarity,
        Stage::Normalize,
        Stage::Propagate,
        Stage::Match,
    ];

    /// The stage whose output this one consumes.
    pub fn upstream(self) -> Option<Stage> {
        match self {
            Stage::Similarity => None,
            Stage::Normalize => Some(Stage::Similarity),
            Stage::Propagate => Some(Stage::Normalize),
            Stage::Match => Some(Stage::Propagate),
        }
    }

    /// Provenance of the matrix a stage produces; `Match` produces
    /// correspondences instead.
    pub fn provenance(self) -> Option<Provenance> {
        match self {
            Stage::Similarity => Some(Provenance::Raw),
            Stage::Normalize => Some(Provenance::Normalized),
            Stage::Propagate => Some(Provenance::Propagated),
            Stage::Match => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Similarity => "similarity",
            Stage::Normalize => "normalize",
            Stage::Propagate => "propagate",
            Stage::Match => "match",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "similarity" | "sim" => Ok(Stage::Similarity),
            "normalize" => Ok(Stage::Normalize),
            "propagate" => Ok(Stage::Propagate),
            "match" => Ok(Stage::Match),
            other => Err(ServiceError::InvalidArgument(format!(
                "unknown stage {other:?}"
            ))),
        }
    }
}

/// How the match stage turns the propagated matrix into correspondences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchAlgorithm {
    #[default]
    Greedy,
    Argmax,
}

impl FromStr for MatchAlgorithm {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(MatchAlgorithm::Greedy),
            "argmax" => Ok(MatchAlgorithm::Argmax),
            other => Err(ServiceError::InvalidArgument(format!(
                "unknown match algorithm {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub method: Method,
    pub similarity: SimilarityConfig,
    pub normalization: NormalizationScheme,
    pub propagation: PropagationConfig,
    #[serde(default)]
    pub matching: MatchAlgorithm,
    /// Similarity worker threads, `0` for one per core. Results do not
    /// depend on it.
    #[serde(default)]
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            method: Method::Trans,
            similarity: SimilarityConfig::default(),
            normalization: NormalizationScheme::over_max(),
            propagation: PropagationConfig::default(),
            matching: MatchAlgorithm::Greedy,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManuscriptRef {
    pub id: String,
    /// Manifest path, relative to the project directory when it lies inside
    /// it.
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Hash of everything the stage output depends on.
    pub hash: String,
    /// Output file, relative to the project directory.
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub stages: BTreeMap<Stage, StageRecord>,
    pub annotations: CorrespondenceSet,
}

impl PairRecord {
    fn new(a: &str, b: &str) -> Self {
        Self {
            a: a.to_owned(),
            b: b.to_owned(),
            stages: BTreeMap::new(),
            annotations: CorrespondenceSet::new(a, b),
        }
    }
}

/// Everything persisted in `project.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub project_id: String,
    pub revision: u64,
    pub manuscripts: Vec<ManuscriptRef>,
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub pairs: Vec<PairRecord>,
    #[serde(default)]
    pub images: ImageStore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(ServiceError::InvalidArgument(format!(
                "unknown export format {other:?}"
            ))),
        }
    }
}

/// One retrieval candidate for a query illustration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub index: usize,
    pub illustration_id: String,
    pub score: f64,
    /// Annotation status of the `(query, candidate)` pair, if any.
    pub status: Option<Status>,
}

#[derive(Debug, Clone)]
pub(crate) struct LoadedManuscript {
    pub features: Arc<ManuscriptFeatures>,
    /// Hash of the manifest and every feature file it references.
    pub content_hash: String,
}

type PairKey = (String, String);

/// A project loaded in memory. Cloning is cheap: features and stage outputs
/// are shared.
#[derive(Debug, Clone)]
pub struct Project {
    dir: PathBuf,
    meta: ProjectMeta,
    manuscripts: BTreeMap<String, LoadedManuscript>,
    matrices: HashMap<(PairKey, Stage), Arc<SimilarityMatrix>>,
    matches: HashMap<PairKey, Arc<CorrespondenceSet>>,
}

impl Project {
    /// Creates an empty project in `dir`, which must not already hold one.
    pub fn create(
        dir: impl Into<PathBuf>,
        project_id: impl Into<String>,
        pipeline: PipelineConfig,
    ) -> Result<Self, ServiceError> {
        let dir = dir.into();
        if dir.join(PROJECT_FILE).exists() {
            return Err(ServiceError::Project(format!(
                "{} already contains a project",
                dir.display()
            )));
        }
        fs::create_dir_all(&dir)?;
        let project = Self {
            dir,
            meta: ProjectMeta {
                project_id: project_id.into(),
                revision: 0,
                manuscripts: Vec::new(),
                pipeline,
                pairs: Vec::new(),
                images: ImageStore::default(),
            },
            manuscripts: BTreeMap::new(),
            matrices: HashMap::new(),
            matches: HashMap::new(),
        };
        project.save_meta()?;
        Ok(project)
    }

    /// Loads a project with all its manuscripts and stage outputs.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let dir = dir.into();
        let text = fs::read_to_string(dir.join(PROJECT_FILE))?;
        let meta: ProjectMeta = serde_json::from_str(&text)?;
        let mut project = Self {
            dir,
            meta,
            manuscripts: BTreeMap::new(),
            matrices: HashMap::new(),
            matches: HashMap::new(),
        };
        for r in project.meta.manuscripts.clone() {
            let loaded = load_with_hash(&project.dir.join(&r.manifest))?;
            if loaded.features.manuscript_id() != r.id {
                return Err(ServiceError::Project(format!(
                    "manifest {} now declares manuscript {:?}, expected {:?}",
                    r.manifest.display(),
                    loaded.features.manuscript_id(),
                    r.id
                )));
            }
            project.manuscripts.insert(r.id, loaded);
        }
        for pair in &project.meta.pairs {
            project.check_pair(&pair.a, &pair.b)?;
            let key = (pair.a.clone(), pair.b.clone());
            for (&stage, record) in &pair.stages {
                let path = project.dir.join(&record.file);
                if stage == Stage::Match {
                    let set = CorrespondenceSet::from_json(&fs::read_to_string(&path)?)?;
                    project.matches.insert(key.clone(), Arc::new(set));
                } else {
                    let m = SimilarityMatrix::load(&path)?;
                    project.matrices.insert((key.clone(), stage), Arc::new(m));
                }
            }
        }
        Ok(project)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn meta(&self) -> &ProjectMeta {
        &self.meta
    }

    pub fn project_id(&self) -> &str {
        &self.meta.project_id
    }

    pub fn revision(&self) -> u64 {
        self.meta.revision
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.meta.pipeline
    }

    pub fn images(&self) -> &ImageStore {
        &self.meta.images
    }

    pub fn manuscript_ids(&self) -> impl Iterator<Item = &str> {
        self.meta.manuscripts.iter().map(|r| r.id.as_str())
    }

    pub fn features(&self, id: &str) -> Result<&Arc<ManuscriptFeatures>, ServiceError> {
        self.loaded(id).map(|m| &m.features)
    }

    pub(crate) fn loaded(&self, id: &str) -> Result<&LoadedManuscript, ServiceError> {
        self.manuscripts
            .get(id)
            .ok_or_else(|| ServiceError::UnknownManuscript(id.to_owned()))
    }

    /// Loads the manuscript at `manifest` into the project and returns its id.
    pub fn add_manuscript(&mut self, manifest: &Path) -> Result<String, ServiceError> {
        let loaded = load_with_hash(manifest)?;
        let id = loaded.features.manuscript_id().to_owned();
        if self.manuscripts.contains_key(&id) {
            return Err(ServiceError::DuplicateManuscript(id));
        }
        let stored = match (fs::canonicalize(manifest), fs::canonicalize(&self.dir)) {
            (Ok(m), Ok(d)) => m.strip_prefix(&d).map(Path::to_path_buf).unwrap_or(m),
            _ => manifest.to_path_buf(),
        };
        self.meta.manuscripts.push(ManuscriptRef {
            id: id.clone(),
            manifest: stored,
        });
        self.manuscripts.insert(id.clone(), loaded);
        self.commit()?;
        Ok(id)
    }

    pub fn set_pipeline_config(&mut self, pipeline: PipelineConfig) -> Result<(), ServiceError> {
        pipeline.similarity.validate()?;
        pipeline.propagation.validate()?;
        self.meta.pipeline = pipeline;
        self.commit()
    }

    /// Registers image files for an illustration.
    pub fn set_image(
        &mut self,
        illustration_id: &str,
        entry: crate::ImageEntry,
    ) -> Result<(), ServiceError> {
        self.meta.images.insert(illustration_id, entry);
        self.commit()
    }

    /// Annotated illustration ids with no image entry at all. Entries that
    /// are explicitly marked missing count as resolved.
    pub fn unresolved_images(&self) -> Vec<String> {
        let mut ids = BTreeSet::new();
        for pair in &self.meta.pairs {
            for e in pair.annotations.iter() {
                for (m, index) in [(&pair.a, e.i), (&pair.b, e.j)] {
                    if let Some(p) = self
                        .manuscripts
                        .get(m)
                        .and_then(|l| l.features.pyramids().get(index))
                    {
                        if !self.meta.images.contains(p.illustration_id()) {
                            ids.insert(p.illustration_id().to_owned());
                        }
                    }
                }
            }
        }
        ids.into_iter().collect()
    }

    pub fn pair(&self, a: &str, b: &str) -> Option<&PairRecord> {
        self.meta.pairs.iter().find(|p| p.a == a && p.b == b)
    }

    pub(crate) fn pair_mut(&mut self, a: &str, b: &str) -> &mut PairRecord {
        let at = match self.meta.pairs.iter().position(|p| p.a == a && p.b == b) {
            Some(at) => at,
            None => {
                self.meta.pairs.push(PairRecord::new(a, b));
                self.meta.pairs.len() - 1
            }
        };
        &mut self.meta.pairs[at]
    }

    pub fn stage_record(&self, a: &str, b: &str, stage: Stage) -> Option<&StageRecord> {
        self.pair(a, b).and_then(|p| p.stages.get(&stage))
    }

    /// The matrix produced by `stage` (not `Match`) for the pair, if any.
    pub fn matrix(&self, a: &str, b: &str, stage: Stage) -> Option<Arc<SimilarityMatrix>> {
        self.matrices
            .get(&((a.to_owned(), b.to_owned()), stage))
            .cloned()
    }

    /// The most processed matrix available for the pair.
    pub fn latest_matrix(&self, a: &str, b: &str) -> Option<(Stage, Arc<SimilarityMatrix>)> {
        [Stage::Propagate, Stage::Normalize, Stage::Similarity]
            .into_iter()
            .find_map(|s| self.matrix(a, b, s).map(|m| (s, m)))
    }

    /// Output of the last match stage.
    pub fn matches(&self, a: &str, b: &str) -> Option<Arc<CorrespondenceSet>> {
        self.matches.get(&(a.to_owned(), b.to_owned())).cloned()
    }

    /// Reviewer annotations for the pair (confirmed and rejected entries).
    pub fn annotations(&self, a: &str, b: &str) -> CorrespondenceSet {
        self.pair(a, b)
            .map(|p| p.annotations.clone())
            .unwrap_or_else(|| CorrespondenceSet::new(a, b))
    }

    pub(crate) fn check_pair(&self, a: &str, b: &str) -> Result<(usize, usize), ServiceError> {
        Ok((self.features(a)?.len(), self.features(b)?.len()))
    }

    fn check_indices(&self, a: &str, b: &str, i: usize, j: usize) -> Result<(), ServiceError> {
        let (rows, cols) = self.check_pair(a, b)?;
        if i >= rows {
            return Err(ServiceError::IndexOutOfRange {
                axis: "row",
                index: i,
                len: rows,
            });
        }
        if j >= cols {
            return Err(ServiceError::IndexOutOfRange {
                axis: "column",
                index: j,
                len: cols,
            });
        }
        Ok(())
    }

    /// Records `(i, j)` as a true correspondence, replacing a rejection.
    pub fn confirm(
        &mut self,
        a: &str,
        b: &str,
        i: usize,
        j: usize,
    ) -> Result<Correspondence, ServiceError> {
        self.annotate(a, b, i, j, Status::Confirmed)
    }

    /// Records `(i, j)` as a false correspondence, replacing a confirmation.
    pub fn reject(
        &mut self,
        a: &str,
        b: &str,
        i: usize,
        j: usize,
    ) -> Result<Correspondence, ServiceError> {
        self.annotate(a, b, i, j, Status::Rejected)
    }

    fn annotate(
        &mut self,
        a: &str,
        b: &str,
        i: usize,
        j: usize,
        status: Status,
    ) -> Result<Correspondence, ServiceError> {
        self.check_indices(a, b, i, j)?;
        let score = self.latest_matrix(a, b).map_or(0.0, |(_, m)| m.get(i, j));
        let entry = Correspondence {
            i,
            j,
            status,
            score,
            source: Source::Manual,
        };
        self.pair_mut(a, b).annotations.insert(entry);
        self.commit()?;
        Ok(entry)
    }

    /// The `k` best partners of query `i` in the most processed matrix,
    /// optionally hiding rejected pairs.
    pub fn candidates(
        &self,
        a: &str,
        b: &str,
        i: usize,
        direction: Direction,
        k: usize,
        mask_rejected: bool,
    ) -> Result<(Stage, Vec<Candidate>), ServiceError> {
        self.check_pair(a, b)?;
        let (stage, m) = self
            .latest_matrix(a, b)
            .ok_or_else(|| ServiceError::MissingStage {
                a: a.to_owned(),
                b: b.to_owned(),
                stage: Stage::Similarity,
            })?;
        let annotations = self.annotations(a, b);
        let ranked = if mask_rejected {
            top_k_masked(&m, i, direction, k, &annotations)?
        } else {
            top_k(&m, i, direction, k)?
        };
        let partner = self.features(match direction {
            Direction::Rows => b,
            Direction::Cols => a,
        })?;
        let candidates = ranked
            .into_iter()
            .map(|(other, score)| {
                let (r, c) = match direction {
                    Direction::Rows => (i, other),
                    Direction::Cols => (other, i),
                };
                Candidate {
                    index: other,
                    illustration_id: partner.pyramids()[other].illustration_id().to_owned(),
                    score,
                    status: annotations.status(r, c),
                }
            })
            .collect();
        Ok((stage, candidates))
    }

    /// Predicted matches with reviewer decisions applied, followed by any
    /// annotation the matcher did not propose.
    pub fn export(&self, a: &str, b: &str) -> Result<CorrespondenceSet, ServiceError> {
        self.check_pair(a, b)?;
        let annotations = self.annotations(a, b);
        let matches = self.matches(a, b);
        if matches.is_none() && annotations.is_empty() {
            return Err(ServiceError::NothingToExport(a.to_owned(), b.to_owned()));
        }
        let mut out = CorrespondenceSet::new(a, b);
        if let Some(matches) = matches {
            for e in matches.iter() {
                let status = annotations.status(e.i, e.j).unwrap_or(e.status);
                out.insert(Correspondence { status, ..*e });
            }
        }
        for e in annotations.iter() {
            if !out.contains(e.i, e.j) {
                out.insert(*e);
            }
        }
        Ok(out)
    }

    pub fn export_to<W: Write>(
        &self,
        a: &str,
        b: &str,
        format: ExportFormat,
        mut sink: W,
    ) -> Result<(), ServiceError> {
        let set = self.export(a, b)?;
        match format {
            ExportFormat::Json => {
                sink.write_all(set.to_json()?.as_bytes())?;
                sink.write_all(b"\n")?;
            }
            ExportFormat::Csv => set.write_csv(sink)?,
        }
        Ok(())
    }

    /// Replaces the pair's matches and annotations with an exported set:
    /// every entry becomes a match, and confirmed or rejected entries also
    /// become annotations. Exporting afterwards reproduces `set`.
    pub fn import(
        &mut self,
        a: &str,
        b: &str,
        set: &CorrespondenceSet,
    ) -> Result<(), ServiceError> {
        for e in set.iter() {
            self.check_indices(a, b, e.i, e.j)?;
        }
        let set = CorrespondenceSet::from_entries(a, b, set.iter().copied());
        let annotations = CorrespondenceSet::from_entries(
            a,
            b,
            set.iter()
                .filter(|e| e.status != Status::Predicted)
                .copied(),
        );
        let text = set.to_json()?;
        let hash = format!("imported-{}", hex::encode(Sha256::digest(text.as_bytes())));
        self.store_matches(a, b, set, &hash)?;
        self.pair_mut(a, b).annotations = annotations;
        self.commit()
    }

    pub fn import_from<R: Read>(
        &mut self,
        a: &str,
        b: &str,
        format: ExportFormat,
        mut source: R,
    ) -> Result<(), ServiceError> {
        let set = match format {
            ExportFormat::Json => {
                let mut text = String::new();
                source.read_to_string(&mut text)?;
                CorrespondenceSet::from_json(&text)?
            }
            ExportFormat::Csv => CorrespondenceSet::read_csv(source, a, b)?,
        };
        self.import(a, b, &set)
    }

    fn pair_dir(&self, a: &str, b: &str) -> PathBuf {
        let clean = |s: &str| -> String {
            s.chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                        c
                    } else {
                        '_'
                    }
                })
                .collect()
        };
        // The digest keeps sanitized names from colliding.
        let digest = hex::encode(&Sha256::digest(format!("{a}\0{b}").as_bytes())[..4]);
        PathBuf::from(PAIRS_DIR).join(format!("{}__{}_{digest}", clean(a), clean(b)))
    }

    fn output_path(&self, a: &str, b: &str, stage: Stage, hash: &str) -> PathBuf {
        let short = &hash[hash.len().saturating_sub(16)..];
        self.pair_dir(a, b).join(format!("{stage}-{short}.json"))
    }

    /// Writes a stage matrix and records it. The caller commits.
    pub(crate) fn store_matrix(
        &mut self,
        a: &str,
        b: &str,
        stage: Stage,
        m: SimilarityMatrix,
        hash: &str,
    ) -> Result<(), ServiceError> {
        let rel = self.output_path(a, b, stage, hash);
        fs::create_dir_all(self.dir.join(rel.parent().expect("pair dir")))?;
        m.save(&self.dir.join(&rel))?;
        self.record(a, b, stage, hash, rel);
        self.matrices
            .insert(((a.to_owned(), b.to_owned()), stage), Arc::new(m));
        Ok(())
    }

    /// Writes match output and records it. The caller commits.
    pub(crate) fn store_matches(
        &mut self,
        a: &str,
        b: &str,
        set: CorrespondenceSet,
        hash: &str,
    ) -> Result<(), ServiceError> {
        let rel = self.output_path(a, b, Stage::Match, hash);
        fs::create_dir_all(self.dir.join(rel.parent().expect("pair dir")))?;
        write_atomic(
            &self.dir.join(&rel),
            format!("{}\n", set.to_json()?).as_bytes(),
        )?;
        self.record(a, b, Stage::Match, hash, rel);
        self.matches
            .insert((a.to_owned(), b.to_owned()), Arc::new(set));
        Ok(())
    }

    fn record(&mut self, a: &str, b: &str, stage: Stage, hash: &str, file: PathBuf) {
        let previous = self.pair_mut(a, b).stages.insert(
            stage,
            StageRecord {
                hash: hash.to_owned(),
                file: file.clone(),
            },
        );
        if let Some(old) = previous.filter(|old| old.file != file) {
            self.remove_output(&old.file, stage);
        }
    }

    fn remove_output(&self, rel: &Path, stage: Stage) {
        let path = self.dir.join(rel);
        let _ = fs::remove_file(&path);
        if stage != Stage::Match {
            let _ = fs::remove_file(path.with_extension("fmap"));
        }
    }

    /// Bumps the revision and persists the metadata.
    pub(crate) fn commit(&mut self) -> Result<(), ServiceError> {
        self.meta.revision += 1;
        self.save_meta()
    }

    fn save_meta(&self) -> Result<(), ServiceError> {
        let text = serde_json::to_string_pretty(&self.meta)?;
        write_atomic(&self.dir.join(PROJECT_FILE), format!("{text}\n").as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ServiceError> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Loads a manuscript and hashes the manifest plus every file it references.
fn load_with_hash(manifest_path: &Path) -> Result<LoadedManuscript, ServiceError> {
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut hasher = Sha256::new();
    let mut feed = |bytes: &[u8]| {
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    };
    feed(&fs::read(manifest_path)?);
    for entry in &manifest.illustrations {
        feed(&fs::read(base.join(&entry.fixed_map))?);
        for rel in entry.scales.values() {
            feed(&fs::read(base.join(rel))?);
        }
    }
    let content_hash = hex::encode(hasher.finalize());
    let features = load_manuscript(manifest_path)?;
    Ok(LoadedManuscript {
        features: Arc::new(features),
        content_hash,
    })
}
