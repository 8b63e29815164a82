//! Per-pair pipeline orchestration with content-hash skipping.
//!
//! Each stage's hash covers its upstream stage's hash plus the settings and
//! annotations it reads, so the chain can be evaluated without touching any
//! matrix. A stage is current when its recorded hash equals the expected
//! one; current stages are skipped, and a stage may only run when its
//! upstream is current or runs earlier in the same request.

use std::collections::{BTreeMap, BTreeSet};

use collate_core::collation::{argmax_correspondences, greedy_one_to_one, Direction, Status};
use collate_core::matrix::{
    normalize, propagate, two_cycle_seeds, SeedOrigin, SeedSet, SimilarityMatrix,
};
use collate_core::similarity::similarity_matrix_with_progress;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::ServiceError;
use crate::project::{MatchAlgorithm, Project, Stage};

/// What a pipeline run did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub computed: Vec<Stage>,
    pub skipped: Vec<Stage>,
    /// Project revision after the run.
    pub revision: u64,
    pub warnings: Vec<String>,
}

struct StageHasher(Sha256);

impl StageHasher {
    fn new(stage: Stage) -> Self {
        let mut h = Self(Sha256::new());
        h.field(stage.as_str().as_bytes());
        h
    }

    fn field(&mut self, bytes: &[u8]) -> &mut Self {
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
        self
    }

    fn json(&mut self, value: &impl Serialize) -> &mut Self {
        let text = serde_json::to_string(value).expect("settings serialize");
        self.field(text.as_bytes())
    }

    fn finish(&mut self) -> String {
        hex::encode(std::mem::take(&mut self.0).finalize())
    }
}

/// The hash each stage's output would carry if it were computed now.
pub fn stage_hashes(
    project: &Project,
    a: &str,
    b: &str,
) -> Result<BTreeMap<Stage, String>, ServiceError> {
    let cfg = project.config();
    let (ma, mb) = (project.loaded(a)?, project.loaded(b)?);
    let similarity = StageHasher::new(Stage::Similarity)
        .field(a.as_bytes())
        .field(ma.content_hash.as_bytes())
        .field(b.as_bytes())
        .field(mb.content_hash.as_bytes())
        .json(&cfg.method)
        .json(&cfg.similarity)
        .finish();
    let normalize = StageHasher::new(Stage::Normalize)
        .field(similarity.as_bytes())
        .json(&cfg.normalization)
        .finish();
    let annotations = project.annotations(a, b);
    let pairs_with = |status| -> BTreeSet<(usize, usize)> {
        annotations
            .with_status(status)
            .map(|e| (e.i, e.j))
            .collect()
    };
    let propagate = StageHasher::new(Stage::Propagate)
        .field(normalize.as_bytes())
        .json(&cfg.propagation)
        .json(&pairs_with(Status::Confirmed))
        .json(&pairs_with(Status::Rejected))
        .finish();
    let matching = StageHasher::new(Stage::Match)
        .field(propagate.as_bytes())
        .json(&cfg.matching)
        .finish();
    Ok(BTreeMap::from([
        (Stage::Similarity, similarity),
        (Stage::Normalize, normalize),
        (Stage::Propagate, propagate),
        (Stage::Match, matching),
    ]))
}

/// Stages whose recorded output matches the expected hash.
pub(crate) fn current_stages(
    project: &Project,
    a: &str,
    b: &str,
    hashes: &BTreeMap<Stage, String>,
) -> BTreeSet<Stage> {
    Stage::ALL
        .into_iter()
        .filter(|&s| {
            let recorded = project.stage_record(a, b, s).map(|r| &r.hash) == Some(&hashes[&s]);
            let loaded = match s {
                Stage::Match => project.matches(a, b).is_some(),
                _ => project.matrix(a, b, s).is_some(),
            };
            recorded && loaded
        })
        .collect()
}

/// Checks that every requested stage has a usable upstream.
pub(crate) fn check_plan(
    project: &Project,
    a: &str,
    b: &str,
    stages: &[Stage],
) -> Result<BTreeSet<Stage>, ServiceError> {
    project.check_pair(a, b)?;
    if stages.is_empty() {
        return Err(ServiceError::InvalidArgument("no stages requested".into()));
    }
    let requested: BTreeSet<Stage> = stages.iter().copied().collect();
    let current = current_stages(project, a, b, &stage_hashes(project, a, b)?);
    let mut available = BTreeSet::new();
    for s in Stage::ALL {
        let upstream_ok = s.upstream().is_none_or(|up| available.contains(&up));
        if requested.contains(&s) && !upstream_ok {
            return Err(ServiceError::StageOrder {
                stage: s,
                missing: s.upstream().expect("has upstream"),
            });
        }
        if current.contains(&s) || requested.contains(&s) {
            available.insert(s);
        }
    }
    Ok(requested)
}

/// Runs the requested stages for pair `(a, b)`; see [`run_pipeline_with_progress`].
pub fn run_pipeline(
    project: &mut Project,
    a: &str,
    b: &str,
    stages: &[Stage],
) -> Result<RunReport, ServiceError> {
    run_pipeline_with_progress(project, a, b, stages, &|_, _, _| {})
}

/// Runs the requested stages for pair `(a, b)` in pipeline order, skipping
/// those whose inputs are unchanged. The revision is bumped once if
/// anything was recomputed. `progress(stage, done, total)` reports
/// similarity pairs as they finish.
///
/// The propagate stage seeds with the 2-cycle-consistent pairs of the
/// normalized matrix plus every confirmed annotation, minus every rejected
/// one. Stored matrices are single precision, so each output is rounded to
/// `f32` before later stages read it; a resumed pipeline therefore sees the
/// same values as an uninterrupted one.
pub fn run_pipeline_with_progress(
    project: &mut Project,
    a: &str,
    b: &str,
    stages: &[Stage],
    progress: &(dyn Fn(Stage, usize, usize) + Sync),
) -> Result<RunReport, ServiceError> {
    let requested = check_plan(project, a, b, stages)?;
    let hashes = stage_hashes(project, a, b)?;
    let current = current_stages(project, a, b, &hashes);
    let mut report = RunReport {
        computed: Vec::new(),
        skipped: Vec::new(),
        revision: project.revision(),
        warnings: Vec::new(),
    };
    for stage in requested {
        if current.contains(&stage) {
            tracing::debug!(%stage, a, b, "inputs unchanged, skipping");
            report.skipped.push(stage);
            continue;
        }
        tracing::info!(%stage, a, b, "computing");
        let hash = &hashes[&stage];
        let upstream = |s: Stage| {
            project
                .matrix(a, b, s)
                .ok_or_else(|| ServiceError::MissingStage {
                    a: a.to_owned(),
                    b: b.to_owned(),
                    stage: s,
                })
        };
        let cfg = project.config().clone();
        match stage {
            Stage::Similarity => {
                let (fa, fb) = (project.features(a)?.clone(), project.features(b)?.clone());
                let raw = similarity_matrix_with_progress(
                    &fa,
                    &fb,
                    cfg.method,
                    &cfg.similarity,
                    cfg.workers,
                    &|done, total| progress(stage, done, total),
                )?;
                project.store_matrix(a, b, stage, single_precision(&raw)?, hash)?;
            }
            Stage::Normalize => {
                let out = normalize(&*upstream(Stage::Similarity)?, &cfg.normalization)?;
                report
                    .warnings
                    .extend(out.warnings.iter().map(ToString::to_string));
                project.store_matrix(a, b, stage, single_precision(&out.matrix)?, hash)?;
            }
            Stage::Propagate => {
                let norm = upstream(Stage::Normalize)?;
                let seeds = propagation_seeds(project, a, b, &norm);
                let m = propagate(&norm, &seeds, &cfg.propagation)?.with_echo(
                    "seeds",
                    serde_json::json!({ "count": seeds.len(), "origin": seeds.origin }),
                );
                project.store_matrix(a, b, stage, single_precision(&m)?, hash)?;
            }
            Stage::Match => {
                let prop = upstream(Stage::Propagate)?;
                let set = match cfg.matching {
                    MatchAlgorithm::Greedy => greedy_one_to_one(&prop),
                    MatchAlgorithm::Argmax => argmax_correspondences(&prop, Direction::Rows),
                };
                project.store_matches(a, b, set, hash)?;
            }
        }
        report.computed.push(stage);
    }
    if !report.computed.is_empty() {
        project.commit()?;
    }
    report.revision = project.revision();
    Ok(report)
}

/// Cycle-consistent seeds of `norm`, plus confirmed pairs, minus rejected
/// pairs.
pub(crate) fn propagation_seeds(
    project: &Project,
    a: &str,
    b: &str,
    norm: &SimilarityMatrix,
) -> SeedSet {
    let annotations = project.annotations(a, b);
    let confirmed = SeedSet::from_pairs(
        SeedOrigin::Confirmed,
        annotations
            .with_status(Status::Confirmed)
            .map(|e| (e.i, e.j)),
    );
    let mut seeds = two_cycle_seeds(norm);
    if !confirmed.is_empty() {
        seeds = seeds.union(&confirmed);
    }
    for e in annotations.with_status(Status::Rejected) {
        seeds.remove(e.i, e.j);
    }
    seeds
}

fn single_precision(m: &SimilarityMatrix) -> Result<SimilarityMatrix, ServiceError> {
    Ok(m.map_values(|_, _, v| v as f32 as f64)?)
}
