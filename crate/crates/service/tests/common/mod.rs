#![allow(dead_code)]

use std::path::{Path, PathBuf};

use collate_core::collation::CorrespondenceSet;
use collate_core::feature_store::{
    random_permutation, save_manuscript, synth_manuscripts, SynthSpec,
};
use collate_core::similarity::Method;
use collate_service::{PipelineConfig, Project};

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub project: Project,
    pub truth: CorrespondenceSet,
    pub permutation: Vec<usize>,
}

impl Fixture {
    pub fn path(&self) -> &Path {
        self.dir.path()
    }
}

/// Writes a synthetic manuscript pair under `root/features` and returns the
/// two manifest paths with the ground truth and permutation.
pub fn write_pair(
    root: &Path,
    seed: u64,
    n: usize,
    noise: f64,
) -> (PathBuf, PathBuf, CorrespondenceSet, Vec<usize>) {
    let permutation = random_permutation(seed, n);
    let spec = SynthSpec::new(seed, n, 8)
        .with_noise(noise)
        .with_permutation(permutation.clone());
    let (a, b, truth) = synth_manuscripts(&spec).unwrap();
    let ma = save_manuscript(&a, &root.join("features/A")).unwrap();
    let mb = save_manuscript(&b, &root.join("features/B")).unwrap();
    (ma, mb, truth, permutation)
}

/// A project holding manuscripts `A` and `B`.
pub fn fixture(seed: u64, n: usize, noise: f64, method: Method) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let (ma, mb, truth, permutation) = write_pair(dir.path(), seed, n, noise);
    let config = PipelineConfig {
        method,
        ..PipelineConfig::default()
    };
    let mut project = Project::create(dir.path().join("project"), "test", config).unwrap();
    project.add_manuscript(&ma).unwrap();
    project.add_manuscript(&mb).unwrap();
    Fixture {
        dir,
        project,
        truth,
        permutation,
    }
}
