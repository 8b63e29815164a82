//! A reviewer's session: build a project from two synthetic manuscripts, run
//! the pipeline, confirm one correspondence and watch propagation re-rank
//! the neighbouring queries.
//!
//! Run with `cargo run -p collate-service --example review_session`.

use std::error::Error;

use collate_core::collation::{Direction, EvalReport};
use collate_core::feature_store::{
    local_permutation, save_manuscript, synth_manuscripts, SynthSpec,
};
use collate_core::similarity::Method;
use collate_service::{PipelineConfig, Project, ProjectService, Stage};

fn main() -> Result<(), Box<dyn Error>> {
    run()
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let n = 24;
    let permutation = local_permutation(3, n, 3);
    let spec = SynthSpec::new(3, n, 16)
        .with_noise(4.0)
        .with_shared_weight(0.8)
        .with_permutation(permutation.clone());
    let (a, b, truth) = synth_manuscripts(&spec)?;

    let dir = tempfile::tempdir()?;
    let ma = save_manuscript(&a, &dir.path().join("features/A"))?;
    let mb = save_manuscript(&b, &dir.path().join("features/B"))?;
    let config = PipelineConfig {
        method: Method::Matching,
        ..PipelineConfig::default()
    };
    let mut project = Project::create(dir.path().join("project"), "demo", config)?;
    project.add_manuscript(&ma)?;
    project.add_manuscript(&mb)?;
    let service = ProjectService::new(project);

    let rank_of_truth = |svc: &ProjectService, i: usize| -> usize {
        let (_, list) = svc
            .snapshot()
            .candidates("A", "B", i, Direction::Rows, n, true)
            .expect("candidates");
        list.iter()
            .position(|c| c.index == permutation[i])
            .expect("true partner listed")
            + 1
    };
    let ranks =
        |svc: &ProjectService| -> Vec<usize> { (0..n).map(|i| rank_of_truth(svc, i)).collect() };
    let summary = |label: &str, r: &[usize]| {
        let top1 = r.iter().filter(|&&x| x == 1).count();
        println!("{label:<24} true partner ranked first for {top1}/{n} queries");
    };

    let report = service.run_blocking("A", "B", &[Stage::Similarity, Stage::Normalize])?;
    println!(
        "computed {:?} -> revision {}",
        report.computed, report.revision
    );
    let normalized = ranks(&service);
    summary("normalized:", &normalized);

    let report = service.run_blocking("A", "B", &[Stage::Propagate, Stage::Match])?;
    println!(
        "computed {:?} -> revision {}",
        report.computed, report.revision
    );
    let propagated = ranks(&service);
    summary("propagated:", &propagated);
    let accuracy = |svc: &ProjectService| {
        let matches = svc.snapshot().matches("A", "B").expect("match stage ran");
        EvalReport::from_predictions(&matches, &matches, &truth)
            .accuracy_avg
            .unwrap_or(0.0)
    };
    println!("greedy accuracy: {:.1}%", accuracy(&service));

    // The reviewer confirms the true pair of the hardest query.
    let worst = (0..n)
        .max_by_key(|&i| (propagated[i], std::cmp::Reverse(i)))
        .unwrap_or(0);
    let (entry, revision) = service.confirm("A", "B", worst, permutation[worst])?;
    println!(
        "confirmed ({}, {}) -> revision {revision}",
        entry.i, entry.j
    );

    let report = service.run_blocking("A", "B", &Stage::ALL)?;
    println!(
        "re-run computed {:?}, skipped {:?} -> revision {}",
        report.computed, report.skipped, report.revision
    );
    let confirmed = ranks(&service);
    summary("with confirmation:", &confirmed);
    for i in worst.saturating_sub(3)..(worst + 4).min(n) {
        println!(
            "  query {i:>2}: rank {} -> {} -> {}",
            normalized[i], propagated[i], confirmed[i]
        );
    }
    println!("greedy accuracy: {:.1}%", accuracy(&service));

    let export = service.snapshot().export("A", "B")?;
    println!("export holds {} correspondences", export.len());
    Ok(())
}
