//! `collate`: command-line front end for the collation pipeline and the
//! review server.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use collate_core::collation::{
    argmax_correspondences, evaluate, greedy_one_to_one, CorrespondenceSet, Direction, EvalOptions,
    EvalReport, RecallMode, Status,
};
use collate_core::feature_store::load_manuscript;
use collate_core::matrix::{
    normalize, propagate, three_cycle_seeds, two_cycle_seeds, Combine, NormalizationKind,
    NormalizationScheme, PropagationConfig, SeedOrigin, SeedSet, SimilarityMatrix,
};
use collate_core::similarity::{similarity_matrix, Method, SimilarityConfig};
use collate_service::{
    api, ExportFormat, MatchAlgorithm, PipelineConfig, Project, ProjectService, Stage,
};

#[derive(Parser)]
#[command(
    name = "collate",
    version,
    about = "Find corresponding illustrations across manuscripts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate every feature file of a manifest.
    FeaturesCheck { manifest: PathBuf },
    /// Compute the raw similarity matrix between two manuscripts.
    Sim {
        /// Manifest of the row manuscript.
        a: PathBuf,
        /// Manifest of the column manuscript.
        b: PathBuf,
        #[arg(long, default_value = "trans")]
        method: Method,
        /// RANSAC seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads, 0 for one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        ransac_iterations: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Normalize a raw matrix.
    Normalize {
        matrix: PathBuf,
        #[arg(long, default_value = "over_max")]
        scheme: NormalizationKind,
        #[arg(long, default_value = "sum", value_parser = parse_combine)]
        combine: Combine,
        /// Softmax temperature, for the softmax schemes.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Boost a normalized matrix around seed correspondences.
    Propagate {
        matrix: PathBuf,
        #[arg(long, default_value = "2cycle", value_parser = ["2cycle", "3cycle", "file"])]
        seeds: String,
        /// Normalized B-C and A-C matrices closing the cycle, for `3cycle`.
        #[arg(long, num_args = 2, value_names = ["BC", "AC"])]
        cycle: Vec<PathBuf>,
        /// Correspondence file (JSON or CSV) for `file`; every entry that is
        /// not rejected becomes a seed.
        #[arg(long)]
        seed_file: Option<PathBuf>,
        #[arg(long, default_value_t = 0.25)]
        alpha: f64,
        #[arg(long, default_value_t = 5.0)]
        sigma_p: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Turn a matrix into correspondences.
    Match {
        matrix: PathBuf,
        #[arg(long, default_value = "greedy")]
        algo: MatchAlgorithm,
        /// Query axis for `argmax`.
        #[arg(long, default_value = "rows")]
        direction: Direction,
        #[arg(long, default_value = "json")]
        format: ExportFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score a matrix or a correspondence file against ground truth.
    Eval {
        input: PathBuf,
        /// Ground-truth correspondences (JSON, or CSV by extension).
        #[arg(long)]
        gt: PathBuf,
        /// Comma-separated: acc, recall_n, map_r, nn:K1,K2,...
        #[arg(long, default_value = "acc,recall_n,map_r,nn:1,5,10,20")]
        metrics: String,
        /// Restrict recall@N candidates to a one-to-one matching.
        #[arg(long)]
        one_to_one: bool,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value = "A-B")]
        label: String,
    },
    /// Create a project directory from manuscript manifests.
    Init {
        #[arg(long)]
        project: PathBuf,
        #[arg(long, default_value = "project")]
        id: String,
        #[arg(long, default_value = "trans")]
        method: Method,
        manifests: Vec<PathBuf>,
    },
    /// Run pipeline stages for one manuscript pair of a project.
    Run {
        #[arg(long)]
        project: PathBuf,
        a: String,
        b: String,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "similarity,normalize,propagate,match"
        )]
        stages: Vec<Stage>,
    },
    /// Export a pair's matches with review decisions.
    Export {
        #[arg(long)]
        project: PathBuf,
        a: String,
        b: String,
        #[arg(long, default_value = "json")]
        format: ExportFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Serve the review API for a project.
    Serve {
        #[arg(long)]
        project: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

fn parse_combine(s: &str) -> Result<Combine, String> {
    match s {
        "sum" => Ok(Combine::Sum),
        "hadamard" => Ok(Combine::Hadamard),
        other => Err(format!("unknown combine rule {other:?} (sum, hadamard)")),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::FeaturesCheck { manifest } => {
            let m = load_manuscript(&manifest)
                .with_context(|| format!("checking {}", manifest.display()))?;
            let tags: Vec<u32> = m
                .pyramids()
                .first()
                .map(|p| p.scale_tags().collect())
                .unwrap_or_default();
            println!(
                "{}: {} illustrations, {} channels, scales {:?}",
                m.manuscript_id(),
                m.len(),
                m.channels().unwrap_or(0),
                tags
            );
        }
        Command::Sim {
            a,
            b,
            method,
            seed,
            workers,
            ransac_iterations,
            output,
        } => {
            let fa = load_manuscript(&a).with_context(|| format!("loading {}", a.display()))?;
            let fb = load_manuscript(&b).with_context(|| format!("loading {}", b.display()))?;
            let mut cfg = SimilarityConfig {
                rng_seed: seed,
                ..SimilarityConfig::default()
            };
            if let Some(n) = ransac_iterations {
                cfg.ransac_iterations = n;
            }
            let s = similarity_matrix(&fa, &fb, method, &cfg, workers)?;
            s.save(&output)?;
            println!(
                "wrote {}x{} {method} matrix to {}",
                s.rows(),
                s.cols(),
                output.display()
            );
        }
        Command::Normalize {
            matrix,
            scheme,
            combine,
            lambda,
            output,
        } => {
            let s = load_matrix(&matrix)?;
            let out = normalize(&s, &NormalizationScheme::new(scheme, lambda, combine)?)?;
            for w in &out.warnings {
                tracing::warn!("{w}");
            }
            let path = output.unwrap_or_else(|| sibling(&matrix, "normalized.json"));
            out.matrix.save(&path)?;
            println!("wrote {}", path.display());
        }
        Command::Propagate {
            matrix,
            seeds,
            cycle,
            seed_file,
            alpha,
            sigma_p,
            output,
        } => {
            let n = load_matrix(&matrix)?;
            let seed_set = match seeds.as_str() {
                "2cycle" => two_cycle_seeds(&n),
                "3cycle" => {
                    let [bc, ac] = cycle.as_slice() else {
                        bail!("--seeds 3cycle needs --cycle <BC> <AC>");
                    };
                    three_cycle_seeds(&n, &load_matrix(bc)?, &load_matrix(ac)?)?.0
                }
                _ => {
                    let path = seed_file.context("--seeds file needs --seed-file")?;
                    let set = read_correspondences(&path)?;
                    SeedSet::from_pairs(
                        SeedOrigin::Confirmed,
                        set.iter()
                            .filter(|e| e.status != Status::Rejected)
                            .map(|e| (e.i, e.j)),
                    )
                }
            };
            let p = propagate(&n, &seed_set, &PropagationConfig { alpha, sigma_p })?;
            let path = output.unwrap_or_else(|| sibling(&matrix, "propagated.json"));
            p.save(&path)?;
            println!("wrote {} ({} seeds)", path.display(), seed_set.len());
        }
        Command::Match {
            matrix,
            algo,
            direction,
            format,
            output,
        } => {
            let s = load_matrix(&matrix)?;
            let set = match algo {
                MatchAlgorithm::Greedy => greedy_one_to_one(&s),
                MatchAlgorithm::Argmax => argmax_correspondences(&s, direction),
            };
            let ext = if format == ExportFormat::Csv {
                "matches.csv"
            } else {
                "matches.json"
            };
            let path = output.unwrap_or_else(|| sibling(&matrix, ext));
            write_correspondences(&set, format, &path)?;
            println!("wrote {} correspondences to {}", set.len(), path.display());
        }
        Command::Eval {
            input,
            gt,
            metrics,
            one_to_one,
            json,
            label,
        } => {
            let selection = MetricSelection::parse(&metrics)?;
            let gt = read_correspondences(&gt)?;
            let report = if is_correspondence_file(&input)? {
                let set = read_correspondences(&input)?;
                EvalReport::from_predictions(&set, &set, &gt)
            } else {
                let options = EvalOptions {
                    nn_ks: selection.nn_ks.clone(),
                    recall_mode: if one_to_one {
                        RecallMode::OneToOne
                    } else {
                        RecallMode::Global
                    },
                };
                evaluate(&load_matrix(&input)?, &gt, &options)?
            };
            let report = selection.apply(report);
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", selection.table(&label, &report));
            }
        }
        Command::Init {
            project,
            id,
            method,
            manifests,
        } => {
            let config = PipelineConfig {
                method,
                ..PipelineConfig::default()
            };
            let mut p = Project::create(&project, id, config)?;
            for m in &manifests {
                let id = p
                    .add_manuscript(m)
                    .with_context(|| format!("adding {}", m.display()))?;
                println!("added manuscript {id}");
            }
            println!(
                "project at {} (revision {})",
                project.display(),
                p.revision()
            );
        }
        Command::Run {
            project,
            a,
            b,
            stages,
        } => {
            let mut p = Project::open(&project)?;
            let report = collate_service::run_pipeline(&mut p, &a, &b, &stages)?;
            println!(
                "computed {:?}, skipped {:?}, revision {}",
                report.computed, report.skipped, report.revision
            );
        }
        Command::Export {
            project,
            a,
            b,
            format,
            output,
        } => {
            let p = Project::open(&project)?;
            match output {
                Some(path) => p.export_to(&a, &b, format, fs::File::create(&path)?)?,
                None => p.export_to(&a, &b, format, std::io::stdout().lock())?,
            }
        }
        Command::Serve {
            project,
            port,
            host,
        } => {
            let service = ProjectService::open(&project)?;
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                tracing::info!("serving {} on http://{addr}", project.display());
                axum::serve(listener, api::router(service)).await
            })?;
        }
    }
    Ok(())
}

fn load_matrix(path: &Path) -> Result<SimilarityMatrix> {
    SimilarityMatrix::load(path).with_context(|| format!("loading matrix {}", path.display()))
}

/// `dir/stem.<suffix>` next to `path`, dropping a trailing stage suffix so
/// `ab.normalized.json` becomes `ab.propagated.json`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("matrix.json");
    let stem = name.strip_suffix(".json").unwrap_or(name);
    let stem = ["raw", "normalized", "propagated"]
        .iter()
        .find_map(|s| stem.strip_suffix(&format!(".{s}")))
        .unwrap_or(stem);
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_correspondences(path: &Path) -> Result<CorrespondenceSet> {
    let context = || format!("reading correspondences {}", path.display());
    if is_csv(path) {
        Ok(
            CorrespondenceSet::read_csv(fs::File::open(path).with_context(context)?, "A", "B")
                .with_context(context)?,
        )
    } else {
        Ok(
            CorrespondenceSet::from_json(&fs::read_to_string(path).with_context(context)?)
                .with_context(context)?,
        )
    }
}

fn write_correspondences(set: &CorrespondenceSet, format: ExportFormat, path: &Path) -> Result<()> {
    match format {
        ExportFormat::Json => fs::write(path, format!("{}\n", set.to_json()?))?,
        ExportFormat::Csv => set.write_csv(fs::File::create(path)?)?,
    }
    Ok(())
}

/// Correspondence files carry an `entries` list; matrix headers do not.
fn is_correspondence_file(path: &Path) -> Result<bool> {
    if is_csv(path) {
        return Ok(true);
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(value.get("entries").is_some())
}

/// Which metrics `eval` reports.
struct MetricSelection {
    acc: bool,
    recall_n: bool,
    map_r: bool,
    nn_ks: Vec<usize>,
}

impl MetricSelection {
    /// Parses `acc,recall_n,map_r,nn:1,5,10,20`; bare numbers after `nn:`
    /// extend its list.
    fn parse(spec: &str) -> Result<Self> {
        let mut sel = Self {
            acc: false,
            recall_n: false,
            map_r: false,
            nn_ks: Vec::new(),
        };
        let mut in_nn = false;
        for token in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if let Some(first) = token.strip_prefix("nn:") {
                in_nn = true;
                sel.nn_ks.push(
                    first
                        .parse()
                        .with_context(|| format!("bad nn cutoff {first:?}"))?,
                );
                continue;
            }
            if in_nn {
                if let Ok(k) = token.parse() {
                    sel.nn_ks.push(k);
                    continue;
                }
                in_nn = false;
            }
            match token {
                "acc" => sel.acc = true,
                "recall_n" => sel.recall_n = true,
                "map_r" => sel.map_r = true,
                other => bail!("unknown metric {other:?}"),
            }
        }
        if sel.nn_ks.contains(&0) {
            bail!("nn cutoffs must be >= 1");
        }
        Ok(sel)
    }

    fn apply(&self, mut r: EvalReport) -> EvalReport {
        if !self.acc {
            r.accuracy_dir1 = None;
            r.accuracy_dir2 = None;
            r.accuracy_avg = None;
        }
        if !self.recall_n {
            r.recall_at_n = None;
        }
        if !self.map_r {
            r.map_at_r = None;
        }
        r.nn_recall.retain(|k, _| self.nn_ks.contains(k));
        r
    }

    fn keeps(&self, column: &str) -> bool {
        match column {
            "acc_1" | "acc_2" | "acc_avg" => self.acc,
            "recall@N" => self.recall_n,
            "map@R" => self.map_r,
            _ => column.starts_with("nn@"),
        }
    }

    fn table(&self, label: &str, report: &EvalReport) -> String {
        let cells: Vec<(String, String)> = report
            .cells()
            .into_iter()
            .filter(|(h, _)| self.keeps(h))
            .collect();
        let widths: Vec<usize> = cells.iter().map(|(h, c)| h.len().max(c.len())).collect();
        let lw = label.len().max(4);
        let mut header = format!("{:<lw$}", "pair");
        let mut row = format!("{label:<lw$}");
        for ((h, c), w) in cells.iter().zip(&widths) {
            header.push_str(&format!("  {h:>w$}"));
            row.push_str(&format!("  {c:>w$}"));
        }
        format!("{header}\n{row}\n")
    }
}
