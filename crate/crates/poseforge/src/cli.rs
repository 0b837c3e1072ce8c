//! The `poseforge` command-line interface.
//!
//! Exit codes: 0 success, 1 runtime failure (including partial failures,
//! with failed items listed for targeted re-runs), 2 configuration or usage
//! errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use poseforge_core::kind::DataKind;
use poseforge_core::overlay::{render_overlay, OverlayStyle};
use poseforge_core::prompt::ContextMode;
use poseforge_core::scoring::render_score_table;
use serde::Serialize;

use crate::assets::LoadedAssets;
use crate::backend::{ChatClient, DiskCache, LiveBackend, MockBackend, RateLimiter, RetryPolicy};
use crate::benchmark::{build_benchmark, BenchParams};
use crate::config::RunConfig;
use crate::dataset;
use crate::error::PipelineError;
use crate::files;
use crate::generate::{generate_samples, GenerateParams, ItemFailure};
use crate::ingest::{self, IngestParams};
use crate::judge::{evaluate_candidate, CandidateAnswer, JudgeParams};
use crate::runlog::{self, RunRecord};
use crate::train_config::write_train_config;

#[derive(Debug, Parser)]
#[command(
    name = "poseforge",
    version,
    about = "Keypoint-integrated instruction data generation and judge-based evaluation"
)]
pub struct Cli {
    /// Path to a JSON run-config file (defaults apply when omitted).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override the configured global seed everywhere randomness exists.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Emit machine-readable JSON diagnostics on stderr.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Live,
    Mock,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse COCO caption + keypoint files into a contexts file.
    Ingest {
        #[arg(long)]
        captions: PathBuf,
        #[arg(long)]
        keypoints: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Human-centric filter threshold (overrides config).
        #[arg(long)]
        min_keypoints: Option<u32>,
        /// Decimal places for normalized coordinates (overrides config).
        #[arg(long)]
        precision: Option<u8>,
    },
    /// Generate instruction samples of one kind from a contexts file.
    Generate {
        #[arg(long)]
        contexts: PathBuf,
        /// conversation | detail | reasoning
        #[arg(long)]
        kind: String,
        #[arg(long, value_enum)]
        backend: BackendChoice,
        #[arg(long)]
        out: PathBuf,
        /// Chat-completion endpoint URL (live backend).
        #[arg(long)]
        endpoint: Option<String>,
    },
    /// Merge sample streams into a dataset with manifest and train config.
    Assemble {
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Manifest path (default: <out stem>.manifest.json).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Report dataset statistics.
    Stats {
        #[arg(long)]
        dataset: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the benchmark: n sampled images, three questions each.
    BenchBuild {
        #[arg(long)]
        contexts: PathBuf,
        #[arg(long, default_value_t = 90)]
        n: usize,
        #[arg(long, value_enum)]
        backend: BackendChoice,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        endpoint: Option<String>,
    },
    /// Judge candidate answer files against the benchmark references.
    BenchEval {
        #[arg(long)]
        bench: PathBuf,
        /// Candidate answer files, `name=path` or bare path (repeatable).
        #[arg(long = "answers", num_args = 1.., required = true)]
        answers: Vec<String>,
        #[arg(long, value_enum)]
        backend: BackendChoice,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        endpoint: Option<String>,
    },
    /// Render an SVG overlay of one context's boxes and keypoints.
    Render {
        #[arg(long)]
        contexts: PathBuf,
        #[arg(long)]
        image_id: u64,
        #[arg(long)]
        out: PathBuf,
        /// Draw body-part name labels next to markers.
        #[arg(long)]
        labels: bool,
    },
    /// Emit the fine-tuning hyperparameter hand-off file.
    TrainConfig {
        #[arg(long)]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest { .. } => "ingest",
            Command::Generate { .. } => "generate",
            Command::Assemble { .. } => "assemble",
            Command::Stats { .. } => "stats",
            Command::BenchBuild { .. } => "bench-build",
            Command::BenchEval { .. } => "bench-eval",
            Command::Render { .. } => "render",
            Command::TrainConfig { .. } => "train-config",
        }
    }
}

#[derive(Debug)]
enum CliFailure {
    /// Configuration or usage problem; exit 2.
    Usage(String),
    /// Operational failure; exit 1.
    Operational(String),
}

impl From<PipelineError> for CliFailure {
    fn from(e: PipelineError) -> Self {
        CliFailure::Operational(e.to_string())
    }
}

impl From<crate::files::FileError> for CliFailure {
    fn from(e: crate::files::FileError) -> Self {
        CliFailure::Operational(e.to_string())
    }
}

#[derive(Debug, Default)]
struct RunSummary {
    failures: Vec<ItemFailure>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    backend: Option<&'static str>,
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    status: &'a str,
    subcommand: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    failures: Vec<ItemFailure>,
}

/// Entry point for `main`; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let subcommand = cli.command.name();
    let mut config = match cli.config.as_deref().map(RunConfig::load).transpose() {
        Ok(config) => config.unwrap_or_default(),
        Err(error) => {
            return finish(
                cli.json,
                subcommand,
                Err(CliFailure::Usage(error.to_string())),
                None,
            )
        }
    };
    if let Some(seed) = cli.seed {
        config.global_seed = seed;
    }
    if let Err(error) = config.validate() {
        return finish(cli.json, subcommand, Err(CliFailure::Usage(error.to_string())), None);
    }

    let result = dispatch(&cli.command, &config);

    // Every run that got past configuration appends a traceability record.
    let record = match &result {
        Ok(summary) => {
            let mut record = RunRecord::new(subcommand, config.config_hash(), config.global_seed);
            record.backend = summary.backend.map(String::from);
            for path in &summary.inputs {
                record.hash_input(path);
            }
            for path in &summary.outputs {
                record.hash_output(path);
            }
            record.status = if summary.failures.is_empty() { "ok" } else { "partial" }.into();
            Some(record)
        }
        Err(_) => {
            let mut record = RunRecord::new(subcommand, config.config_hash(), config.global_seed);
            record.status = "error".into();
            Some(record)
        }
    };
    if let Some(record) = record {
        if let Err(error) = runlog::append(&config.run_log_path, &record) {
            log::warn!("could not append run log: {error}");
        }
    }

    finish(cli.json, subcommand, result, None)
}

fn finish(
    json: bool,
    subcommand: &str,
    result: Result<RunSummary, CliFailure>,
    _unused: Option<()>,
) -> i32 {
    match result {
        Ok(summary) if summary.failures.is_empty() => {
            if json {
                emit_diagnostics(subcommand, "ok", None, Vec::new());
            }
            0
        }
        Ok(summary) => {
            eprintln!(
                "{} failed item(s); rerun is cheap, completed requests are cached:",
                summary.failures.len()
            );
            for failure in &summary.failures {
                eprintln!("  {}: {}", failure.label, failure.reason);
            }
            if json {
                emit_diagnostics(subcommand, "partial", None, summary.failures);
            }
            1
        }
        Err(CliFailure::Usage(message)) => {
            eprintln!("error: {message}");
            if json {
                emit_diagnostics(subcommand, "usage-error", Some(message), Vec::new());
            }
            2
        }
        Err(CliFailure::Operational(message)) => {
            eprintln!("error: {message}");
            if json {
                emit_diagnostics(subcommand, "error", Some(message), Vec::new());
            }
            1
        }
    }
}

fn emit_diagnostics(subcommand: &str, status: &str, error: Option<String>, failures: Vec<ItemFailure>) {
    let diagnostics = Diagnostics { status, subcommand, error, failures };
    eprintln!(
        "{}",
        serde_json::to_string(&diagnostics).unwrap_or_else(|_| "{}".into())
    );
}

fn make_client(
    choice: BackendChoice,
    endpoint: Option<String>,
    config: &RunConfig,
) -> Result<ChatClient, CliFailure> {
    let backend: Box<dyn crate::backend::ChatBackend> = match choice {
        BackendChoice::Mock => Box::new(MockBackend::new()),
        BackendChoice::Live => Box::new(
            LiveBackend::from_env(endpoint).map_err(|e| CliFailure::Usage(e.to_string()))?,
        ),
    };
    let retry = RetryPolicy {
        max_attempts: config.retry_max_attempts,
        base_delay: std::time::Duration::from_millis(config.retry_base_delay_ms),
        factor: 2,
        max_delay: std::time::Duration::from_secs(30),
        jitter: true,
    };
    Ok(ChatClient::new(
        backend,
        DiskCache::new(&config.cache_dir),
        retry,
        RateLimiter::per_minute(config.requests_per_minute),
    ))
}

fn load_assets(config: &RunConfig) -> Result<LoadedAssets, CliFailure> {
    match &config.assets_dir {
        Some(dir) => LoadedAssets::load(dir).map_err(|e| CliFailure::Usage(e.to_string())),
        None => Ok(LoadedAssets::builtin()),
    }
}

fn backend_name(choice: BackendChoice) -> &'static str {
    match choice {
        BackendChoice::Live => "live",
        BackendChoice::Mock => "mock",
    }
}

fn dispatch(command: &Command, config: &RunConfig) -> Result<RunSummary, CliFailure> {
    match command {
        Command::Ingest { captions, keypoints, out, min_keypoints, precision } => {
            let params = IngestParams {
                min_labeled_keypoints: min_keypoints.unwrap_or(config.min_labeled_keypoints),
                precision: precision.unwrap_or(config.precision),
            };
            if params.precision > 9 {
                return Err(CliFailure::Usage("precision must be 0..=9".into()));
            }
            let contexts = ingest::ingest(captions, keypoints, params)?;
            ingest::write_contexts(out, &contexts)?;
            println!("wrote {} contexts to {}", contexts.len(), out.display());
            Ok(RunSummary {
                inputs: vec![captions.clone(), keypoints.clone()],
                outputs: vec![out.clone()],
                ..Default::default()
            })
        }

        Command::Generate { contexts, kind, backend, out, endpoint } => {
            let kind: DataKind = kind
                .parse()
                .map_err(|e| CliFailure::Usage(format!("--kind {kind:?}: {e}")))?;
            let assets = load_assets(config)?;
            let client = make_client(*backend, endpoint.clone(), config)?;
            let loaded = ingest::read_contexts(contexts)?;
            let params = GenerateParams {
                kind,
                global_seed: config.global_seed,
                model_name: config.model_name.clone(),
                temperature: config.temperature_generate,
                max_output_tokens: config.max_output_tokens,
                context_mode: ContextMode::from(config.context_mode),
                max_in_flight: config.max_in_flight,
            };
            let outcome = generate_samples(&client, &loaded, &assets.prompts, &params)?;
            dataset::write_sample_stream(out, &outcome.samples)?;
            println!(
                "generated {} {} sample(s) to {} ({} failure(s))",
                outcome.samples.len(),
                kind.slug(),
                out.display(),
                outcome.failures.len()
            );
            Ok(RunSummary {
                failures: outcome.failures,
                inputs: vec![contexts.clone()],
                outputs: vec![out.clone()],
                backend: Some(backend_name(*backend)),
            })
        }

        Command::Assemble { inputs, out, manifest } => {
            let manifest_path = manifest
                .clone()
                .unwrap_or_else(|| out.with_extension("manifest.json"));
            let assets = load_assets(config)?;
            let info = dataset::ManifestInfo {
                global_seed: config.global_seed,
                precision: config.precision,
                asset_hashes: assets.hashes.clone(),
                model_name: config.model_name.clone(),
                temperature: config.temperature_generate,
            };
            let manifest = dataset::assemble_files(inputs, out, &manifest_path, &info)?;
            let train_config_path = out
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join("train_config.json");
            write_train_config(&train_config_path)?;
            println!(
                "assembled {} samples ({} conversation, {} detailed_description, {} complex_reasoning) to {}",
                manifest.total,
                manifest.counts.conversation,
                manifest.counts.detailed_description,
                manifest.counts.complex_reasoning,
                out.display()
            );
            Ok(RunSummary {
                inputs: inputs.clone(),
                outputs: vec![out.clone(), manifest_path, train_config_path],
                ..Default::default()
            })
        }

        Command::Stats { dataset: dataset_path, out } => {
            let stats = dataset::stats_for_file(dataset_path)?;
            let rendered = serde_json::to_string_pretty(&stats)
                .map_err(|e| CliFailure::Operational(e.to_string()))?;
            match out {
                Some(path) => {
                    files::write_atomic(path, format!("{rendered}\n").as_bytes())?;
                    println!("wrote stats to {}", path.display());
                }
                None => println!("{rendered}"),
            }
            Ok(RunSummary {
                inputs: vec![dataset_path.clone()],
                outputs: out.iter().cloned().collect(),
                ..Default::default()
            })
        }

        Command::BenchBuild { contexts, n, backend, out, endpoint } => {
            let assets = load_assets(config)?;
            let client = make_client(*backend, endpoint.clone(), config)?;
            let loaded = ingest::read_contexts(contexts)?;
            let params = BenchParams {
                n: *n,
                seed: config.global_seed,
                model_name: config.model_name.clone(),
                temperature: config.temperature_generate,
                max_output_tokens: config.max_output_tokens,
                context_mode: ContextMode::from(config.context_mode),
                max_in_flight: config.max_in_flight,
            };
            let items = build_benchmark(&client, &loaded, &assets.prompts, &params)?;
            files::write_json(out, &items)?;
            println!(
                "built benchmark: {} items over {} images to {}",
                items.len(),
                items.len() / 3,
                out.display()
            );
            Ok(RunSummary {
                inputs: vec![contexts.clone()],
                outputs: vec![out.clone()],
                backend: Some(backend_name(*backend)),
                ..Default::default()
            })
        }

        Command::BenchEval { bench, answers, backend, out, endpoint } => {
            let assets = load_assets(config)?;
            let client = make_client(*backend, endpoint.clone(), config)?;
            let items: Vec<poseforge_core::bench::BenchmarkItem> = files::read_json(bench)?;

            let mut reports = Vec::new();
            let mut all_failures = Vec::new();
            let mut inputs = vec![bench.clone()];
            for spec in answers {
                let (name, path) = parse_answer_spec(spec)?;
                inputs.push(path.clone());
                let rows: Vec<CandidateAnswer> = files::read_jsonl(&path)?;
                let map: BTreeMap<String, String> =
                    rows.into_iter().map(|r| (r.item_id, r.answer)).collect();
                let params = JudgeParams {
                    candidate_name: name,
                    model_name: config.model_name.clone(),
                    temperature: config.temperature_judge,
                    max_output_tokens: config.max_output_tokens,
                    max_in_flight: config.max_in_flight,
                    position_swap: config.judge_position_swap,
                    method: config.score_method,
                };
                let outcome = evaluate_candidate(
                    &client,
                    &items,
                    &map,
                    &assets.judge_system,
                    &assets.judge_template_hash(),
                    &params,
                )?;
                reports.push(outcome.report);
                all_failures.extend(outcome.failures);
            }

            files::write_json(out, &reports)?;
            let rows: Vec<(String, BTreeMap<DataKind, f64>, f64)> = reports
                .iter()
                .map(|r| (r.candidate_name.clone(), r.per_kind_relative.clone(), r.overall))
                .collect();
            let table = render_score_table(&rows);
            let table_path = out.with_extension("table.txt");
            files::write_atomic(&table_path, table.as_bytes())?;
            print!("{table}");
            println!("wrote {} report(s) to {}", reports.len(), out.display());
            Ok(RunSummary {
                failures: all_failures,
                inputs,
                outputs: vec![out.clone(), table_path],
                backend: Some(backend_name(*backend)),
            })
        }

        Command::Render { contexts, image_id, out, labels } => {
            let loaded = ingest::read_contexts(contexts)?;
            let ctx = loaded
                .iter()
                .find(|c| c.image_meta.image_id == *image_id)
                .ok_or_else(|| {
                    CliFailure::Operational(format!(
                        "image id {image_id} not present in {}",
                        contexts.display()
                    ))
                })?;
            let style = OverlayStyle { show_labels: *labels, ..OverlayStyle::default() };
            let svg = render_overlay(ctx, &style);
            files::write_atomic(out, svg.as_bytes())?;
            println!("wrote overlay for image {image_id} to {}", out.display());
            Ok(RunSummary {
                inputs: vec![contexts.clone()],
                outputs: vec![out.clone()],
                ..Default::default()
            })
        }

        Command::TrainConfig { out } => {
            write_train_config(out)?;
            println!("wrote train config to {}", out.display());
            Ok(RunSummary { outputs: vec![out.clone()], ..Default::default() })
        }
    }
}

/// `name=path` or bare path (name = file stem).
fn parse_answer_spec(spec: &str) -> Result<(String, PathBuf), CliFailure> {
    if let Some((name, path)) = spec.split_once('=') {
        if name.is_empty() {
            return Err(CliFailure::Usage(format!("empty candidate name in {spec:?}")));
        }
        Ok((name.to_string(), PathBuf::from(path)))
    } else {
        let path = PathBuf::from(spec);
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("candidate")
            .to_string();
        Ok((name, path))
    }
}
