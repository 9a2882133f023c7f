use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Deserialize;
use vidtopic::{run, synth, PipelineConfig};
use vidtopic_core::cluster::EmbeddingSource;
use vidtopic_core::corpus::{load_embeddings, Modality};
use vidtopic_core::metrics::{cluster_validity, iec, structure_metrics, TransitionOptions};

#[derive(Parser)]
#[command(name = "vidtopic", version, about = "Multimodal topic discovery for segmented video")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a YAML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured mode.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<EmbeddingSource>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Write a seeded synthetic corpus and a config that runs it.
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        videos: usize,
        #[arg(long, default_value_t = 60)]
        segments: usize,
        #[arg(long, default_value_t = 4)]
        topics: usize,
        /// Per-modality informativeness, e.g. text=0.2,audio=0.5,visual=1
        #[arg(long, default_value = "text=1,audio=1,visual=1")]
        inform: synth::Informativeness,
        #[arg(long, default_value = "synthetic")]
        out: PathBuf,
    },
    /// Score a labelling in one embedding space.
    Metrics {
        /// JSON array of labels, or a topics.json document.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, default_value = "fused")]
        space: String,
    },
}

fn parse_mode(s: &str) -> Result<EmbeddingSource, String> {
    s.parse().map_err(|e: vidtopic_core::Error| e.to_string())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Labels {
    Plain(Vec<i64>),
    Doc { labels: Vec<i64> },
}

fn read_labels(path: &Path) -> anyhow::Result<Vec<i64>> {
    let bytes = std::fs::read(path).with_context(|| path.display().to_string())?;
    let labels: Labels = serde_json::from_slice(&bytes)
        .with_context(|| format!("{}: expected a label array or a topics document", path.display()))?;
    Ok(match labels {
        Labels::Plain(l) | Labels::Doc { labels: l } => l,
    })
}

fn cmd_run(
    config: &Path,
    mode: Option<EmbeddingSource>,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> anyhow::Result<bool> {
    let mut cfg = PipelineConfig::load(config)?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(o) = out {
        cfg.output = std::env::current_dir()?.join(o);
    }
    if workers.is_some() {
        cfg.workers = workers;
    }
    let result = run::run(&cfg)?;
    let dir = cfg.resolve(&cfg.output);
    run::write_outputs(&result, &dir)?;
    let failed = result.manifest.failed();
    for v in result.manifest.videos.iter().filter(|v| v.error.is_some()) {
        eprintln!("{}: {}", v.id, v.error.as_deref().unwrap_or_default());
    }
    println!(
        "{} videos, {} failed, reports in {}",
        result.manifest.videos.len(),
        failed,
        dir.display()
    );
    Ok(failed == 0)
}

fn cmd_metrics(labels: &Path, embeddings: &Path, space: &str) -> anyhow::Result<()> {
    let labels = read_labels(labels)?;
    let modality: Modality = space.parse().unwrap_or(Modality::Fused);
    let m = load_embeddings(embeddings, modality, Some(labels.len()))?;
    let x = m.to_array::<f64>();
    let report = serde_json::json!({
        "space": space,
        "structure": structure_metrics::<f64>(&labels, &[labels.len()], TransitionOptions::default()),
        "validity": cluster_validity(x.view(), &labels, space),
        "iec": iec(x.view(), &labels),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            mode,
            out,
            workers,
        } => cmd_run(&config, mode, out, workers),
        Command::Synth {
            seed,
            videos,
            segments,
            topics,
            inform,
            out,
        } => (|| {
            let params = synth::SynthParams {
                seed,
                videos,
                segments,
                topics,
                inform,
                ..synth::SynthParams::default()
            };
            let corpus = synth::make_synthetic_corpus(&params)?;
            let path = synth::write_synthetic_corpus(&corpus, &out)?;
            println!("{}", path.display());
            Ok(true)
        })(),
        Command::Metrics {
            labels,
            embeddings,
            space,
        } => cmd_metrics(&labels, &embeddings, &space).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.ends_with(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
