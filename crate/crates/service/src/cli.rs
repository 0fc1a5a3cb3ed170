//! The `chairsearch` command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chairsearch_core::dataset::{build_dataset, reference_shapes, save_manifest};
use chairsearch_core::dictionary::Dictionary;
use chairsearch_core::index::TOP_K;
use chairsearch_core::session::{replay_log, ReplayReport};
use chairsearch_core::sketch::{descriptor, Sketch};
use chairsearch_sim::{friedman_test, run_experiment, ExperimentConfig, SilhouetteLibrary};
use clap::{Args, Parser, Subcommand};

use crate::config::{load_engine, ServiceConfig};
use crate::error::{Result, ServiceError};

#[derive(Debug, Parser)]
#[command(name = "chairsearch", version, about = "Multimodal 3D chair search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the HTTP/JSON API.
    Serve(ServiceConfig),
    /// Write the reference dataset manifest.
    GenerateDataset(GenerateArgs),
    /// Build the index and check self-retrieval.
    BuildIndexCheck(IndexCheckArgs),
    /// Run a simulated user study.
    RunSim(RunSimArgs),
    /// Replay a session log and compare it with what was recorded.
    ReplayLog(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset manifest; the reference set when absent.
    #[arg(long, env = "CHAIRSEARCH_MANIFEST")]
    pub manifest: Option<PathBuf>,
    /// Dictionary document; the built-in vocabulary when absent.
    #[arg(long, env = "CHAIRSEARCH_DICTIONARY")]
    pub dictionary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Output manifest path.
    #[arg(long)]
    pub out: PathBuf,
    /// Dictionary to bind the manifest to; the built-in one when absent.
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// Also write the dictionary document here.
    #[arg(long)]
    pub dictionary_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IndexCheckArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Chairs to self-query; 0 checks all of them.
    #[arg(long, default_value_t = 500)]
    pub sample: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RunSimArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for metrics.csv, friedman.json and logs/.
    #[arg(long, default_value = "sim-out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Skip writing per-trial session logs.
    #[arg(long)]
    pub no_logs: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Session log file.
    pub log: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
}

pub fn generate_dataset(args: &GenerateArgs) -> Result<String> {
    let dict = match &args.dictionary {
        Some(p) => Dictionary::load(p)?,
        None => Dictionary::builtin(),
    };
    let manifest = build_dataset(reference_shapes()?, &dict.checksum)?;
    save_manifest(&manifest, &args.out)?;
    if let Some(p) = &args.dictionary_out {
        std::fs::write(p, dict.to_toml()?)?;
    }
    Ok(format!(
        "wrote {} shapes, {} chairs to {} (checksum {})",
        manifest.shape_count,
        manifest.instance_count,
        args.out.display(),
        manifest.content_checksum()?
    ))
}

pub fn build_index_check(args: &IndexCheckArgs) -> Result<String> {
    let engine = load_engine(args.data.manifest.as_deref(), args.data.dictionary.as_deref())?;
    let ids = engine.index().chair_ids();
    let step = match args.sample {
        0 => 1,
        n => ids.len().div_ceil(n).max(1),
    };
    let mut checked = 0;
    let mut misses = Vec::new();
    for &id in ids.iter().step_by(step) {
        checked += 1;
        let entry = engine.index().entry(id).ok_or(ServiceError::UnknownChair(id))?;
        let sem = engine.index().knn_semantic(&entry.semantic, TOP_K)?;
        let vis = engine.index().knn_visual(&descriptor(&Sketch::empty(), engine.model(id)), TOP_K)?;
        for r in [sem, vis] {
            if r.neighbors.first().map(|n| (n.chair_id, n.distance)) != Some((id, 0.0)) {
                misses.push(id);
            }
        }
    }
    if !misses.is_empty() {
        return Err(ServiceError::Invalid(format!(
            "{} self-query misses, first chair {}",
            misses.len(),
            misses[0]
        )));
    }
    Ok(format!(
        "{} chairs indexed, {checked} self-queried in both spaces; index digest {}, manifest checksum {}",
        ids.len(),
        engine.index().digest(),
        engine.manifest_checksum()
    ))
}

pub fn run_sim(args: &RunSimArgs) -> Result<String> {
    let config = ExperimentConfig::load(&args.config)?;
    let engine = Arc::new(load_engine(args.data.manifest.as_deref(), args.data.dictionary.as_deref())?);
    let library = SilhouetteLibrary::build(engine.manifest());
    let ex = run_experiment(&engine, &library, &config)?;
    std::fs::create_dir_all(&args.out)?;
    let csv = ex.table.to_csv()?;
    std::fs::write(args.out.join("metrics.csv"), &csv)?;
    if !args.no_logs {
        ex.write_logs(&args.out.join("logs"))?;
    }
    let mut report = csv;
    let conditions = config.conditions();
    if conditions.len() >= 2 && config.trials >= 2 {
        let f = friedman_test(&ex.success_matrix(&conditions, false), 0.05)?;
        let json = serde_json::to_string_pretty(&f).map_err(|e| ServiceError::Internal(e.to_string()))?;
        std::fs::write(args.out.join("friedman.json"), json)?;
        let _ = writeln!(report, "friedman Q = {:.4}, df = {}, p = {:.4e}", f.statistic, f.df, f.p_value);
        for p in f.pairwise.iter().filter(|p| p.significant) {
            let (a, b) = (conditions[p.a], conditions[p.b]);
            let _ = writeln!(report, "  {} n{} vs {} n{}: p_adj = {:.4e}", a.0, a.1, b.0, b.1, p.p_adjusted);
        }
    }
    Ok(report)
}

pub fn replay(path: &Path, data: &DataArgs) -> Result<ReplayReport> {
    let text = std::fs::read_to_string(path)?;
    let engine = Arc::new(load_engine(data.manifest.as_deref(), data.dictionary.as_deref())?);
    Ok(replay_log(engine, &text)?)
}
