//! Flag definitions and config-file expansion.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::UsageError;

/// Dimension-level interpretability for node embeddings.
///
/// A TOML file given with `--config` supplies default flag values: top-level
/// keys apply to every command, keys under `[<command>]` to that command only.
/// Flags on the command line win.
#[derive(Debug, Parser)]
#[command(name = "dine", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Sample a stochastic block model graph and its block labels.
    #[command(args_override_self = true)]
    GenerateSbm(GenerateArgs),
    /// Train DeepWalk (uniform walks + skip-gram with negative sampling).
    #[command(args_override_self = true)]
    Embed(EmbedArgs),
    /// Map an embedding into an interpretable [0,1]^K space.
    #[command(args_override_self = true)]
    Retrofit(RetrofitArgs),
    /// Per-dimension edge utilities and explanation subgraphs.
    #[command(args_override_self = true)]
    Explain(ExplainArgs),
    /// Community and sparsity scores over the effective dimensions.
    #[command(args_override_self = true)]
    Metrics(MetricsArgs),
    /// Held-out link prediction ROC-AUC over several seeds.
    #[command(args_override_self = true)]
    Linkpred(LinkpredArgs),
    /// Multiplicative log-normal noise on every embedding entry.
    #[command(args_override_self = true)]
    Perturb(PerturbArgs),
    /// Rerun the command recorded in a run manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenerateSbm(_) => "generate-sbm",
            Command::Embed(_) => "embed",
            Command::Retrofit(_) => "retrofit",
            Command::Explain(_) => "explain",
            Command::Metrics(_) => "metrics",
            Command::Linkpred(_) => "linkpred",
            Command::Perturb(_) => "perturb",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Output {
    /// Overwrite existing output files.
    #[arg(long)]
    #[serde(skip)]
    pub force: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphInput {
    /// Edge list: one `u v` pair per line, `#` comments allowed.
    #[arg(long)]
    pub edges: PathBuf,
    /// Keep only the largest connected component.
    #[arg(long)]
    pub lcc: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 8)]
    pub blocks: usize,
    #[arg(long, default_value_t = 10)]
    pub block_size: usize,
    /// Edge probability inside a block.
    #[arg(long, default_value_t = 1.0)]
    pub intra: f64,
    /// Edge probability across blocks.
    #[arg(long, default_value_t = 0.0)]
    pub inter: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_edges: PathBuf,
    #[arg(long)]
    pub out_communities: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct DeepWalkArgs {
    /// Embedding dimensionality D.
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    /// Nodes per walk, start node included.
    #[arg(long, default_value_t = 10)]
    pub walk_length: usize,
    /// Walks started from every node.
    #[arg(long, default_value_t = 20)]
    pub num_walks: usize,
    /// Skip-gram context radius.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    /// Negative samples per positive pair.
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 0.025)]
    pub initial_lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub min_lr: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub graph: GraphInput,
    #[command(flatten)]
    pub deepwalk: DeepWalkArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output embedding, word2vec text format.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct AutoencoderArgs {
    /// Output dimensionality K.
    #[arg(long, default_value_t = 128)]
    pub hidden_dim: usize,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
    pub optimizer: OptimizerArg,
    /// Drop the orthogonality regularizer.
    #[arg(long)]
    pub no_orth: bool,
    /// Drop the size regularizer.
    #[arg(long)]
    pub no_size: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RetrofitArgs {
    /// Input embedding, word2vec text format.
    #[arg(long)]
    pub embedding: PathBuf,
    #[command(flatten)]
    pub autoencoder: AutoencoderArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Loss trace CSV, one row per iteration plus the final state.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Marginal,
    Shapley,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizeArg {
    /// Min-max over the whole table.
    Global,
    /// Min-max within each dimension.
    PerDim,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub graph: GraphInput,
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Marginal)]
    pub kind: KindArg,
    /// Scaling used for the `mu_norm` column.
    #[arg(long, value_enum, default_value_t = NormalizeArg::Global)]
    pub normalize: NormalizeArg,
    /// TSV `dim u v mu mu_norm`.
    #[arg(long)]
    pub out_saliency: PathBuf,
    /// JSON list of `{dim, edges: [[u, v, mu], ...]}`.
    #[arg(long)]
    pub out_subgraphs: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankingArg {
    /// Largest explanation subgraph first.
    Coverage,
    /// Highest community score first.
    Score,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(ArgGroup::new("community_source").required(true).args(["communities", "louvain"])))]
pub struct MetricsArgs {
    #[command(flatten)]
    pub graph: GraphInput,
    #[arg(long)]
    pub embedding: PathBuf,
    /// Node community file, `node community` per line.
    #[arg(long)]
    pub communities: Option<PathBuf>,
    /// Detect communities with Louvain instead.
    #[arg(long)]
    pub louvain: bool,
    /// Seed for Louvain's node order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of edges the effective dimensions must cover.
    #[arg(long, default_value_t = 0.9)]
    pub coverage: f64,
    #[arg(long, value_enum, default_value_t = RankingArg::Coverage)]
    pub ranking: RankingArg,
    #[arg(long, value_enum, default_value_t = KindArg::Marginal)]
    pub kind: KindArg,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Deepwalk,
    Dine,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LinkpredArgs {
    #[command(flatten)]
    pub graph: GraphInput,
    #[arg(long, value_enum, default_value_t = MethodArg::Deepwalk)]
    pub method: MethodArg,
    /// Fraction of edges held out as positives.
    #[arg(long, default_value_t = 0.1)]
    pub holdout: f64,
    /// Number of runs; run i uses seed `--seed + i`.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub deepwalk: DeepWalkArgs,
    #[command(flatten)]
    pub autoencoder: AutoencoderArgs,
    /// Summary JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PerturbArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    /// Standard deviation of the log-scale noise.
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Replay even if recorded inputs changed since.
    #[arg(long)]
    pub ignore_hashes: bool,
}

/// Removes `--config FILE` from `argv` and splices the file's values in
/// right after the subcommand name, so later command-line flags override them.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            let path = it
                .next()
                .ok_or_else(|| UsageError("--config needs a file".into()))?;
            config = Some(PathBuf::from(path));
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config = Some(PathBuf::from(path));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    // program name, then the subcommand
    let Some(command) = rest.get(1).filter(|a| !a.starts_with('-')).cloned() else {
        return Ok(rest);
    };
    let flags = config_flags(&path, &command)?;
    rest.splice(2..2, flags);
    Ok(rest)
}

fn config_flags(path: &Path, command: &str) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table =
        toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let mut flags = Vec::new();
    let mut push = |key: &str, value: &toml::Value| -> Result<()> {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => flags.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::String(s) => flags.extend([flag, s.clone()]),
            toml::Value::Integer(i) => flags.extend([flag, i.to_string()]),
            toml::Value::Float(f) => flags.extend([flag, f.to_string()]),
            other => {
                return Err(UsageError(format!(
                    "{}: unsupported value for `{key}`: {other}",
                    path.display()
                ))
                .into())
            }
        }
        Ok(())
    };
    for (key, value) in &table {
        if !value.is_table() {
            push(key, value)?;
        }
    }
    if let Some(section) = table.get(command).and_then(|v| v.as_table()) {
        for (key, value) in section {
            push(key, value)?;
        }
    }
    Ok(flags)
}
