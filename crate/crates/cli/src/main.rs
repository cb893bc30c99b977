//! `dine` command-line entry point.
//!
//! Exit codes: 0 on success, 2 for usage or validation errors, 1 for runtime
//! failures.

mod args;
mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Command};
use manifest::{hash_inputs, RunManifest};

/// An error the user can fix by changing the invocation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn is_usage_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<UsageError>()
            || matches!(
                cause.downcast_ref::<dine_core::Error>(),
                Some(
                    dine_core::Error::InvalidParameter(_)
                        | dine_core::Error::TooFewDimensions(_)
                        | dine_core::Error::ShapleyTooLarge { .. }
                )
            )
    })
}

/// Files a command reads and writes, and the seed it draws from.
struct Plan {
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    seed: u64,
    force: bool,
}

fn plan(cmd: &Command) -> Plan {
    let mut p = Plan {
        inputs: Vec::new(),
        outputs: Vec::new(),
        seed: 0,
        force: false,
    };
    match cmd {
        Command::GenerateSbm(a) => {
            p.outputs = vec![a.out_edges.clone(), a.out_communities.clone()];
            p.seed = a.seed;
            p.force = a.output.force;
        }
        Command::Embed(a) => {
            p.inputs = vec![a.graph.edges.clone()];
            p.outputs = vec![a.out.clone()];
            p.seed = a.seed;
            p.force = a.output.force;
        }
        Command::Retrofit(a) => {
            p.inputs = vec![a.embedding.clone()];
            p.outputs = std::iter::once(a.out.clone())
                .chain(a.trace.clone())
                .collect();
            p.seed = a.seed;
            p.force = a.output.force;
        }
        Command::Explain(a) => {
            p.inputs = vec![a.graph.edges.clone(), a.embedding.clone()];
            p.outputs = vec![a.out_saliency.clone(), a.out_subgraphs.clone()];
            p.force = a.output.force;
        }
        Command::Metrics(a) => {
            p.inputs = vec![a.graph.edges.clone(), a.embedding.clone()];
            p.inputs.extend(a.communities.clone());
            p.outputs = vec![a.out.clone()];
            p.seed = a.seed;
            p.force = a.output.force;
        }
        Command::Linkpred(a) => {
            p.inputs = vec![a.graph.edges.clone()];
            p.outputs = vec![a.out.clone()];
            p.seed = a.seed;
            p.force = a.output.force;
        }
        Command::Perturb(a) => {
            p.inputs = vec![a.embedding.clone()];
            p.outputs = vec![a.out.clone()];
            p.seed = a.seed;
            p.force = a.output.force;
        }
        Command::Replay(_) => {}
    }
    p
}

fn check_outputs(plan: &Plan, manifest: &Path) -> Result<()> {
    if plan.force {
        return Ok(());
    }
    for path in plan.outputs.iter().map(PathBuf::as_path).chain([manifest]) {
        if path.exists() {
            return Err(UsageError(format!(
                "{} exists; pass --force to overwrite",
                path.display()
            ))
            .into());
        }
    }
    Ok(())
}

/// Runs one artifact-producing command and records its manifest.
fn run(cmd: &Command, argv: &[String]) -> Result<()> {
    let plan = plan(cmd);
    let manifest_path = RunManifest::path_for(&plan.outputs[0]);
    check_outputs(&plan, &manifest_path)?;
    let inputs: Vec<&Path> = plan.inputs.iter().map(PathBuf::as_path).collect();
    let input_hashes = hash_inputs(&inputs)?;

    match cmd {
        Command::GenerateSbm(a) => commands::generate(a)?,
        Command::Embed(a) => commands::embed(a)?,
        Command::Retrofit(a) => commands::retrofit(a)?,
        Command::Explain(a) => commands::explain(a)?,
        Command::Metrics(a) => commands::metrics(a)?,
        Command::Linkpred(a) => commands::linkpred(a)?,
        Command::Perturb(a) => commands::perturb(a)?,
        Command::Replay(_) => unreachable!("replay is dispatched separately"),
    }

    let manifest = RunManifest {
        command: cmd.name().to_owned(),
        argv: argv
            .iter()
            .skip(1)
            .filter(|a| *a != "--force")
            .cloned()
            .collect(),
        config: serde_json::to_value(cmd)?,
        seed: plan.seed,
        input_hashes,
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
    };
    manifest.write(&manifest_path)
}

fn replay(a: &args::ReplayArgs) -> Result<()> {
    let m = RunManifest::read(&a.manifest)?;
    if !a.ignore_hashes {
        m.verify_inputs()?;
    }
    let argv: Vec<String> = std::iter::once("dine".to_owned())
        .chain(m.argv.iter().cloned())
        .chain(["--force".to_owned()])
        .collect();
    let cli =
        Cli::try_parse_from(&argv).map_err(|e| UsageError(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(UsageError("a manifest cannot record a replay".into()).into());
    }
    log::info!("replaying `{}`", m.argv.join(" "));
    run(&cli.command, &argv)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("DINE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        UsageError(format!(
            "DINE_THREADS must be a positive integer, got `{value}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let outcome = (|| -> Result<()> {
        let argv = args::expand_config(std::env::args().collect())?;
        let cli = match Cli::try_parse_from(&argv) {
            Ok(cli) => cli,
            // help and version print and exit 0, parse errors exit 2
            Err(e) => e.exit(),
        };
        configure_threads()?;
        match &cli.command {
            Command::Replay(a) => replay(a),
            cmd => run(cmd, &argv),
        }
    })();

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_usage_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
