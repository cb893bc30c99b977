//! One function per subcommand. Each returns the seed it ran with.

use std::path::Path;

use anyhow::{Context, Result};
use dine_core::attribution::{
    explanation_subgraphs, export_saliency, subgraph_records, utility_table, SaliencyNormalization,
    ScoringKind,
};
use dine_core::embed::{deepwalk, perturb_embeddings, EmbeddingMatrix, SgnsConfig, WalkConfig};
use dine_core::graph::{
    edge_partition, largest_connected_component, load_communities, load_edge_list,
    write_communities, write_edge_list, Graph,
};
use dine_core::linkpred::linkpred_experiment;
use dine_core::louvain::louvain;
use dine_core::metrics::{report, DimRanking, ReportConfig};
use dine_core::pipeline::EmbeddingMethod;
use dine_core::retrofit::{self, write_trace, Optimizer, RetrofitConfig};
use dine_core::sbm::{generate_sbm, SbmConfig};
use serde::Serialize;

use crate::args::*;

fn load_graph(input: &GraphInput) -> Result<Graph> {
    let g = load_edge_list(&input.edges)
        .with_context(|| format!("loading {}", input.edges.display()))?;
    let g = if input.lcc {
        let kept = largest_connected_component(&g)?;
        log::info!(
            "largest component keeps {} of {} nodes",
            kept.num_nodes(),
            g.num_nodes()
        );
        kept
    } else {
        g
    };
    log::info!("graph: {} nodes, {} edges", g.num_nodes(), g.num_edges());
    Ok(g)
}

fn load_embedding(path: &Path) -> Result<EmbeddingMatrix> {
    EmbeddingMatrix::read_word2vec(path).with_context(|| format!("loading {}", path.display()))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn walk_config(a: &DeepWalkArgs, seed: u64) -> WalkConfig {
    WalkConfig {
        walk_length: a.walk_length,
        num_walks: a.num_walks,
        window: a.window,
        seed,
    }
}

fn sgns_config(a: &DeepWalkArgs, seed: u64) -> SgnsConfig {
    SgnsConfig {
        dim: a.dim,
        epochs: a.epochs,
        negatives: a.negatives,
        initial_lr: a.initial_lr,
        min_lr: a.min_lr,
        seed,
    }
}

fn retrofit_config(a: &AutoencoderArgs, seed: u64) -> RetrofitConfig {
    RetrofitConfig {
        hidden_dim: a.hidden_dim,
        iterations: a.iters,
        learning_rate: a.lr,
        optimizer: match a.optimizer {
            OptimizerArg::Adam => Optimizer::Adam,
            OptimizerArg::Sgd => Optimizer::Sgd,
        },
        use_orth: !a.no_orth,
        use_size: !a.no_size,
        seed,
    }
}

fn scoring(kind: KindArg) -> ScoringKind {
    match kind {
        KindArg::Marginal => ScoringKind::Marginal,
        KindArg::Shapley => ScoringKind::Shapley,
    }
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    let cfg = SbmConfig {
        num_blocks: a.blocks,
        block_size: a.block_size,
        intra_prob: a.intra,
        inter_prob: a.inter,
        seed: a.seed,
    };
    let (g, blocks) = generate_sbm(&cfg)?;
    write_edge_list(&g, &a.out_edges)?;
    write_communities(&g, &blocks, &a.out_communities)?;
    log::info!("wrote {} nodes, {} edges", g.num_nodes(), g.num_edges());
    Ok(())
}

pub fn embed(a: &EmbedArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let x = deepwalk(
        &g,
        &walk_config(&a.deepwalk, a.seed),
        &sgns_config(&a.deepwalk, a.seed),
    )?;
    x.write_word2vec(&a.out)?;
    Ok(())
}

pub fn retrofit(a: &RetrofitArgs) -> Result<()> {
    let x = load_embedding(&a.embedding)?;
    let cfg = retrofit_config(&a.autoencoder, a.seed);
    cfg.validate()?;
    let out = retrofit::train(&x, &cfg)?;
    let last = out.trace.last().expect("trace has the final state");
    log::info!(
        "final loss {:.6} (ac {:.6}, orth {:.6}, size {:.6})",
        last.total,
        last.l_ac,
        last.l_orth,
        last.l_size
    );
    out.embedding.write_word2vec(&a.out)?;
    if let Some(trace) = &a.trace {
        write_trace(&out.trace, trace)?;
    }
    Ok(())
}

pub fn explain(a: &ExplainArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let x = load_embedding(&a.embedding)?.aligned_to(&g)?;
    let table = utility_table(&g, &x, scoring(a.kind))?;
    let norm = match a.normalize {
        NormalizeArg::Global => SaliencyNormalization::Global,
        NormalizeArg::PerDim => SaliencyNormalization::PerDimension,
    };
    export_saliency(&table, &a.out_saliency, norm)?;
    let subgraphs = explanation_subgraphs(&table);
    write_json(&subgraph_records(&table, &subgraphs), &a.out_subgraphs)
}

pub fn metrics(a: &MetricsArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let x = load_embedding(&a.embedding)?.aligned_to(&g)?;
    let communities = match &a.communities {
        Some(path) => load_communities(&g, path)?,
        None => louvain(&g, a.seed)?,
    };
    let partition = edge_partition(&g, &communities)?;
    let cfg = ReportConfig {
        threshold: a.coverage,
        ranking: match a.ranking {
            RankingArg::Coverage => DimRanking::Coverage,
            RankingArg::Score => DimRanking::Score,
        },
        kind: scoring(a.kind),
    };
    let r = report(&g, &x, &partition, &cfg)?;
    log::info!(
        "{} effective dimensions cover {:.3}: i_com_eff {:.4}, i_sp_eff {:.4}",
        r.d_eff.len(),
        r.coverage,
        r.i_com_eff,
        r.i_sp_eff
    );
    write_json(&r, &a.out)
}

pub fn linkpred(a: &LinkpredArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let walks = walk_config(&a.deepwalk, a.seed);
    let sgns = sgns_config(&a.deepwalk, a.seed);
    let method = match a.method {
        MethodArg::Deepwalk => EmbeddingMethod::DeepWalk { walks, sgns },
        MethodArg::Dine => {
            let retrofit = retrofit_config(&a.autoencoder, a.seed);
            retrofit.validate()?;
            EmbeddingMethod::Dine {
                walks,
                sgns,
                retrofit,
            }
        }
    };
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
    let summary = linkpred_experiment(&g, &method, a.holdout, &seeds)?;
    log::info!("AUC {:.4} ± {:.4}", summary.mean, summary.std);
    write_json(&summary, &a.out)
}

pub fn perturb(a: &PerturbArgs) -> Result<()> {
    let x = load_embedding(&a.embedding)?;
    perturb_embeddings(&x, a.delta, a.seed)?.write_word2vec(&a.out)?;
    Ok(())
}
