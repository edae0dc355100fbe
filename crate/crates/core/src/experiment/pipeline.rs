use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::config::{DataSource, ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::eval::{
    assemble_report, eval_forget, eval_retain, flops_estimate, mi_ratio, write_reports_csv, EvalReport, ReportPieces,
};
use crate::graph::{
    delete_nodes, generate_sbm, load_graph, sample_forget_edges, split_edges, Edge, EdgeSplit, ForgetSet, Graph,
    Locality,
};
use crate::nn::{save_checkpoint, ModelParams};
use crate::rng::rng_for;
use crate::train::{train, TrainHistory};
use crate::unlearn::{d2dgn_unlearn, grad_ascent_unlearn, make_destroyer, UnlearnTrace};

/// Report of the three models a pipeline produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub source: EvalReport,
    pub gold: EvalReport,
    pub unlearned: EvalReport,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// In-memory results of [`run_pipeline`]; the same data is written to disk.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: PipelineReport,
    pub source: ModelParams<f64>,
    pub gold: ModelParams<f64>,
    pub unlearned: ModelParams<f64>,
    pub trace: Option<UnlearnTrace>,
    pub source_history: TrainHistory,
    pub gold_history: TrainHistory,
    /// Measured wall-clock, independent of whether timing is written out.
    pub gold_seconds: f64,
    pub unlearn_seconds: f64,
    pub forget: ForgetSet,
}

/// Artifact names inside the output directory.
pub mod files {
    pub const CONFIG: &str = "config.toml";
    pub const SOURCE_CKPT: &str = "source.ckpt";
    pub const GOLD_CKPT: &str = "gold.ckpt";
    pub const UNLEARNED_CKPT: &str = "unlearned.ckpt";
    pub const SOURCE_HISTORY: &str = "history_source.csv";
    pub const GOLD_HISTORY: &str = "history_gold.csv";
    pub const TRACE: &str = "trace.csv";
    pub const FORGET: &str = "forget_edges.txt";
    pub const REPORT_JSON: &str = "report.json";
    pub const REPORT_CSV: &str = "report.csv";
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<Graph<f64>> {
    match cfg.data.source {
        DataSource::Sbm => generate_sbm(
            cfg.data.sbm_blocks,
            cfg.data.sbm_block_size,
            cfg.data.sbm_p_in,
            cfg.data.sbm_p_out,
            cfg.data.sbm_feature_dim,
            cfg.data.sbm_seed.unwrap_or(cfg.seed()?),
        ),
        DataSource::Files => {
            let edges = cfg
                .data
                .edges
                .as_deref()
                .ok_or_else(|| Error::Config("file dataset needs an edge list path".into()))?;
            load_graph(edges, cfg.data.features.as_deref(), cfg.data.feature_dim)
        }
    }
}

pub fn split_data(cfg: &ExperimentConfig, graph: &Graph<f64>) -> Result<EdgeSplit> {
    split_edges(graph, cfg.data.val_frac, cfg.data.test_frac, cfg.stage_seed("split")?)
}

/// Forget set for the configured locality. Random node deletion draws from
/// nodes that have at least one training edge.
pub fn select_forget(cfg: &ExperimentConfig, graph: &Graph<f64>, split: &EdgeSplit) -> Result<ForgetSet> {
    let seed = cfg.stage_seed("forget")?;
    match cfg.forget.locality {
        Locality::Node => {
            if !cfg.forget.nodes.is_empty() {
                return delete_nodes(graph, &cfg.forget.nodes, split);
            }
            let mut candidates: Vec<usize> = split.train.iter().flat_map(|&(u, v)| [u, v]).collect();
            candidates.sort_unstable();
            candidates.dedup();
            let k = cfg.forget.node_count;
            if k > candidates.len() {
                return Err(Error::Infeasible {
                    what: "nodes with training edges",
                    requested: k,
                    available: candidates.len(),
                });
            }
            let mut picked: Vec<usize> = index::sample(&mut rng_for(seed, "delete-nodes", 0), candidates.len(), k)
                .into_iter()
                .map(|i| candidates[i])
                .collect();
            picked.sort_unstable();
            delete_nodes(graph, &picked, split)
        }
        locality => sample_forget_edges(graph, split, cfg.forget.ratio, locality, seed),
    }
}

/// Trains on `edges` with the configured training settings.
pub fn train_on(
    cfg: &ExperimentConfig,
    graph: &Graph<f64>,
    edges: &[Edge],
    split: &EdgeSplit,
) -> Result<(ModelParams<f64>, TrainHistory)> {
    train(graph, edges, &split.val, &split.val_neg, &cfg.train_config()?)
}

/// Runs the configured unlearning method; returns the trace when the
/// method produces one and the loop's wall-clock seconds.
pub fn unlearn_model(
    cfg: &ExperimentConfig,
    source: &ModelParams<f64>,
    graph: &Graph<f64>,
    split: &EdgeSplit,
    forget: &ForgetSet,
) -> Result<(ModelParams<f64>, Option<UnlearnTrace>, f64)> {
    let ucfg = cfg.unlearn_config()?;
    match cfg.unlearn.method {
        Method::D2dgn => {
            let destroyer = make_destroyer(cfg.destroyer_kind(), source, forget, graph, ucfg.seed)?;
            let (params, trace) = d2dgn_unlearn(source, graph, split, forget, &destroyer, &ucfg)?;
            let secs = trace.seconds;
            Ok((params, Some(trace), secs))
        }
        Method::Ascent => {
            let started = Instant::now();
            let params = grad_ascent_unlearn(source, graph, split, forget, ucfg.epochs, ucfg.lr, ucfg.seed)?;
            Ok((params, None, started.elapsed().as_secs_f64()))
        }
    }
}

/// Method label used in the report's `strategy` column.
pub fn method_label(cfg: &ExperimentConfig) -> String {
    match cfg.unlearn.method {
        Method::D2dgn => cfg.unlearn.strategy.to_string(),
        Method::Ascent => "ascent".into(),
    }
}

/// Forget ratio actually realized, `|E_f| / |train|`.
fn realized_ratio(forget: &ForgetSet, split: &EdgeSplit) -> f64 {
    forget.forget.len() as f64 / split.train.len() as f64
}

/// Evaluates `model` against the source it was derived from.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    cfg: &ExperimentConfig,
    label: &str,
    model: &ModelParams<f64>,
    source: &ModelParams<f64>,
    graph: &Graph<f64>,
    split: &EdgeSplit,
    forget: &ForgetSet,
    seconds: f64,
) -> Result<EvalReport> {
    let seed = cfg.stage_seed("eval")?;
    let ratio = match forget.locality {
        Locality::Node => realized_ratio(forget, split),
        _ => cfg.forget.ratio,
    };
    assemble_report(ReportPieces {
        dataset: Some(cfg.dataset_name()),
        arch: Some(model.arch),
        strategy: Some(label.to_string()),
        locality: Some(forget.locality),
        ratio: Some(ratio),
        seed: Some(cfg.seed()?),
        auc_retain: Some(eval_retain(model, graph, split, forget, seed)?),
        auc_forget: Some(eval_forget(model, graph, split, forget, seed)?),
        mi_ratio: Some(mi_ratio(source, model, graph, split, forget, seed)?),
        unlearn_seconds: Some(if cfg.output.timing { seconds } else { 0.0 }),
        flops_forward: Some(flops_estimate(model.arch, &model.dims, graph)),
    })
}

fn write_forget_edges(path: &Path, forget: &ForgetSet) -> Result<()> {
    let mut text = String::new();
    if !forget.deleted_nodes.is_empty() {
        let nodes: Vec<String> = forget.deleted_nodes.iter().map(|n| n.to_string()).collect();
        text.push_str(&format!("# deleted nodes {}\n", nodes.join(" ")));
    }
    for &(u, v) in &forget.forget {
        text.push_str(&format!("{u}\t{v}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Creates `dir` and returns the path of `name` inside it.
pub fn artifact(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir.join(name))
}

/// Load → split → train source → sample forget set → retrain gold →
/// unlearn → evaluate all three models. Artifacts are written as soon as
/// each stage finishes, so a failure leaves the earlier ones in place.
pub fn run_pipeline(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PipelineOutcome> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    let seed = cfg.seed()?;
    fs::write(artifact(out_dir, files::CONFIG)?, cfg.to_toml_string())
        .map_err(|e| Error::io(out_dir.join(files::CONFIG), e))?;

    let graph = load_data(cfg).map_err(|e| e.in_stage("load"))?;
    let split = split_data(cfg, &graph).map_err(|e| e.in_stage("split"))?;

    let (source, source_history) =
        train_on(cfg, &graph, &split.train, &split).map_err(|e| e.in_stage("train-source"))?;
    save_checkpoint(&source, seed, &out_dir.join(files::SOURCE_CKPT))?;
    source_history.write_csv(&out_dir.join(files::SOURCE_HISTORY))?;

    let forget = select_forget(cfg, &graph, &split).map_err(|e| e.in_stage("forget"))?;
    write_forget_edges(&out_dir.join(files::FORGET), &forget)?;

    let (gold, gold_history) = {
        let retain_graph = if forget.deleted_nodes.is_empty() {
            graph.clone()
        } else {
            graph.with_zeroed_features(&forget.deleted_nodes)
        };
        train_on(cfg, &retain_graph, &forget.retain, &split).map_err(|e| e.in_stage("train-gold"))?
    };
    let gold_seconds = gold_history.seconds;
    save_checkpoint(&gold, seed, &out_dir.join(files::GOLD_CKPT))?;
    gold_history.write_csv(&out_dir.join(files::GOLD_HISTORY))?;

    let (unlearned, trace, unlearn_seconds) =
        unlearn_model(cfg, &source, &graph, &split, &forget).map_err(|e| e.in_stage("unlearn"))?;
    save_checkpoint(&unlearned, seed, &out_dir.join(files::UNLEARNED_CKPT))?;
    if let Some(t) = &trace {
        t.write_csv(&out_dir.join(files::TRACE), cfg.output.timing)?;
    }

    let report = (|| -> Result<PipelineReport> {
        Ok(PipelineReport {
            source: evaluate(cfg, "source", &source, &source, &graph, &split, &forget, 0.0)?,
            gold: evaluate(cfg, "gold", &gold, &source, &graph, &split, &forget, gold_seconds)?,
            unlearned: evaluate(
                cfg,
                &method_label(cfg),
                &unlearned,
                &source,
                &graph,
                &split,
                &forget,
                unlearn_seconds,
            )?,
        })
    })()
    .map_err(|e| e.in_stage("eval"))?;
    let json_path = out_dir.join(files::REPORT_JSON);
    fs::write(&json_path, report.to_json()).map_err(|e| Error::io(&json_path, e))?;
    write_reports_csv(
        &out_dir.join(files::REPORT_CSV),
        &[report.source.clone(), report.gold.clone(), report.unlearned.clone()],
    )?;

    Ok(PipelineOutcome {
        report,
        source,
        gold,
        unlearned,
        trace,
        source_history,
        gold_history,
        gold_seconds,
        unlearn_seconds,
        forget,
    })
}
