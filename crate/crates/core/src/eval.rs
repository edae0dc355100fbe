//! Unlearning metrics: retain/forget AUC, membership-inference ratio,
//! forward-pass FLOPs, and report assembly.

use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sample_negatives, Edge, EdgeSplit, ForgetSet, Graph, Locality};
use crate::nn::{forward, score_edges, Arch, ModelParams};
use crate::rng::{derive_seed, rng_for};
use crate::scalar::Scalar;
use crate::view::GraphView;

/// Non-edges used to calibrate membership scores.
pub const MI_CALIBRATION_PAIRS: usize = 1000;

/// Floor on the post-unlearning membership probability in [`mi_ratio`].
pub const MI_FLOOR: f64 = 1e-6;

/// Area under the ROC curve via the Mann–Whitney U statistic; tied scores
/// count one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::shape("auc", scores.len(), labels.len()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidArgument(
            "auc needs at least one positive and one negative label".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // average 1-based ranks over tie groups
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]].total_cmp(&scores[order[i]]).is_eq() {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = order[i..j].iter().filter(|&&k| labels[k]).count();
        rank_sum_pos += avg_rank * pos_in_group as f64;
        i = j;
    }
    let p = positives as f64;
    let u = rank_sum_pos - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

fn logits<T: Scalar>(model: &ModelParams<T>, view: &GraphView<T>, pairs: &[Edge]) -> Result<Vec<f64>> {
    let h = forward(model, &view.adj, &view.features)?;
    let (z, _) = score_edges(h.last(), pairs, T::one())?;
    Ok(z.into_iter().map(Scalar::as_f64).collect())
}

/// Forget edges (label 0) against an equal-size seeded sample of retained
/// training edges (label 1), scored on the retained view. When fewer edges
/// are retained than forgotten, the forget side is subsampled instead so the
/// classes stay balanced.
pub fn eval_forget<T: Scalar>(
    model: &ModelParams<T>,
    graph: &Graph<T>,
    _split: &EdgeSplit,
    forget: &ForgetSet,
    seed: u64,
) -> Result<f64> {
    if forget.forget.is_empty() {
        return Err(Error::EmptyForgetSet);
    }
    if forget.retain.is_empty() {
        return Err(Error::Infeasible {
            what: "retained edges to pair with the forget set",
            requested: forget.forget.len(),
            available: 0,
        });
    }
    let k = forget.forget.len().min(forget.retain.len());
    let mut rng = rng_for(seed, "eval-forget", 0);
    let mut draw = |pool: &[Edge]| -> Vec<Edge> {
        if pool.len() == k {
            return pool.to_vec();
        }
        let mut idx = index::sample(&mut rng, pool.len(), k).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| pool[i]).collect()
    };
    let mut pairs = draw(&forget.forget);
    pairs.extend(draw(&forget.retain));
    let labels: Vec<bool> = (0..2 * k).map(|i| i >= k).collect();
    let view = GraphView::retained(graph, forget)?;
    auc(&logits(model, &view, &pairs)?, &labels)
}

/// Test positives against test negatives, scored on the retained view.
pub fn eval_retain<T: Scalar>(
    model: &ModelParams<T>,
    graph: &Graph<T>,
    split: &EdgeSplit,
    forget: &ForgetSet,
    _seed: u64,
) -> Result<f64> {
    if split.test.is_empty() || split.test_neg.is_empty() {
        return Err(Error::InvalidArgument("test split is empty".into()));
    }
    let pairs: Vec<Edge> = split.test.iter().chain(&split.test_neg).copied().collect();
    let labels: Vec<bool> = split
        .test
        .iter()
        .map(|_| true)
        .chain(split.test_neg.iter().map(|_| false))
        .collect();
    let view = GraphView::retained(graph, forget)?;
    auc(&logits(model, &view, &pairs)?, &labels)
}

/// Empirical-rank membership probability: fraction of calibration scores
/// strictly below `score`, ties counting one half.
fn membership(sorted_calibration: &[f64], score: f64) -> f64 {
    let below = sorted_calibration.partition_point(|&c| c < score);
    let not_above = sorted_calibration.partition_point(|&c| c <= score);
    (below as f64 + 0.5 * (not_above - below) as f64) / sorted_calibration.len() as f64
}

fn mean_membership<T: Scalar>(
    model: &ModelParams<T>,
    view: &GraphView<T>,
    forget: &[Edge],
    calibration: &[Edge],
) -> Result<f64> {
    let mut cal = logits(model, view, calibration)?;
    cal.sort_by(f64::total_cmp);
    let scores = logits(model, view, forget)?;
    Ok(scores.iter().map(|&s| membership(&cal, s)).sum::<f64>() / scores.len() as f64)
}

/// Ratio of mean forget-edge membership probability before and after
/// unlearning. Above 1 means the unlearned model leaks less.
///
/// Membership comes from a rank attack: an edge's score (the decoder
/// logit, a monotone stand-in for its sigmoid probability) is placed within
/// the same model's scores on seeded non-edges.
pub fn mi_ratio<T: Scalar>(
    source: &ModelParams<T>,
    unlearned: &ModelParams<T>,
    graph: &Graph<T>,
    _split: &EdgeSplit,
    forget: &ForgetSet,
    seed: u64,
) -> Result<f64> {
    if forget.forget.is_empty() {
        return Err(Error::EmptyForgetSet);
    }
    let n = graph.num_nodes();
    let available = n * n.saturating_sub(1) / 2 - graph.num_edges();
    let calibration = sample_negatives(
        graph,
        MI_CALIBRATION_PAIRS.min(available),
        &[],
        derive_seed(seed, "mi-calibration", 0),
    )?;
    if calibration.is_empty() {
        return Err(Error::Infeasible {
            what: "calibration non-edges",
            requested: 1,
            available: 0,
        });
    }
    let view = GraphView::retained(graph, forget)?;
    let before = mean_membership(source, &view, &forget.forget, &calibration)?;
    let after = mean_membership(unlearned, &view, &forget.forget, &calibration)?;
    if before == after {
        return Ok(1.0);
    }
    Ok(before / after.max(MI_FLOOR))
}

/// Floating-point operations of one forward pass, two per multiply-add.
///
/// `nnz` counts the entries of the propagation matrix, self-loops included
/// (`2|E| + N` for an undirected graph). GCN layers cost
/// `2·N·F_l·F_{l+1} + 2·nnz·F_{l+1}`; GIN layers aggregate at the input
/// width and run a two-matrix MLP.
pub fn flops_from_counts(arch: Arch, dims: &[usize], num_nodes: u64, nnz: u64) -> u64 {
    dims.windows(2)
        .map(|w| {
            let (fi, fo) = (w[0] as u64, w[1] as u64);
            match arch {
                Arch::Gcn => 2 * num_nodes * fi * fo + 2 * nnz * fo,
                Arch::Gin => 2 * nnz * fi + 2 * num_nodes * fi * fo + 2 * num_nodes * fo * fo,
            }
        })
        .sum()
}

pub fn flops_estimate<T: Scalar>(arch: Arch, dims: &[usize], graph: &Graph<T>) -> u64 {
    let n = graph.num_nodes() as u64;
    flops_from_counts(arch, dims, n, 2 * graph.num_edges() as u64 + n)
}

/// One row of results for a model under evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub arch: Arch,
    pub strategy: String,
    pub locality: Locality,
    pub ratio: f64,
    pub seed: u64,
    pub auc_retain: f64,
    pub auc_forget: f64,
    pub mi_ratio: f64,
    pub unlearn_seconds: f64,
    pub flops_forward: u64,
}

/// Partially filled report; see [`assemble_report`].
#[derive(Debug, Clone, Default)]
pub struct ReportPieces {
    pub dataset: Option<String>,
    pub arch: Option<Arch>,
    pub strategy: Option<String>,
    pub locality: Option<Locality>,
    pub ratio: Option<f64>,
    pub seed: Option<u64>,
    pub auc_retain: Option<f64>,
    pub auc_forget: Option<f64>,
    pub mi_ratio: Option<f64>,
    pub unlearn_seconds: Option<f64>,
    pub flops_forward: Option<u64>,
}

pub fn assemble_report(pieces: ReportPieces) -> Result<EvalReport> {
    fn req<V>(v: Option<V>, name: &'static str) -> Result<V> {
        v.ok_or(Error::MissingField(name))
    }
    let report = EvalReport {
        dataset: req(pieces.dataset, "dataset")?,
        arch: req(pieces.arch, "arch")?,
        strategy: req(pieces.strategy, "strategy")?,
        locality: req(pieces.locality, "locality")?,
        ratio: req(pieces.ratio, "ratio")?,
        seed: req(pieces.seed, "seed")?,
        auc_retain: req(pieces.auc_retain, "auc_retain")?,
        auc_forget: req(pieces.auc_forget, "auc_forget")?,
        mi_ratio: req(pieces.mi_ratio, "mi_ratio")?,
        unlearn_seconds: req(pieces.unlearn_seconds, "unlearn_seconds")?,
        flops_forward: req(pieces.flops_forward, "flops_forward")?,
    };
    report.validate()?;
    Ok(report)
}

impl EvalReport {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("auc_retain", self.auc_retain), ("auc_forget", self.auc_forget)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange { field, value: v });
            }
        }
        if !(self.mi_ratio > 0.0 && self.mi_ratio.is_finite()) {
            return Err(Error::OutOfRange {
                field: "mi_ratio",
                value: self.mi_ratio,
            });
        }
        if !(self.unlearn_seconds >= 0.0) {
            return Err(Error::OutOfRange {
                field: "unlearn_seconds",
                value: self.unlearn_seconds,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub const CSV_HEADER: &'static str =
        "dataset,arch,strategy,locality,ratio,seed,auc_retain,auc_forget,mi_ratio,unlearn_seconds,flops_forward";
}

/// Writes reports under the standard header.
pub fn write_reports_csv(path: &Path, reports: &[EvalReport]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    w.write_record(EvalReport::CSV_HEADER.split(','))
        .map_err(|e| Error::Serialize(e.to_string()))?;
    for r in reports {
        w.serialize(r).map_err(|e| Error::Serialize(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
