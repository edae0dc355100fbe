//! Supervised link-prediction training with per-epoch negative sampling.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::auc;
use crate::graph::{sample_negatives, Edge, Graph};
use crate::nn::{adam_step, forward_on, init_params, score_edges, Arch, ModelParams, OptState, Tape};
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::view::GraphView;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub arch: Arch,
    /// Widths after the input layer, e.g. `[128, 64]`.
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub patience: usize,
    pub neg_ratio: usize,
    /// Draw one negative set up front instead of resampling every epoch.
    pub fixed_negatives: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            arch: Arch::Gcn,
            hidden: vec![128, 64],
            epochs: 500,
            lr: 0.001,
            patience: 50,
            neg_ratio: 1,
            fixed_negatives: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("train epochs must be >= 1".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("train lr must be a non-negative number, got {}", self.lr)));
        }
        if self.neg_ratio == 0 {
            return Err(Error::Config("neg_ratio must be >= 1".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config(format!("hidden widths must be positive: {:?}", self.hidden)));
        }
        Ok(())
    }

    pub fn dims(&self, input_dim: usize) -> Vec<usize> {
        std::iter::once(input_dim).chain(self.hidden.iter().copied()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    /// Epoch whose parameters were returned.
    pub best_epoch: usize,
    pub seconds: f64,
}

impl TrainHistory {
    /// `epoch,train_loss,val_auc` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Serialize(e.to_string()))?;
        for r in &self.records {
            w.serialize(r).map_err(|e| Error::Serialize(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        if self.records.is_empty() {
            let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            writeln!(f, "epoch,train_loss,val_auc").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// Trains a fresh encoder on `train_edges`.
///
/// Only `train_edges`, `val` and `val_neg` are read from the edge data:
/// propagation uses the training edges alone and negatives are drawn from
/// pairs outside `train_edges ∪ val`. Returns the parameters of the epoch
/// with the best validation AUC (the final parameters when `val` is empty).
pub fn train<T: Scalar>(
    graph: &Graph<T>,
    train_edges: &[Edge],
    val: &[Edge],
    val_neg: &[Edge],
    cfg: &TrainConfig,
) -> Result<(ModelParams<T>, TrainHistory)> {
    cfg.validate()?;
    if train_edges.is_empty() {
        return Err(Error::InvalidArgument("no training edges".into()));
    }
    let started = Instant::now();
    let view = GraphView::from_edges(graph, train_edges)?;
    let train_graph = graph.with_edges(train_edges.iter().copied())?;
    let dims = cfg.dims(graph.feature_dim());
    let mut params: ModelParams<T> = init_params(cfg.arch, &dims, derive_seed(cfg.seed, "train-init", 0))?;
    let mut opt = OptState::new(&params);
    let lr = T::lit(cfg.lr);

    let num_neg = cfg.neg_ratio * train_edges.len();
    let draw_negatives = |epoch: u64| {
        sample_negatives(&train_graph, num_neg, val, derive_seed(cfg.seed, "train-neg", epoch))
    };
    let fixed = if cfg.fixed_negatives { Some(draw_negatives(0)?) } else { None };

    let mut labels = vec![T::one(); train_edges.len()];
    labels.extend(std::iter::repeat(T::zero()).take(num_neg));
    let val_pairs: Vec<Edge> = val.iter().chain(val_neg).copied().collect();
    let val_labels: Vec<bool> = val.iter().map(|_| true).chain(val_neg.iter().map(|_| false)).collect();
    let track_val = !val.is_empty() && !val_neg.is_empty();

    let mut records = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, ModelParams<T>)> = None;
    let mut stale = 0usize;

    for epoch in 0..cfg.epochs {
        let negatives = match &fixed {
            Some(n) => n.clone(),
            None => draw_negatives(epoch as u64)?,
        };
        let pairs: Vec<Edge> = train_edges.iter().copied().chain(negatives).collect();

        let mut tape = Tape::new();
        let weights = params.bind(&mut tape, true);
        let x = tape.constant(view.features.clone());
        let layers = forward_on(&mut tape, cfg.arch, &weights, &view.adj, x)?;
        let last = *layers.last().expect("at least one layer");
        let logits = tape.edge_dot(last, &pairs)?;
        let probs = tape.sigmoid(logits, T::one());
        let loss = tape.bce(probs, &labels)?;
        let loss_value = tape.value(loss).item().as_f64();
        if !loss_value.is_finite() {
            return Err(Error::Diverged {
                context: "training loss",
                epoch,
            });
        }

        let val_auc = if track_val {
            let (scores, _) = score_edges(tape.value(last), &val_pairs, T::one())?;
            let scores: Vec<f64> = scores.into_iter().map(Scalar::as_f64).collect();
            auc(&scores, &val_labels)?
        } else {
            f64::NAN
        };
        records.push(EpochRecord {
            epoch,
            train_loss: loss_value,
            val_auc,
        });

        if track_val {
            if best.as_ref().map_or(true, |(b, _, _)| val_auc > *b) {
                best = Some((val_auc, epoch, params.clone()));
                stale = 0;
            } else {
                stale += 1;
            }
        }

        let mut grads = tape.backward(loss)?;
        let grads = grads.collect(&weights);
        adam_step(&mut params, &grads, &mut opt, lr)?;

        if track_val && stale >= cfg.patience {
            break;
        }
    }

    let (params, best_epoch) = match best {
        Some((_, epoch, p)) => (p, epoch),
        None => (params, records.len().saturating_sub(1)),
    };
    Ok((
        params,
        TrainHistory {
            records,
            best_epoch,
            seconds: started.elapsed().as_secs_f64(),
        },
    ))
}
