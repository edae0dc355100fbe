//! Preserver/destroyer distillation unlearning and the gradient-ascent
//! baseline.
//!
//! The trainable model starts as a copy of the source. Each epoch it is
//! pulled toward a frozen copy of the source (the preserver) on retained
//! edges and toward a destroyer on the forget set:
//!
//! `loss = α·loss_r + (1 − α)·loss_f`
//!
//! Strategy 1 matches edge probabilities (KL on soft targets), strategy 2
//! matches per-layer embeddings of a randomly initialized destroyer, and
//! strategy 3 matches preserver embeddings of sampled non-neighbors.

mod ascent;
mod destroyer;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use ascent::grad_ascent_unlearn;
pub use destroyer::{make_destroyer, sample_pair_map, DestroyerKind, DestroyerSpec};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeSplit, ForgetSet, Graph};
use crate::nn::loss::kl_bernoulli;
use crate::nn::tape::sigmoid;
use crate::nn::{adam_step, forward, forward_on, score_edges, LayerEmbeddings, Matrix, ModelParams, OptState, Tape};
use crate::rng::{derive_seed, rng_for};
use crate::scalar::Scalar;
use crate::view::GraphView;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Strategy {
    /// KL between soft targets.
    SoftTargets = 1,
    /// Embedding MSE against a random-init destroyer.
    NeutralEmbeddings = 2,
    /// Embedding MSE against non-neighbor embeddings of the source.
    NegativeEmbeddings = 3,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::SoftTargets, Strategy::NeutralEmbeddings, Strategy::NegativeEmbeddings];

    pub fn default_destroyer(self) -> DestroyerKind {
        match self {
            Strategy::NegativeEmbeddings => DestroyerKind::NegativePairs,
            _ => DestroyerKind::RandomInit,
        }
    }
}

impl TryFrom<u8> for Strategy {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Strategy::SoftTargets),
            2 => Ok(Strategy::NeutralEmbeddings),
            3 => Ok(Strategy::NegativeEmbeddings),
            other => Err(Error::InvalidArgument(format!("strategy must be 1, 2 or 3, got {other}"))),
        }
    }
}

impl From<Strategy> for u8 {
    fn from(s: Strategy) -> u8 {
        s as u8
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: u8 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("strategy must be 1, 2 or 3, got `{s}`")))?;
        Strategy::try_from(v)
    }
}

/// Retained edges used for the preservation term each epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RetainBatch {
    /// `min(|E_r|, 4·|E_f|)` freshly sampled edges.
    #[default]
    Auto,
    All,
    Count(usize),
}

impl RetainBatch {
    pub fn size(self, retain: usize, forget: usize) -> usize {
        match self {
            RetainBatch::Auto => retain.min(4 * forget),
            RetainBatch::All => retain,
            RetainBatch::Count(n) => retain.min(n),
        }
    }
}

impl fmt::Display for RetainBatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetainBatch::Auto => f.write_str("auto"),
            RetainBatch::All => f.write_str("all"),
            RetainBatch::Count(n) => write!(f, "{n}"),
        }
    }
}

// "auto", "all", or a bare count
impl Serialize for RetainBatch {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RetainBatch::Count(n) => s.serialize_u64(*n as u64),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for RetainBatch {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(RetainBatch::Count(n)),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl FromStr for RetainBatch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(RetainBatch::Auto),
            "all" => Ok(RetainBatch::All),
            n => n
                .parse()
                .map(RetainBatch::Count)
                .map_err(|_| Error::InvalidArgument(format!("retain batch must be auto, all or a count, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnlearnConfig {
    pub strategy: Strategy,
    pub alpha: f64,
    pub temperature: f64,
    pub epochs: usize,
    pub lr: f64,
    pub retain_batch: RetainBatch,
    /// Redraw the strategy-3 non-neighbor pairing every epoch.
    pub resample_pairs: bool,
    pub seed: u64,
}

impl Default for UnlearnConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::SoftTargets,
            alpha: 0.5,
            temperature: 1.0,
            epochs: 200,
            lr: 0.001,
            retain_batch: RetainBatch::Auto,
            resample_pairs: false,
            seed: 0,
        }
    }
}

impl UnlearnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must be in [0, 1], got {}", self.alpha)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!("temperature must be positive, got {}", self.temperature)));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("unlearning lr must be non-negative, got {}", self.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub epoch: usize,
    pub loss: f64,
    pub loss_r: f64,
    pub loss_f: f64,
    /// KL from the destroyer's forget-edge predictions to the model's,
    /// measured before the epoch's update.
    pub kl_info_bound: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct UnlearnTrace {
    pub records: Vec<TraceRecord>,
    /// Wall-clock of the whole loop, setup included.
    pub seconds: f64,
}

impl UnlearnTrace {
    pub const CSV_HEADER: &'static str = "epoch,loss,loss_r,loss_f,kl_info_bound,seconds";

    /// Writes the per-epoch trace; with `timing = false` the seconds column
    /// is zeroed so reruns are byte-identical.
    pub fn write_csv(&self, path: &Path, timing: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(path)
            .map_err(|e| Error::Serialize(e.to_string()))?;
        w.write_record(Self::CSV_HEADER.split(','))
            .map_err(|e| Error::Serialize(e.to_string()))?;
        for r in &self.records {
            let r = TraceRecord {
                seconds: if timing { r.seconds } else { 0.0 },
                ..*r
            };
            w.serialize(r).map_err(|e| Error::Serialize(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Frozen targets for the forget term.
enum ForgetTargets<T> {
    /// Destroyer probabilities on the forget edges.
    Soft(Vec<T>),
    /// Per-layer embeddings; only forget-endpoint rows are read.
    Embeddings(Vec<Matrix<T>>),
}

/// Per-layer preserver embeddings with each key row replaced by the row of
/// its mapped non-neighbor.
fn remap_rows<T: Scalar>(preserver: &LayerEmbeddings<T>, pair_map: &std::collections::BTreeMap<usize, usize>) -> Vec<Matrix<T>> {
    preserver
        .layers()
        .iter()
        .map(|h| {
            let mut m = h.clone();
            for (&k, &v) in pair_map {
                m.row_mut(k).copy_from_slice(h.row(v));
            }
            m
        })
        .collect()
}

fn destroyer_probs<T: Scalar>(
    destroyer_embed: &LayerEmbeddings<T>,
    preserver: &LayerEmbeddings<T>,
    spec: &DestroyerSpec<T>,
    pairs: &[Edge],
    temperature: T,
) -> Result<Vec<T>> {
    match spec.kind {
        DestroyerKind::RandomInit => Ok(score_edges(destroyer_embed.last(), pairs, temperature)?.1),
        DestroyerKind::NegativePairs => {
            let h = preserver.last();
            let mapped: Vec<Edge> = pairs
                .iter()
                .map(|&(u, v)| (spec.pair_map.get(&u).copied().unwrap_or(u), spec.pair_map.get(&v).copied().unwrap_or(v)))
                .collect();
            Ok(score_edges(h, &mapped, temperature)?.1)
        }
    }
}

/// Distillation unlearning. Propagation for every model uses only the
/// retained training edges; preserver and destroyer are inference-only.
pub fn d2dgn_unlearn<T: Scalar>(
    source: &ModelParams<T>,
    graph: &Graph<T>,
    _split: &EdgeSplit,
    forget: &ForgetSet,
    destroyer: &DestroyerSpec<T>,
    cfg: &UnlearnConfig,
) -> Result<(ModelParams<T>, UnlearnTrace)> {
    cfg.validate()?;
    source.validate()?;
    if destroyer.kind != cfg.strategy.default_destroyer() {
        return Err(Error::Config(format!(
            "strategy {} cannot use the {} destroyer",
            cfg.strategy, destroyer.kind
        )));
    }
    if forget.forget.is_empty() {
        return Err(Error::EmptyForgetSet);
    }
    let started = Instant::now();
    let mut params = source.clone();
    if cfg.epochs == 0 {
        return Ok((
            params,
            UnlearnTrace {
                records: Vec::new(),
                seconds: started.elapsed().as_secs_f64(),
            },
        ));
    }

    let view = GraphView::retained(graph, forget)?;
    let temperature = T::lit(cfg.temperature);
    let alpha = T::lit(cfg.alpha);
    let lr = T::lit(cfg.lr);

    // Frozen models see a fixed graph, so one pass each suffices.
    let preserver = forward(source, &view.adj, &view.features)?;
    let destroyer_embed = match destroyer.kind {
        DestroyerKind::RandomInit => forward(&destroyer.params, &view.adj, &view.features)?,
        DestroyerKind::NegativePairs => preserver.clone(),
    };
    let forget_rows = forget.forget_endpoints();
    let mut pair_map = destroyer.pair_map.clone();
    let mut forget_targets = match cfg.strategy {
        Strategy::SoftTargets => ForgetTargets::Soft(destroyer_probs(
            &destroyer_embed,
            &preserver,
            destroyer,
            &forget.forget,
            temperature,
        )?),
        Strategy::NeutralEmbeddings => ForgetTargets::Embeddings(destroyer_embed.layers().to_vec()),
        Strategy::NegativeEmbeddings => ForgetTargets::Embeddings(remap_rows(&preserver, &pair_map)),
    };
    let mut info_targets = destroyer_probs(&destroyer_embed, &preserver, destroyer, &forget.forget, temperature)?;

    let batch_size = cfg.retain_batch.size(forget.retain.len(), forget.forget.len());
    let mut opt = OptState::new(&params);
    let mut records = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let epoch_started = Instant::now();
        if cfg.resample_pairs && epoch > 0 && cfg.strategy == Strategy::NegativeEmbeddings {
            pair_map = sample_pair_map(graph, &forget_rows, derive_seed(cfg.seed, "pairs", epoch as u64))?;
            forget_targets = ForgetTargets::Embeddings(remap_rows(&preserver, &pair_map));
            let spec = DestroyerSpec {
                kind: destroyer.kind,
                params: destroyer.params.clone(),
                pair_map: pair_map.clone(),
            };
            info_targets = destroyer_probs(&destroyer_embed, &preserver, &spec, &forget.forget, temperature)?;
        }
        let batch: Vec<Edge> = if batch_size == forget.retain.len() {
            forget.retain.clone()
        } else {
            let mut idx = index::sample(&mut rng_for(cfg.seed, "retain-batch", epoch as u64), forget.retain.len(), batch_size)
                .into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| forget.retain[i]).collect()
        };

        let mut tape = Tape::new();
        let weights = params.bind(&mut tape, true);
        let x = tape.constant(view.features.clone());
        let layers = forward_on(&mut tape, params.arch, &weights, &view.adj, x)?;
        let last = *layers.last().expect("at least one layer");

        let (loss_r, loss_f) = match &forget_targets {
            ForgetTargets::Soft(targets) => {
                let (_, preserved) = score_edges(preserver.last(), &batch, temperature)?;
                let zr = tape.edge_dot(last, &batch)?;
                let qr = tape.sigmoid(zr, temperature);
                let loss_r = tape.kl(qr, &preserved)?;
                let zf = tape.edge_dot(last, &forget.forget)?;
                let qf = tape.sigmoid(zf, temperature);
                (loss_r, tape.kl(qf, targets)?)
            }
            ForgetTargets::Embeddings(targets) => {
                let mut retain_rows: Vec<usize> = batch.iter().flat_map(|&(u, v)| [u, v]).collect();
                retain_rows.sort_unstable();
                retain_rows.dedup();
                let loss_r = layer_mse(&mut tape, &layers, preserver.layers(), &retain_rows)?;
                let loss_f = layer_mse(&mut tape, &layers, targets, &forget_rows)?;
                (loss_r, loss_f)
            }
        };
        let weighted_r = tape.scale(loss_r, alpha);
        let weighted_f = tape.scale(loss_f, T::one() - alpha);
        let loss = tape.add(weighted_r, weighted_f)?;

        let loss_value = tape.value(loss).item().as_f64();
        if !loss_value.is_finite() {
            return Err(Error::Diverged {
                context: "unlearning loss",
                epoch,
            });
        }
        let model_forget: Vec<T> = forget
            .forget
            .iter()
            .map(|&(u, v)| {
                let h = tape.value(last);
                sigmoid(crate::nn::tensor::dot(h.row(u), h.row(v)) / temperature)
            })
            .collect();
        let kl_info_bound = kl_bernoulli(&info_targets, &model_forget)?.as_f64();
        let loss_r_value = tape.value(loss_r).item().as_f64();
        let loss_f_value = tape.value(loss_f).item().as_f64();

        let mut grads = tape.backward(loss)?;
        let grads = grads.collect(&weights);
        adam_step(&mut params, &grads, &mut opt, lr)?;

        records.push(TraceRecord {
            epoch,
            loss: loss_value,
            loss_r: loss_r_value,
            loss_f: loss_f_value,
            kl_info_bound,
            seconds: epoch_started.elapsed().as_secs_f64(),
        });
    }
    Ok((
        params,
        UnlearnTrace {
            records,
            seconds: started.elapsed().as_secs_f64(),
        },
    ))
}

/// Sum over layers of the row-restricted MSE against constant targets.
fn layer_mse<T: Scalar>(
    tape: &mut Tape<'_, T>,
    layers: &[crate::nn::Var],
    targets: &[Matrix<T>],
    rows: &[usize],
) -> Result<crate::nn::Var> {
    if layers.len() != targets.len() {
        return Err(Error::shape("layer targets", layers.len(), targets.len()));
    }
    let mut total: Option<crate::nn::Var> = None;
    for (&h, target) in layers.iter().zip(targets) {
        let term = tape.mse_rows(h, target.clone(), rows)?;
        total = Some(match total {
            Some(acc) => tape.add(acc, term)?,
            None => term,
        });
    }
    Ok(total.expect("at least one layer"))
}
