use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Locality;
use crate::nn::Arch;
use crate::rng::derive_seed;
use crate::train::TrainConfig;
use crate::unlearn::{DestroyerKind, RetainBatch, Strategy, UnlearnConfig};

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "D2D_OUT";
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Sbm,
    Files,
}

impl FromStr for DataSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sbm" => Ok(DataSource::Sbm),
            "files" | "file" => Ok(DataSource::Files),
            other => Err(Error::InvalidArgument(format!("unknown dataset source `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    /// Label used in reports; defaults to `sbm` or the edge file's stem.
    pub name: Option<String>,
    pub edges: Option<PathBuf>,
    pub features: Option<PathBuf>,
    /// Width of the synthetic one-hot features when no feature file is given.
    pub feature_dim: Option<usize>,
    pub sbm_blocks: usize,
    pub sbm_block_size: usize,
    pub sbm_p_in: f64,
    pub sbm_p_out: f64,
    pub sbm_feature_dim: usize,
    /// Graph seed; the run seed when unset.
    pub sbm_seed: Option<u64>,
    pub val_frac: f64,
    pub test_frac: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            source: DataSource::Sbm,
            name: None,
            edges: None,
            features: None,
            feature_dim: None,
            sbm_blocks: 10,
            sbm_block_size: 30,
            sbm_p_in: 0.3,
            sbm_p_out: 0.002,
            sbm_feature_dim: 16,
            sbm_seed: None,
            val_frac: 0.05,
            test_frac: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub arch: Arch,
    pub hidden: Vec<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            arch: Arch::Gcn,
            hidden: TrainConfig::default().hidden,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub lr: f64,
    pub patience: usize,
    pub neg_ratio: usize,
    pub fixed_negatives: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            epochs: t.epochs,
            lr: t.lr,
            patience: t.patience,
            neg_ratio: t.neg_ratio,
            fixed_negatives: t.fixed_negatives,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForgetConfig {
    /// Fraction of training edges to forget (edge localities).
    pub ratio: f64,
    pub locality: Locality,
    /// Explicit nodes to delete (node locality).
    pub nodes: Vec<usize>,
    /// Number of random nodes to delete when `nodes` is empty.
    pub node_count: usize,
}

impl Default for ForgetConfig {
    fn default() -> Self {
        Self {
            ratio: 0.025,
            locality: Locality::In,
            nodes: Vec::new(),
            node_count: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Preserver/destroyer distillation.
    D2dgn,
    /// Gradient-ascent baseline.
    Ascent,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::D2dgn => "d2dgn",
            Method::Ascent => "ascent",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d2dgn" => Ok(Method::D2dgn),
            "ascent" | "grad-ascent" | "grad_ascent" => Ok(Method::Ascent),
            other => Err(Error::InvalidArgument(format!("unknown unlearning method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnlearnSection {
    pub method: Method,
    pub strategy: Strategy,
    pub alpha: f64,
    pub temperature: f64,
    pub epochs: usize,
    pub lr: f64,
    pub retain_batch: RetainBatch,
    /// Picked from the strategy when unset.
    pub destroyer: Option<DestroyerKind>,
    pub resample_pairs: bool,
}

impl Default for UnlearnSection {
    fn default() -> Self {
        let u = UnlearnConfig::default();
        Self {
            method: Method::D2dgn,
            strategy: u.strategy,
            alpha: u.alpha,
            temperature: u.temperature,
            epochs: u.epochs,
            lr: u.lr,
            retain_batch: u.retain_batch,
            destroyer: None,
            resample_pairs: u.resample_pairs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Record wall-clock times; when false all seconds are written as 0 so
    /// repeated runs produce identical files.
    pub timing: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, timing: true }
    }
}

/// Everything needed to reproduce one experiment. Serialized as TOML with
/// one table per section.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub data: DataConfig,
    pub model: ModelConfig,
    pub train: TrainSection,
    pub forget: ForgetConfig,
    pub unlearn: UnlearnSection,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative data paths are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.data.edges, &mut cfg.data.features].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("a seed is required".into()))
    }

    /// Seed for one pipeline stage.
    pub fn stage_seed(&self, stage: &str) -> Result<u64> {
        Ok(derive_seed(self.seed()?, stage, 0))
    }

    pub fn destroyer_kind(&self) -> DestroyerKind {
        self.unlearn
            .destroyer
            .unwrap_or_else(|| self.unlearn.strategy.default_destroyer())
    }

    pub fn dataset_name(&self) -> String {
        if let Some(n) = &self.data.name {
            return n.clone();
        }
        match (self.data.source, &self.data.edges) {
            (DataSource::Files, Some(p)) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "files".into()),
            (DataSource::Files, None) => "files".into(),
            (DataSource::Sbm, _) => "sbm".into(),
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            arch: self.model.arch,
            hidden: self.model.hidden.clone(),
            epochs: self.train.epochs,
            lr: self.train.lr,
            patience: self.train.patience,
            neg_ratio: self.train.neg_ratio,
            fixed_negatives: self.train.fixed_negatives,
            seed: self.stage_seed("train")?,
        })
    }

    pub fn unlearn_config(&self) -> Result<UnlearnConfig> {
        Ok(UnlearnConfig {
            strategy: self.unlearn.strategy,
            alpha: self.unlearn.alpha,
            temperature: self.unlearn.temperature,
            epochs: self.unlearn.epochs,
            lr: self.unlearn.lr,
            retain_batch: self.unlearn.retain_batch,
            resample_pairs: self.unlearn.resample_pairs,
            seed: self.stage_seed("unlearn")?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        match self.data.source {
            DataSource::Files => {
                let edges = self
                    .data
                    .edges
                    .as_ref()
                    .ok_or_else(|| Error::Config("file dataset needs an edge list path".into()))?;
                for p in std::iter::once(edges).chain(&self.data.features) {
                    if !p.is_file() {
                        return Err(Error::Config(format!("file not found: {}", p.display())));
                    }
                }
            }
            DataSource::Sbm => {
                if self.data.sbm_blocks == 0 || self.data.sbm_block_size == 0 || self.data.sbm_feature_dim == 0 {
                    return Err(Error::Config("SBM blocks, block size and feature dim must be positive".into()));
                }
            }
        }
        match self.forget.locality {
            Locality::Node => {
                if self.forget.nodes.is_empty() && self.forget.node_count == 0 {
                    return Err(Error::Config("node deletion needs `nodes` or a positive `node_count`".into()));
                }
            }
            _ => {
                if !(self.forget.ratio > 0.0 && self.forget.ratio < 1.0) {
                    return Err(Error::Config(format!(
                        "forget ratio must be in (0, 1), got {}",
                        self.forget.ratio
                    )));
                }
            }
        }
        if let Some(kind) = self.unlearn.destroyer {
            let expected = self.unlearn.strategy.default_destroyer();
            if kind != expected {
                return Err(Error::Config(format!(
                    "strategy {} requires the {expected} destroyer, not {kind}",
                    self.unlearn.strategy
                )));
            }
        }
        self.train_config()?.validate()?;
        self.unlearn_config()?.validate()
    }
}

/// Output directory precedence: flag, then `D2D_OUT`, then config, then
/// [`DEFAULT_OUT_DIR`].
pub fn resolve_out_dir(flag: Option<PathBuf>, env: Option<String>, configured: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or(configured)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}
