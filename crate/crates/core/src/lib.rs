//! Link-prediction GNNs and distillation-based unlearning of edges and
//! nodes.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: storage, ingestion, synthetic generation and edge sampling
//! - [`nn`]: matrices, GCN/GIN encoders, losses, reverse-mode gradients, Adam
//! - [`train`]: supervised link-prediction training (source and gold models)
//! - [`unlearn`]: preserver/destroyer distillation and the gradient-ascent
//!   baseline
//! - [`eval`]: AUC, membership-inference ratio, FLOPs and reports
//! - [`experiment`]: end-to-end pipelines, sweeps and configuration
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix it to
//! `f64`, which is what the pipeline uses.

pub mod error;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod nn;
pub mod rng;
pub mod scalar;
pub mod train;
pub mod unlearn;
pub mod view;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeSplit, ForgetSet, Locality};
pub use nn::Arch;
pub use scalar::Scalar;

pub type Matrix = nn::Matrix<f64>;
pub type Graph = graph::Graph<f64>;
pub type ModelParams = nn::ModelParams<f64>;
pub type LayerEmbeddings = nn::LayerEmbeddings<f64>;
pub type NormAdj = nn::NormAdj<f64>;
pub type OptState = nn::OptState<f64>;
pub type GraphView = view::GraphView<f64>;
