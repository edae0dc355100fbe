//! Dense/sparse linear algebra, GNN encoders, losses, differentiation and
//! optimization.

pub mod adam;
pub mod checkpoint;
pub mod loss;
pub mod model;
pub mod tape;
pub mod tensor;

pub use adam::{adam_step, OptState};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use loss::{bce_loss, kl_bernoulli, mse_embeddings, score_edges};
pub use model::{forward, forward_on, gcn_normalize, init_params, Arch, LayerEmbeddings, ModelParams, NormAdj};
pub use tape::{Gradients, Tape, Var};
pub use tensor::{CsrMatrix, Matrix};
