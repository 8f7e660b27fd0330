//! A small dense-network engine: residual-skip ReLU MLP, exact reverse-mode
//! gradients, MSE, AdamW and a geometric learning-rate schedule.

mod adamw;
mod checkpoint;
mod loss;
mod matrix;
mod mlp;
mod norm;
mod schedule;

pub use adamw::OptimizerState;
pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use loss::mse_loss;
pub use matrix::{Matrix, Scalar};
pub use mlp::{Gradients, Layer, Mlp, MlpConfig, MlpParams, Reduction, GRAD_CHUNK};
pub use norm::{fit_normalization, Affine, Normalization};
pub use schedule::lr_at;
