//! Minimal dense feed-forward engine: SiLU layers, inverted dropout,
//! reverse-mode gradients, Adam and early stopping.

mod activation;
mod adam;
pub mod checkpoint;
mod early_stop;
mod layer;
mod mlp;

pub use activation::{sigmoid, silu, silu_grad_scalar, silu_scalar, Activation};
pub use adam::{AdamConfig, AdamState};
pub use early_stop::{EarlyStopping, DEFAULT_MAX_EPOCHS, DEFAULT_MIN_DELTA, DEFAULT_PATIENCE};
pub use layer::Dense;
pub use mlp::{MlpModel, Mode, Tape};
pub(crate) use mlp::affine;

/// Anything whose trainable parameters are a list of dense layers.
pub trait Parameters {
    fn param_layers(&self) -> Vec<&Dense>;
    fn param_layers_mut(&mut self) -> Vec<&mut Dense>;

    fn num_params(&self) -> usize {
        self.param_layers().iter().map(|l| l.num_params()).sum()
    }
}

/// Default inverted-dropout rate for the widest hidden layers.
pub const DEFAULT_DROPOUT_RATE: f64 = 0.2;
