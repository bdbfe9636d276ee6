//! Mixture density output head, the stabilized negative log-likelihood and
//! helpers for reading predictions out of a mixture.

mod head;
mod mixture;
mod model;

pub use head::{HeadOutput, MdnHead};
pub use mixture::{
    component_pdf, marginal_grid, nll_loss, predict_modes, trapezoid, weighted_marginal_pdf, Candidate,
    MixtureParams, LOSS_CEILING, STABILIZER,
};
pub use model::{widest_layers, MdnModel, MdnRecord, LATENT_TRUNK_WIDTHS, SPECTRUM_TRUNK_WIDTHS};
