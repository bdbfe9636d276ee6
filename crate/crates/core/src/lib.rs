pub mod autoencoder;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod mdn;
pub mod nn;
pub mod predict;
pub mod rng;
pub mod train;
pub mod transfer;

pub use error::{Error, Result};
