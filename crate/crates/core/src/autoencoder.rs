//! Spectrum autoencoder: 101 samples down to a 10-dimensional latent code.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::checkpoint::{self, Envelope, MlpRecord};
use crate::nn::{Activation, Dense, MlpModel, Mode, Parameters};
use crate::rng::{stream_rng, Prng, Stream};
use crate::train::{fit, TrainConfig, TrainOutcome, Trainable};

pub const ENCODER_WIDTHS: [usize; 6] = [101, 128, 256, 512, 256, 10];
pub const DECODER_WIDTHS: [usize; 6] = [10, 256, 512, 256, 128, 101];
pub const LATENT_DIM: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct AeModel {
    pub encoder: MlpModel,
    pub decoder: MlpModel,
}

impl AeModel {
    /// SiLU everywhere except the identity reconstruction layer; no dropout.
    pub fn new<R: Rng>(rng: &mut R) -> Result<Self> {
        let encoder = MlpModel::new(&ENCODER_WIDTHS, Activation::Silu, BTreeSet::new(), 0.0, rng)?;
        let mut decoder = MlpModel::new(&DECODER_WIDTHS, Activation::Silu, BTreeSet::new(), 0.0, rng)?;
        decoder.set_activation(DECODER_WIDTHS.len() - 2, Activation::Identity);
        Self::from_parts(encoder, decoder)
    }

    pub fn from_parts(encoder: MlpModel, decoder: MlpModel) -> Result<Self> {
        if encoder.output_width() != decoder.input_width()
            || encoder.input_width() != decoder.output_width()
        {
            return Err(Error::Structure(format!(
                "encoder {:?} and decoder {:?} do not chain",
                encoder.widths(),
                decoder.widths()
            )));
        }
        Ok(Self { encoder, decoder })
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.output_width()
    }

    pub fn encode(&self, spectrum: &[f64]) -> Result<Vec<f64>> {
        Ok(self.encode_batch(row(spectrum)?)?.into_raw_vec_and_offset().0)
    }

    pub fn decode(&self, latent: &[f64]) -> Result<Vec<f64>> {
        Ok(self.decode_batch(row(latent)?)?.into_raw_vec_and_offset().0)
    }

    pub fn encode_batch(&self, spectra: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.encoder.predict(spectra)
    }

    pub fn decode_batch(&self, latents: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.decoder.predict(latents)
    }

    pub fn reconstruct(&self, spectra: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.decode_batch(self.encode_batch(spectra)?.view())
    }

    /// Mean squared reconstruction error per wavelength sample.
    pub fn mse(&self, spectra: ArrayView2<'_, f64>) -> Result<f64> {
        let r = self.reconstruct(spectra)?;
        Ok(mse(r.view(), spectra))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        checkpoint::write_json(
            path,
            &Envelope {
                format_version: checkpoint::FORMAT_VERSION,
                kind: "autoencoder".into(),
                body: AeRecord {
                    latent_dim: self.latent_dim(),
                    encoder: MlpRecord::from(&self.encoder),
                    decoder: MlpRecord::from(&self.decoder),
                },
            },
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let env: Envelope<AeRecord> = checkpoint::read_json(path)?;
        checkpoint::check_envelope(&env, "autoencoder")?;
        let ae = Self::from_parts(env.body.encoder.try_into()?, env.body.decoder.try_into()?)
            .map_err(|e| Error::Format(e.to_string()))?;
        if ae.latent_dim() != env.body.latent_dim {
            return Err(Error::Format("latent width disagrees with encoder".into()));
        }
        Ok(ae)
    }
}

/// Checkpoint body: the two halves are stored as separate MLP records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AeRecord {
    pub latent_dim: usize,
    pub encoder: MlpRecord,
    pub decoder: MlpRecord,
}

fn row(v: &[f64]) -> Result<ArrayView2<'_, f64>> {
    ArrayView2::from_shape((1, v.len()), v).map_err(|e| Error::Structure(e.to_string()))
}

fn mse(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    let d = &a - &b;
    d.iter().map(|v| v * v).sum::<f64>() / d.len().max(1) as f64
}

impl Parameters for AeModel {
    fn param_layers(&self) -> Vec<&Dense> {
        self.encoder.layers().iter().chain(self.decoder.layers()).collect()
    }

    fn param_layers_mut(&mut self) -> Vec<&mut Dense> {
        self.encoder
            .layers_mut()
            .iter_mut()
            .chain(self.decoder.layers_mut().iter_mut())
            .collect()
    }
}

impl Trainable for AeModel {
    /// `y` is ignored: the target is the input itself.
    fn batch_loss(
        &self,
        x: ArrayView2<'_, f64>,
        _y: ArrayView2<'_, f64>,
        mode: Mode,
        rng: &mut Prng,
    ) -> Result<(f64, Vec<Dense>)> {
        let (latent, enc_tape) = self.encoder.forward_batch(x, mode, rng)?;
        let (out, dec_tape) = self.decoder.forward_batch(latent.view(), mode, rng)?;
        let diff = &out - &x;
        let count = diff.len() as f64;
        let loss = diff.iter().map(|v| v * v).sum::<f64>() / count;
        if !loss.is_finite() {
            return Err(Error::Diverged(format!("reconstruction loss is {loss}")));
        }
        let d_out = diff * (2.0 / count);
        let (mut dec_grads, d_latent) = self.decoder.backward(&dec_tape, d_out.view())?;
        let (mut grads, _) = self.encoder.backward(&enc_tape, d_latent.view())?;
        grads.append(&mut dec_grads);
        Ok((loss, grads))
    }

    fn eval_loss(&self, x: ArrayView2<'_, f64>, _y: ArrayView2<'_, f64>) -> Result<f64> {
        self.mse(x)
    }
}

/// Trains a fresh autoencoder on the given spectra (rows).
pub fn train_ae(
    train: ArrayView2<'_, f64>,
    val: ArrayView2<'_, f64>,
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome<AeModel>> {
    let ae = AeModel::new(&mut stream_rng(seed, Stream::Init))?;
    fit(ae, (train, train), (val, val), config, seed)
}

/// MSE of always predicting the mean spectrum of `train`.
pub fn mean_baseline_mse(train: ArrayView2<'_, f64>, eval: ArrayView2<'_, f64>) -> f64 {
    let mean = train.mean_axis(Axis(0)).expect("nonempty training spectra");
    let pred = Array2::from_shape_fn(eval.dim(), |(_, j)| mean[j]);
    mse(pred.view(), eval)
}
