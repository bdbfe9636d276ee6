use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::head::{HeadOutput, MdnHead};
use super::mixture::{log_sum_exp, shifted_nll, MixtureParams, HALF_LN_2PI, STABILIZER};
use crate::error::{Error, Result};
use crate::nn::checkpoint::{self, Envelope, LayerRecord, MlpRecord};
use crate::nn::{Activation, Dense, MlpModel, Mode, Parameters};

/// Hidden widths of the inverse model fed with raw 101-sample spectra.
pub const SPECTRUM_TRUNK_WIDTHS: [usize; 6] = [101, 150, 240, 300, 300, 150];
/// Hidden widths of the inverse model fed with 10-dimensional latents.
pub const LATENT_TRUNK_WIDTHS: [usize; 6] = [10, 100, 200, 300, 300, 150];

/// Indices of the layers whose output has the maximum hidden width.
pub fn widest_layers(widths: &[usize]) -> BTreeSet<usize> {
    let max = widths[1..].iter().copied().max().unwrap_or(0);
    (0..widths.len() - 1).filter(|&l| widths[l + 1] == max).collect()
}

/// Mixture density network: a SiLU trunk followed by an [`MdnHead`].
#[derive(Debug, Clone, PartialEq)]
pub struct MdnModel {
    pub trunk: MlpModel,
    pub head: MdnHead,
}

impl MdnModel {
    pub fn from_parts(trunk: MlpModel, head: MdnHead) -> Result<Self> {
        if trunk.output_width() != head.feature_width() {
            return Err(Error::Structure(format!(
                "trunk yields {} features, head expects {}",
                trunk.output_width(),
                head.feature_width()
            )));
        }
        Ok(Self { trunk, head })
    }

    /// Fresh model; dropout goes after every widest hidden layer.
    pub fn new<R: Rng>(
        trunk_widths: &[usize],
        k: usize,
        n_params: usize,
        dropout_rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let trunk = MlpModel::new(
            trunk_widths,
            Activation::Silu,
            widest_layers(trunk_widths),
            dropout_rate,
            rng,
        )?;
        let head = MdnHead::new(trunk.output_width(), k, n_params, rng)?;
        Self::from_parts(trunk, head)
    }

    pub fn k(&self) -> usize {
        self.head.k()
    }

    pub fn n_params(&self) -> usize {
        self.head.n_params()
    }

    pub fn input_width(&self) -> usize {
        self.trunk.input_width()
    }

    /// Eval-mode head activations for a batch.
    pub fn head_output(&self, x: ArrayView2<'_, f64>) -> Result<HeadOutput> {
        let features = self.trunk.predict(x)?;
        self.head.forward_batch(features.view())
    }

    pub fn mixture(&self, x: &[f64]) -> Result<MixtureParams> {
        let view = ArrayView2::from_shape((1, x.len()), x).map_err(|e| Error::Structure(e.to_string()))?;
        Ok(self.head_output(view)?.mixture(0, self.n_params()))
    }

    pub fn mixtures(&self, x: ArrayView2<'_, f64>) -> Result<Vec<MixtureParams>> {
        let out = self.head_output(x)?;
        Ok((0..out.batch_size()).map(|r| out.mixture(r, self.n_params())).collect())
    }

    fn check_targets(&self, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<()> {
        if y.ncols() != self.n_params() {
            return Err(Error::InputShape {
                expected: self.n_params(),
                got: y.ncols(),
            });
        }
        if x.nrows() != y.nrows() || x.nrows() == 0 {
            return Err(Error::Argument(format!(
                "need a nonempty batch with matching rows, got {} inputs and {} targets",
                x.nrows(),
                y.nrows()
            )));
        }
        Ok(())
    }

    /// Per-sample stabilized losses in eval mode.
    pub fn sample_losses(&self, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        self.check_targets(x, y)?;
        let out = self.head_output(x)?;
        let n = self.n_params();
        let k = self.k();
        let mut scratch = LossGrad::new(k, n);
        (0..x.nrows())
            .map(|r| {
                let l = scratch.eval(
                    out.logits.row(r).as_slice().unwrap(),
                    out.mu.row(r).as_slice().unwrap(),
                    out.log_sigma.row(r).as_slice().unwrap(),
                    y.row(r).as_slice().unwrap(),
                    false,
                );
                if l.is_nan() {
                    Err(Error::Diverged(format!("loss is NaN for sample {r}")))
                } else {
                    Ok(l)
                }
            })
            .collect()
    }

    /// Eval-mode mean loss.
    pub fn mean_nll(&self, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<f64> {
        let losses = self.sample_losses(x, y)?;
        Ok(losses.iter().sum::<f64>() / losses.len() as f64)
    }

    /// Mean stabilized loss over the batch and its gradient with respect to
    /// every parameter, ordered as [`Parameters::param_layers`].
    pub fn batch_nll<R: Rng>(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView2<'_, f64>,
        mode: Mode,
        rng: &mut R,
    ) -> Result<(f64, Vec<Dense>)> {
        self.check_targets(x, y)?;
        let (features, tape) = self.trunk.forward_batch(x, mode, rng)?;
        let out = self.head.forward_batch(features.view())?;
        let b = x.nrows();
        let scale = 1.0 / b as f64;
        let (k, n) = (self.k(), self.n_params());
        let mut d_logits = Array2::zeros((b, k));
        let mut d_mu = Array2::zeros((b, k * n));
        let mut d_ls = Array2::zeros((b, k * n));
        let mut scratch = LossGrad::new(k, n);
        let mut total = 0.0;
        for r in 0..b {
            let l = scratch.eval(
                out.logits.row(r).as_slice().unwrap(),
                out.mu.row(r).as_slice().unwrap(),
                out.log_sigma.row(r).as_slice().unwrap(),
                y.row(r).as_slice().unwrap(),
                true,
            );
            if !l.is_finite() {
                return Err(Error::Diverged(format!("loss is {l} for batch sample {r}")));
            }
            total += l;
            for (dst, src) in d_logits.row_mut(r).iter_mut().zip(&scratch.d_logits) {
                *dst = src * scale;
            }
            for (dst, src) in d_mu.row_mut(r).iter_mut().zip(&scratch.d_mu) {
                *dst = src * scale;
            }
            for (dst, src) in d_ls.row_mut(r).iter_mut().zip(&scratch.d_log_sigma) {
                *dst = src * scale;
            }
        }
        let (head_grads, d_features) = self.head.backward(features.view(), &d_logits, &d_mu, &d_ls);
        let (mut grads, _) = self.trunk.backward(&tape, d_features.view())?;
        grads.extend(head_grads);
        Ok((total * scale, grads))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        checkpoint::write_json(
            path,
            &Envelope {
                format_version: checkpoint::FORMAT_VERSION,
                kind: "mdn".into(),
                body: MdnRecord::from(self),
            },
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let env: Envelope<MdnRecord> = checkpoint::read_json(path)?;
        checkpoint::check_envelope(&env, "mdn")?;
        env.body.try_into()
    }
}

impl Parameters for MdnModel {
    fn param_layers(&self) -> Vec<&Dense> {
        let mut v: Vec<&Dense> = self.trunk.layers().iter().collect();
        v.extend([&self.head.pi, &self.head.mu, &self.head.sigma]);
        v
    }

    fn param_layers_mut(&mut self) -> Vec<&mut Dense> {
        let mut v: Vec<&mut Dense> = self.trunk.layers_mut().iter_mut().collect();
        v.extend([&mut self.head.pi, &mut self.head.mu, &mut self.head.sigma]);
        v
    }
}

/// Serialized form of an [`MdnModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdnRecord {
    pub components: usize,
    pub n_params: usize,
    pub trunk: MlpRecord,
    pub pi_head: LayerRecord,
    pub mu_head: LayerRecord,
    pub sigma_head: LayerRecord,
}

impl From<&MdnModel> for MdnRecord {
    fn from(m: &MdnModel) -> Self {
        Self {
            components: m.k(),
            n_params: m.n_params(),
            trunk: MlpRecord::from(&m.trunk),
            pi_head: LayerRecord::from(&m.head.pi),
            mu_head: LayerRecord::from(&m.head.mu),
            sigma_head: LayerRecord::from(&m.head.sigma),
        }
    }
}

impl TryFrom<MdnRecord> for MdnModel {
    type Error = Error;

    fn try_from(r: MdnRecord) -> Result<Self> {
        let head = MdnHead::from_parts(
            r.pi_head.try_into()?,
            r.mu_head.try_into()?,
            r.sigma_head.try_into()?,
            r.n_params,
        )
        .map_err(|e| Error::Format(e.to_string()))?;
        if head.k() != r.components {
            return Err(Error::Format(format!(
                "declared {} components, head has {}",
                r.components,
                head.k()
            )));
        }
        MdnModel::from_parts(r.trunk.try_into()?, head).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Per-sample loss with reusable gradient buffers.
///
/// With `p` the mixture density and `g_k` the component responsibilities,
/// `dL/dlogit_k = w (pi_k - g_k)` where `w = p / (p + 1e-5)`.
struct LossGrad {
    k: usize,
    n: usize,
    log_terms: Vec<f64>,
    d_logits: Vec<f64>,
    d_mu: Vec<f64>,
    d_log_sigma: Vec<f64>,
}

impl LossGrad {
    fn new(k: usize, n: usize) -> Self {
        Self {
            k,
            n,
            log_terms: vec![0.0; k],
            d_logits: vec![0.0; k],
            d_mu: vec![0.0; k * n],
            d_log_sigma: vec![0.0; k * n],
        }
    }

    fn eval(&mut self, logits: &[f64], mu: &[f64], log_sigma: &[f64], y: &[f64], with_grad: bool) -> f64 {
        let (k, n) = (self.k, self.n);
        let lse_logits = log_sum_exp(logits);
        for c in 0..k {
            let mut lt = logits[c] - lse_logits;
            for j in 0..n {
                let s = log_sigma[c * n + j].exp() + STABILIZER;
                let r = (y[j] - mu[c * n + j]) / s;
                lt += -HALF_LN_2PI - s.ln() - 0.5 * r * r;
            }
            self.log_terms[c] = lt;
        }
        let log_density = log_sum_exp(&self.log_terms);
        let loss = shifted_nll(log_density);
        if !with_grad {
            return loss;
        }

        self.d_logits.fill(0.0);
        self.d_mu.fill(0.0);
        self.d_log_sigma.fill(0.0);
        if log_density == f64::NEG_INFINITY {
            return loss;
        }
        let p = log_density.exp();
        let w = p / (p + STABILIZER);
        for c in 0..k {
            let gamma = (self.log_terms[c] - log_density).exp();
            let pi = (logits[c] - lse_logits).exp();
            self.d_logits[c] = w * (pi - gamma);
            for j in 0..n {
                let i = c * n + j;
                let sigma = log_sigma[i].exp();
                let s = sigma + STABILIZER;
                let diff = y[j] - mu[i];
                self.d_mu[i] = -w * gamma * diff / (s * s);
                self.d_log_sigma[i] = -w * gamma * (diff * diff / (s * s * s) - 1.0 / s) * sigma;
            }
        }
        loss
    }
}
