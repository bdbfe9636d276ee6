use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

use super::mixture::MixtureParams;
use crate::error::{Error, Result};
use crate::nn::{affine, Dense};

/// Raw head activations for a batch: mixing logits (`B x K`), means and
/// log standard deviations (`B x K*N`, component-major).
#[derive(Debug, Clone)]
pub struct HeadOutput {
    pub logits: Array2<f64>,
    pub mu: Array2<f64>,
    pub log_sigma: Array2<f64>,
}

/// Three affine output layers of sizes `K`, `N*K` and `N*K`.
///
/// Component `k` owns rows `k*N .. (k+1)*N` of the mean and deviation layers.
#[derive(Debug, Clone, PartialEq)]
pub struct MdnHead {
    n_params: usize,
    pub pi: Dense,
    pub mu: Dense,
    pub sigma: Dense,
}

impl MdnHead {
    pub fn from_parts(pi: Dense, mu: Dense, sigma: Dense, n_params: usize) -> Result<Self> {
        let k = pi.fan_out();
        let f = pi.fan_in();
        if n_params == 0 || k == 0 {
            return Err(Error::Structure("head needs K >= 1 and N >= 1".into()));
        }
        if mu.fan_in() != f || sigma.fan_in() != f {
            return Err(Error::Structure("head layers disagree on feature width".into()));
        }
        if mu.fan_out() != k * n_params || sigma.fan_out() != k * n_params {
            return Err(Error::Structure(format!(
                "head output sizes must be [{k}, {}, {}], got [{k}, {}, {}]",
                k * n_params,
                k * n_params,
                mu.fan_out(),
                sigma.fan_out()
            )));
        }
        Ok(Self { n_params, pi, mu, sigma })
    }

    pub fn new<R: Rng>(feature_width: usize, k: usize, n_params: usize, rng: &mut R) -> Result<Self> {
        let pi = Dense::glorot(feature_width, k, rng);
        let mu = Dense::glorot(feature_width, k * n_params, rng);
        let sigma = Dense::glorot(feature_width, k * n_params, rng);
        Self::from_parts(pi, mu, sigma, n_params)
    }

    pub fn k(&self) -> usize {
        self.pi.fan_out()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn feature_width(&self) -> usize {
        self.pi.fan_in()
    }

    /// `[K, N*K, N*K]`.
    pub fn output_sizes(&self) -> [usize; 3] {
        [self.pi.fan_out(), self.mu.fan_out(), self.sigma.fan_out()]
    }

    pub fn forward_batch(&self, features: ArrayView2<'_, f64>) -> Result<HeadOutput> {
        if features.ncols() != self.feature_width() {
            return Err(Error::InputShape {
                expected: self.feature_width(),
                got: features.ncols(),
            });
        }
        Ok(HeadOutput {
            logits: affine(&self.pi, features),
            mu: affine(&self.mu, features),
            log_sigma: affine(&self.sigma, features),
        })
    }

    /// Single-sample head: softmax weights, means, `exp` deviations.
    pub fn forward(&self, features: &[f64]) -> Result<MixtureParams> {
        let f = ArrayView2::from_shape((1, features.len()), features)
            .map_err(|e| Error::Structure(e.to_string()))?;
        let out = self.forward_batch(f)?;
        Ok(out.mixture(0, self.n_params))
    }

    /// Parameter gradients of the three layers plus the feature gradient.
    pub(crate) fn backward(
        &self,
        features: ArrayView2<'_, f64>,
        d_logits: &Array2<f64>,
        d_mu: &Array2<f64>,
        d_log_sigma: &Array2<f64>,
    ) -> ([Dense; 3], Array2<f64>) {
        let grad = |d: &Array2<f64>| Dense {
            weight: d.t().dot(&features),
            bias: d.sum_axis(Axis(0)),
        };
        let d_features =
            d_logits.dot(&self.pi.weight) + d_mu.dot(&self.mu.weight) + d_log_sigma.dot(&self.sigma.weight);
        ([grad(d_logits), grad(d_mu), grad(d_log_sigma)], d_features)
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

impl HeadOutput {
    pub fn batch_size(&self) -> usize {
        self.logits.nrows()
    }

    pub fn mixture(&self, row: usize, n_params: usize) -> MixtureParams {
        let k = self.logits.ncols();
        let pi = softmax(self.logits.row(row).as_slice().unwrap());
        let mu = self
            .mu
            .row(row)
            .to_owned()
            .into_shape_with_order((k, n_params))
            .expect("head layout");
        let sigma = self
            .log_sigma
            .row(row)
            .mapv(f64::exp)
            .into_shape_with_order((k, n_params))
            .expect("head layout");
        MixtureParams::new(pi, mu, sigma).expect("softmax and exp keep mixture invariants")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_pi_layer_gives_uniform_weights() {
        let mut head = MdnHead::new(7, 4, 5, &mut seeded(1)).unwrap();
        head.pi = Dense::zeros(7, 4);
        let mix = head.forward(&[0.3, -1.0, 2.0, 0.0, 5.0, -3.3, 0.1]).unwrap();
        assert!(mix.pi().iter().all(|&p| p == 0.25));
    }

    #[test]
    fn zero_sigma_layer_gives_unit_deviation() {
        let mut head = MdnHead::new(3, 2, 5, &mut seeded(1)).unwrap();
        head.sigma = Dense::zeros(3, 10);
        let mix = head.forward(&[1.0, 2.0, 3.0]).unwrap();
        assert!(mix.sigma().iter().all(|&s| s == 1.0));
    }

    #[test]
    fn softmax_of_log_three_and_zero() {
        let p = softmax(&[3f64.ln(), 0.0]);
        assert!((p[0] - 0.75).abs() < 1e-12);
        assert!((p[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn output_sizes_follow_k() {
        let head = MdnHead::new(150, 3, 5, &mut seeded(2)).unwrap();
        assert_eq!(head.output_sizes(), [3, 15, 15]);
        let bad = MdnHead::from_parts(Dense::zeros(4, 3), Dense::zeros(4, 10), Dense::zeros(4, 15), 5);
        assert!(matches!(bad, Err(Error::Structure(_))));
    }
}
