//! Diagonal Gaussian mixtures and the stabilized negative log-likelihood.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// The additive constant applied both to every standard deviation and to the
/// mixture density before taking the logarithm.
pub const STABILIZER: f64 = 1e-5;

/// `-ln(STABILIZER)`: the loss of a target infinitely far from every mean.
pub const LOSS_CEILING: f64 = 11.512_925_464_970_229;

pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Mixture weights, means and standard deviations of `K` diagonal Gaussians
/// over `N` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    pi: Vec<f64>,
    mu: Array2<f64>,
    sigma: Array2<f64>,
}

impl MixtureParams {
    pub fn new(pi: Vec<f64>, mu: Array2<f64>, sigma: Array2<f64>) -> Result<Self> {
        let k = pi.len();
        if k == 0 {
            return Err(Error::Argument("mixture needs at least one component".into()));
        }
        if mu.nrows() != k || sigma.dim() != mu.dim() {
            return Err(Error::Structure(format!(
                "pi has {k} entries, mu is {:?}, sigma is {:?}",
                mu.dim(),
                sigma.dim()
            )));
        }
        if pi.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::Domain("mixing coefficients must lie in (0, 1]".into()));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("mixing coefficients sum to {total}")));
        }
        if sigma.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Domain("standard deviations must be strictly positive".into()));
        }
        Ok(Self { pi, mu, sigma })
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn n_params(&self) -> usize {
        self.mu.ncols()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn mu(&self) -> &Array2<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &Array2<f64> {
        &self.sigma
    }

    pub fn mean(&self, k: usize) -> ArrayView1<'_, f64> {
        self.mu.row(k)
    }

    pub fn std_dev(&self, k: usize) -> ArrayView1<'_, f64> {
        self.sigma.row(k)
    }

    /// Reorders components; `order[i]` is the source index of new component `i`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.k()];
        for &o in order {
            if o >= self.k() || std::mem::replace(&mut seen[o], true) {
                return Err(Error::Argument(format!("{order:?} is not a permutation")));
            }
        }
        if order.len() != self.k() {
            return Err(Error::Argument(format!("{order:?} is not a permutation")));
        }
        let pi = order.iter().map(|&o| self.pi[o]).collect();
        let mu = self.mu.select(ndarray::Axis(0), order);
        let sigma = self.sigma.select(ndarray::Axis(0), order);
        Ok(Self { pi, mu, sigma })
    }
}

/// Log-density of a diagonal Gaussian; no validation.
pub(crate) fn log_gaussian(y: &[f64], mu: &[f64], sigma: &[f64]) -> f64 {
    y.iter()
        .zip(mu)
        .zip(sigma)
        .map(|((&y, &m), &s)| {
            let r = (y - m) / s;
            -HALF_LN_2PI - s.ln() - 0.5 * r * r
        })
        .sum()
}

/// Density of one diagonal Gaussian component, evaluated in log space.
pub fn component_pdf(y: &[f64], mu_k: &[f64], sigma_k: &[f64]) -> Result<f64> {
    if mu_k.len() != y.len() || sigma_k.len() != y.len() {
        return Err(Error::InputShape {
            expected: y.len(),
            got: mu_k.len().min(sigma_k.len()),
        });
    }
    if sigma_k.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Domain("standard deviation must be positive".into()));
    }
    Ok(log_gaussian(y, mu_k, sigma_k).exp())
}

/// `max + ln(sum(exp(v - max)))`, `-inf` for an all `-inf` input.
pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// `-ln(exp(log_density) + STABILIZER)`.
#[inline]
pub(crate) fn shifted_nll(log_density: f64) -> f64 {
    -(log_density.exp() + STABILIZER).ln()
}

/// Stabilized mixture negative log-likelihood of `y`:
/// `-ln( sum_k pi_k * phi_k(y; mu_k, sigma_k + 1e-5) + 1e-5 )`.
///
/// The inner sum is accumulated with log-sum-exp in component order.
pub fn nll_loss(mix: &MixtureParams, y: &[f64]) -> Result<f64> {
    if y.len() != mix.n_params() {
        return Err(Error::InputShape {
            expected: mix.n_params(),
            got: y.len(),
        });
    }
    let terms: Vec<f64> = (0..mix.k())
        .map(|k| {
            let sigma: Vec<f64> = mix.sigma.row(k).iter().map(|s| s + STABILIZER).collect();
            mix.pi[k].ln() + log_gaussian(y, mix.mu.row(k).as_slice().unwrap(), &sigma)
        })
        .collect();
    Ok(shifted_nll(log_sum_exp(&terms)))
}

/// A candidate design: the mean of one mixture component.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Zero-based component index.
    pub component: usize,
    pub pi: f64,
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
}

/// The `top_m` components ranked by mixing coefficient, largest first;
/// equal coefficients keep component order.
pub fn predict_modes(mix: &MixtureParams, top_m: usize) -> Result<Vec<Candidate>> {
    if top_m == 0 || top_m > mix.k() {
        return Err(Error::Argument(format!(
            "top_m must lie in 1..={}, got {top_m}",
            mix.k()
        )));
    }
    let mut order: Vec<usize> = (0..mix.k()).collect();
    order.sort_by(|&a, &b| mix.pi[b].total_cmp(&mix.pi[a]));
    Ok(order
        .into_iter()
        .take(top_m)
        .map(|k| Candidate {
            component: k,
            pi: mix.pi[k],
            mean: mix.mu.row(k).to_vec(),
            std_dev: mix.sigma.row(k).to_vec(),
        })
        .collect())
}

fn normal_pdf(t: f64, mu: f64, sigma: f64) -> f64 {
    let r = (t - mu) / sigma;
    (-0.5 * r * r).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// `sum_k pi_k * N(t; mu_kc, sigma_kc)` at every grid point, for the
/// zero-based output index `param`.
pub fn weighted_marginal_pdf(mix: &MixtureParams, param: usize, grid: &[f64]) -> Result<Vec<f64>> {
    if param >= mix.n_params() {
        return Err(Error::Argument(format!(
            "parameter index {param} out of range for {} outputs",
            mix.n_params()
        )));
    }
    Ok(grid
        .iter()
        .map(|&t| {
            (0..mix.k())
                .map(|k| mix.pi[k] * normal_pdf(t, mix.mu[[k, param]], mix.sigma[[k, param]]))
                .sum()
        })
        .collect())
}

/// Sorted evaluation grid covering `mu_k +- 8 sigma_k` of every component with
/// `points_per_component` points each, so narrow components stay resolved.
pub fn marginal_grid(mix: &MixtureParams, param: usize, points_per_component: usize) -> Vec<f64> {
    let n = points_per_component.max(2);
    let mut grid = Vec::with_capacity(n * mix.k());
    for k in 0..mix.k() {
        let (m, s) = (mix.mu[[k, param]], mix.sigma[[k, param]]);
        let (lo, hi) = (m - 8.0 * s, m + 8.0 * s);
        grid.extend((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Trapezoid-rule integral of samples `ys` over the sorted abscissae `xs`.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}
