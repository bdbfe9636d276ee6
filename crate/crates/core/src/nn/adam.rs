use ndarray::Zip;

use super::layer::Dense;
use super::Parameters;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moments, one pair of buffers per parameter layer.
#[derive(Debug, Clone)]
pub struct AdamState {
    config: AdamConfig,
    first_moment: Vec<Dense>,
    second_moment: Vec<Dense>,
    step_count: u64,
}

impl AdamState {
    pub fn new<P: Parameters + ?Sized>(model: &P, config: AdamConfig) -> Self {
        let zeros: Vec<Dense> = model.param_layers().iter().map(|l| l.zeros_like()).collect();
        Self {
            config,
            first_moment: zeros.clone(),
            second_moment: zeros,
            step_count: 0,
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// One bias-corrected Adam update of every parameter in `model`.
    pub fn step<P: Parameters + ?Sized>(&mut self, model: &mut P, grads: &[Dense]) -> Result<()> {
        let mut params = model.param_layers_mut();
        if params.len() != grads.len() || params.len() != self.first_moment.len() {
            return Err(Error::Structure(format!(
                "adam: {} parameter layers, {} gradient layers, {} moment layers",
                params.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        for (l, (p, g)) in params.iter().zip(grads).enumerate() {
            if !p.same_shape(g) || !p.same_shape(&self.first_moment[l]) {
                return Err(Error::Structure(format!("adam: shape mismatch at layer {l}")));
            }
        }

        self.step_count += 1;
        let AdamConfig {
            learning_rate: lr,
            beta1: b1,
            beta2: b2,
            epsilon: eps,
        } = self.config;
        let t = self.step_count as i32;
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let update = |theta: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *theta -= lr * m_hat / (v_hat.sqrt() + eps);
        };

        for (l, p) in params.iter_mut().enumerate() {
            let (m, v) = (&mut self.first_moment[l], &mut self.second_moment[l]);
            Zip::from(&mut p.weight)
                .and(&mut m.weight)
                .and(&mut v.weight)
                .and(&grads[l].weight)
                .for_each(|th, m, v, &g| update(th, m, v, g));
            Zip::from(&mut p.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .and(&grads[l].bias)
                .for_each(|th, m, v, &g| update(th, m, v, g));
        }
        Ok(())
    }
}
