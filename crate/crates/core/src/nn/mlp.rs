use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

use super::activation::Activation;
use super::layer::Dense;
use super::Parameters;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Feed-forward stack of dense layers.
///
/// Layer `l` maps `widths[l]` to `widths[l + 1]`. Inverted dropout is applied
/// after the activation of every layer index listed in `dropout_after`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    widths: Vec<usize>,
    layers: Vec<Dense>,
    activations: Vec<Activation>,
    dropout_after: BTreeSet<usize>,
    dropout_rate: f64,
}

/// Activation record of a forward pass, sufficient to replay gradients.
#[derive(Debug, Clone)]
pub struct Tape {
    inputs: Vec<Array2<f64>>,
    pre_activations: Vec<Array2<f64>>,
    masks: Vec<Option<Array2<f64>>>,
}

impl Tape {
    pub fn batch_size(&self) -> usize {
        self.inputs.first().map_or(0, |x| x.nrows())
    }
}

impl MlpModel {
    pub fn from_layers(
        layers: Vec<Dense>,
        activations: Vec<Activation>,
        dropout_after: BTreeSet<usize>,
        dropout_rate: f64,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Structure("model needs at least one layer".into()));
        }
        if activations.len() != layers.len() {
            return Err(Error::Structure(format!(
                "{} layers but {} activation markers",
                layers.len(),
                activations.len()
            )));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::Argument(format!(
                "dropout rate must lie in [0, 1), got {dropout_rate}"
            )));
        }
        let mut widths = vec![layers[0].fan_in()];
        for (l, layer) in layers.iter().enumerate() {
            if layer.fan_in() != *widths.last().unwrap() {
                return Err(Error::Structure(format!(
                    "layer {l} expects {} inputs, previous layer yields {}",
                    layer.fan_in(),
                    widths.last().unwrap()
                )));
            }
            if layer.bias.len() != layer.fan_out() {
                return Err(Error::Structure(format!("layer {l} bias length mismatch")));
            }
            widths.push(layer.fan_out());
        }
        if let Some(&bad) = dropout_after.iter().find(|&&l| l >= layers.len()) {
            return Err(Error::Structure(format!("dropout after missing layer {bad}")));
        }
        if widths.contains(&0) {
            return Err(Error::Structure("layer widths must be positive".into()));
        }
        Ok(Self {
            widths,
            layers,
            activations,
            dropout_after,
            dropout_rate,
        })
    }

    /// Glorot-initialized model; every layer uses `activation`.
    pub fn new<R: Rng>(
        widths: &[usize],
        activation: Activation,
        dropout_after: BTreeSet<usize>,
        dropout_rate: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::Structure("need at least input and output widths".into()));
        }
        let layers = widths
            .windows(2)
            .map(|w| Dense::glorot(w[0], w[1], rng))
            .collect::<Vec<_>>();
        let activations = vec![activation; layers.len()];
        Self::from_layers(layers, activations, dropout_after, dropout_rate)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn set_activation(&mut self, layer: usize, activation: Activation) {
        self.activations[layer] = activation;
    }

    pub fn dropout_after(&self) -> &BTreeSet<usize> {
        &self.dropout_after
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(Dense::num_params).sum()
    }

    fn check_input(&self, cols: usize) -> Result<()> {
        if cols != self.input_width() {
            return Err(Error::InputShape {
                expected: self.input_width(),
                got: cols,
            });
        }
        Ok(())
    }

    /// Batched forward pass; rows of `input` are samples.
    pub fn forward_batch<R: Rng>(
        &self,
        input: ArrayView2<'_, f64>,
        mode: Mode,
        rng: &mut R,
    ) -> Result<(Array2<f64>, Tape)> {
        self.check_input(input.ncols())?;
        let n_layers = self.layers.len();
        let mut tape = Tape {
            inputs: Vec::with_capacity(n_layers),
            pre_activations: Vec::with_capacity(n_layers),
            masks: Vec::with_capacity(n_layers),
        };
        let mut a = input.to_owned();
        for (l, layer) in self.layers.iter().enumerate() {
            let z = affine(layer, a.view());
            let act = self.activations[l];
            let mut out = z.mapv(|x| act.apply(x));
            let mask = if mode == Mode::Train
                && self.dropout_rate > 0.0
                && self.dropout_after.contains(&l)
            {
                let keep_scale = 1.0 / (1.0 - self.dropout_rate);
                let rate = self.dropout_rate;
                let m = Array2::from_shape_simple_fn(out.dim(), || {
                    if rng.random::<f64>() < rate {
                        0.0
                    } else {
                        keep_scale
                    }
                });
                out *= &m;
                Some(m)
            } else {
                None
            };
            tape.inputs.push(a);
            tape.pre_activations.push(z);
            tape.masks.push(mask);
            a = out;
        }
        Ok((a, tape))
    }

    /// Single-sample forward pass.
    pub fn forward<R: Rng>(&self, input: &[f64], mode: Mode, rng: &mut R) -> Result<(Vec<f64>, Tape)> {
        let x = ArrayView2::from_shape((1, input.len()), input)
            .map_err(|e| Error::Structure(e.to_string()))?;
        let (out, tape) = self.forward_batch(x, mode, rng)?;
        Ok((out.into_raw_vec_and_offset().0, tape))
    }

    /// Eval-mode batched inference without recording a tape.
    pub fn predict(&self, input: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_input(input.ncols())?;
        let mut a = input.to_owned();
        for (layer, &act) in self.layers.iter().zip(&self.activations) {
            let mut z = affine(layer, a.view());
            z.mapv_inplace(|x| act.apply(x));
            a = z;
        }
        Ok(a)
    }

    /// Reverse-mode pass. Returns parameter gradients (one `Dense` per layer)
    /// and the gradient with respect to the batch input.
    pub fn backward(
        &self,
        tape: &Tape,
        output_gradient: ArrayView2<'_, f64>,
    ) -> Result<(Vec<Dense>, Array2<f64>)> {
        if tape.inputs.len() != self.layers.len() {
            return Err(Error::Structure(format!(
                "tape records {} layers, model has {}",
                tape.inputs.len(),
                self.layers.len()
            )));
        }
        for (l, (x, layer)) in tape.inputs.iter().zip(&self.layers).enumerate() {
            if x.ncols() != layer.fan_in() {
                return Err(Error::Structure(format!("tape layer {l} width mismatch")));
            }
        }
        if output_gradient.ncols() != self.output_width()
            || output_gradient.nrows() != tape.batch_size()
        {
            return Err(Error::Structure(format!(
                "output gradient shape {:?} does not match batch {} x {}",
                output_gradient.dim(),
                tape.batch_size(),
                self.output_width()
            )));
        }

        let mut grads: Vec<Dense> = Vec::with_capacity(self.layers.len());
        let mut delta = output_gradient.to_owned();
        for l in (0..self.layers.len()).rev() {
            if let Some(mask) = &tape.masks[l] {
                delta *= mask;
            }
            let act = self.activations[l];
            if act != Activation::Identity {
                ndarray::Zip::from(&mut delta)
                    .and(&tape.pre_activations[l])
                    .for_each(|d, &z| *d *= act.derivative(z));
            }
            let weight = delta.t().dot(&tape.inputs[l]);
            let bias = delta.sum_axis(Axis(0));
            let next = delta.dot(&self.layers[l].weight);
            grads.push(Dense { weight, bias });
            delta = next;
        }
        grads.reverse();
        Ok((grads, delta))
    }
}

pub(crate) fn affine(layer: &Dense, input: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut z = input.dot(&layer.weight.t());
    z += &layer.bias;
    z
}

impl Parameters for MlpModel {
    fn param_layers(&self) -> Vec<&Dense> {
        self.layers.iter().collect()
    }

    fn param_layers_mut(&mut self) -> Vec<&mut Dense> {
        self.layers.iter_mut().collect()
    }
}

#[cfg(test)]
mod tests {
    use ndarray::{array, Array1};

    use super::*;
    use crate::nn::activation::silu;
    use crate::rng::seeded;

    fn zero_model(widths: &[usize]) -> MlpModel {
        let layers = widths.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect();
        MlpModel::from_layers(
            layers,
            vec![Activation::Silu; widths.len() - 1],
            BTreeSet::new(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_model_outputs_zero() {
        let m = zero_model(&[4, 7, 3]);
        let (y, _) = m.forward(&[1.0, -2.0, 3.0, 0.5], Mode::Eval, &mut seeded(0)).unwrap();
        assert_eq!(y, vec![0.0; 3]);
    }

    #[test]
    fn identity_layer_gives_silu() {
        let mut layer = Dense::zeros(3, 3);
        layer.weight = Array2::eye(3);
        let m = MlpModel::from_layers(vec![layer], vec![Activation::Silu], BTreeSet::new(), 0.0)
            .unwrap();
        let v = [0.3, -1.2, 2.0];
        let (y, _) = m.forward(&v, Mode::Eval, &mut seeded(1)).unwrap();
        assert_eq!(y, silu(&v));
    }

    #[test]
    fn eval_is_seed_independent() {
        let m = MlpModel::new(&[5, 9, 9, 2], Activation::Silu, [0, 1].into(), 0.2, &mut seeded(3))
            .unwrap();
        let x = [0.1, 0.2, -0.3, 0.4, 0.9];
        let (a, _) = m.forward(&x, Mode::Eval, &mut seeded(10)).unwrap();
        let (b, _) = m.forward(&x, Mode::Eval, &mut seeded(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn input_shape_is_checked() {
        let m = zero_model(&[4, 2]);
        let err = m.forward(&[1.0, 2.0], Mode::Eval, &mut seeded(0)).unwrap_err();
        assert!(matches!(err, Error::InputShape { expected: 4, got: 2 }));
    }

    #[test]
    fn zero_output_gradient_gives_zero_grads() {
        let m = MlpModel::new(&[3, 4, 2], Activation::Silu, BTreeSet::new(), 0.0, &mut seeded(5))
            .unwrap();
        let (_, tape) = m.forward(&[0.5, -0.1, 0.7], Mode::Eval, &mut seeded(0)).unwrap();
        let (grads, _) = m.backward(&tape, Array2::zeros((1, 2)).view()).unwrap();
        for g in grads {
            assert!(g.weight.iter().chain(g.bias.iter()).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn linear_layer_weight_gradient_is_input() {
        let mut layer = Dense::zeros(3, 2);
        layer.weight = array![[0.3, -0.2, 0.1], [1.0, 0.5, -0.7]];
        let m = MlpModel::from_layers(vec![layer], vec![Activation::Identity], BTreeSet::new(), 0.0)
            .unwrap();
        let x = [2.0, -1.0, 0.25];
        let (_, tape) = m.forward(&x, Mode::Eval, &mut seeded(0)).unwrap();
        let (grads, _) = m.backward(&tape, Array2::ones((1, 2)).view()).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(grads[0].weight[[i, j]], x[j]);
            }
        }
        assert_eq!(grads[0].bias, Array1::<f64>::ones(2));
    }

    #[test]
    fn tape_model_mismatch_is_structural_error() {
        let a = zero_model(&[3, 4, 2]);
        let b = zero_model(&[3, 2]);
        let (_, tape) = a.forward(&[0.0; 3], Mode::Eval, &mut seeded(0)).unwrap();
        assert!(matches!(
            b.backward(&tape, Array2::zeros((1, 2)).view()),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn dropout_masks_are_replayed() {
        let m = MlpModel::new(&[3, 6, 1], Activation::Silu, [0].into(), 0.5, &mut seeded(2))
            .unwrap();
        let x = array![[0.4, -0.6, 1.1]];
        let (_, tape) = m.forward_batch(x.view(), Mode::Train, &mut seeded(8)).unwrap();
        let mask = tape.masks[0].as_ref().unwrap();
        let (grads, _) = m.backward(&tape, array![[1.0]].view()).unwrap();
        for (j, &s) in mask.row(0).iter().enumerate() {
            if s == 0.0 {
                assert_eq!(grads[1].weight[[0, j]], 0.0);
                assert!(grads[0].weight.row(j).iter().all(|&g| g == 0.0));
            }
        }
    }
}
