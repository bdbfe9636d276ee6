#![allow(dead_code)]

use mdn_inverse::mdn::MdnModel;
use mdn_inverse::nn::{Dense, Mode, Parameters};
use mdn_inverse::rng::{seeded, Prng};
use ndarray::Array2;
use rand::Rng;

pub const FD_STEP: f64 = 1e-5;
/// Gradients smaller than this are compared absolutely.
pub const FD_FLOOR: f64 = 1e-7;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(FD_FLOOR)
}

pub fn uniform(rng: &mut Prng, rows: usize, cols: usize, lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(lo..hi))
}

/// Glorot init with randomized biases so that no parameter sits at a special point.
pub fn toy_mdn(seed: u64, trunk: &[usize], k: usize, n: usize, dropout: f64) -> MdnModel {
    let mut rng = seeded(seed);
    let mut m = MdnModel::new(trunk, k, n, dropout, &mut rng).unwrap();
    for layer in m.param_layers_mut() {
        layer.bias.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    }
    m
}

/// Largest relative error between the analytic gradient and central finite
/// differences over every parameter. The dropout stream is re-seeded for each
/// evaluation so the masks are identical.
pub fn mdn_max_grad_error(model: &MdnModel, x: &Array2<f64>, y: &Array2<f64>, mode: Mode) -> f64 {
    let mask_seed = 99;
    let (_, grads) = model.batch_nll(x.view(), y.view(), mode, &mut seeded(mask_seed)).unwrap();
    let loss = |m: &MdnModel| m.batch_nll(x.view(), y.view(), mode, &mut seeded(mask_seed)).unwrap().0;
    max_error(model, &grads, loss)
}

fn param_mut<M: Parameters>(m: &mut M, layer: usize, idx: usize) -> &mut f64 {
    let l = m.param_layers_mut().swap_remove(layer);
    let (w_len, cols) = (l.weight.len(), l.weight.ncols());
    if idx < w_len {
        &mut l.weight[[idx / cols, idx % cols]]
    } else {
        &mut l.bias[idx - w_len]
    }
}

pub fn max_error<M, F>(model: &M, grads: &[Dense], loss: F) -> f64
where
    M: Parameters + Clone,
    F: Fn(&M) -> f64,
{
    let mut worst: f64 = 0.0;
    let mut probe = model.clone();
    for (li, g) in grads.iter().enumerate() {
        let analytic: Vec<f64> = g.weight.iter().chain(g.bias.iter()).copied().collect();
        for (idx, &a) in analytic.iter().enumerate() {
            let orig = *param_mut(&mut probe, li, idx);
            *param_mut(&mut probe, li, idx) = orig + FD_STEP;
            let up = loss(&probe);
            *param_mut(&mut probe, li, idx) = orig - FD_STEP;
            let down = loss(&probe);
            *param_mut(&mut probe, li, idx) = orig;
            worst = worst.max(rel_err(a, (up - down) / (2.0 * FD_STEP)));
        }
    }
    worst
}
