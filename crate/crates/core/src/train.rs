//! Mini-batch Adam training with early stopping.

use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdn::MdnModel;
use crate::nn::{
    AdamConfig, AdamState, Dense, EarlyStopping, Mode, Parameters, DEFAULT_MAX_EPOCHS,
    DEFAULT_MIN_DELTA, DEFAULT_PATIENCE,
};
use crate::rng::{stream_rng, Prng, Stream};

/// A model with a differentiable mini-batch objective.
pub trait Trainable: Parameters + Clone {
    fn batch_loss(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView2<'_, f64>,
        mode: Mode,
        rng: &mut Prng,
    ) -> Result<(f64, Vec<Dense>)>;

    fn eval_loss(&self, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<f64>;
}

impl Trainable for MdnModel {
    fn batch_loss(
        &self,
        x: ArrayView2<'_, f64>,
        y: ArrayView2<'_, f64>,
        mode: Mode,
        rng: &mut Prng,
    ) -> Result<(f64, Vec<Dense>)> {
        self.batch_nll(x, y, mode, rng)
    }

    fn eval_loss(&self, x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<f64> {
        self.mean_nll(x, y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            learning_rate: 1e-3,
            max_epochs: DEFAULT_MAX_EPOCHS,
            patience: DEFAULT_PATIENCE,
            min_delta: DEFAULT_MIN_DELTA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Sample-weighted mean of the train-mode mini-batch losses.
    pub train_loss: f64,
    /// Eval-mode loss on the validation partition.
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    /// Best-validation model.
    pub model: M,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

impl<M> TrainOutcome<M> {
    /// Epochs actually run, including the patience window.
    pub fn epochs(&self) -> usize {
        self.log.len()
    }
}

pub fn fit<M: Trainable>(
    model: M,
    train: (ArrayView2<'_, f64>, ArrayView2<'_, f64>),
    val: (ArrayView2<'_, f64>, ArrayView2<'_, f64>),
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome<M>> {
    fit_with(model, train, val, config, seed, |_| {})
}

/// [`fit`] with a callback after every epoch.
pub fn fit_with<M: Trainable>(
    mut model: M,
    (train_x, train_y): (ArrayView2<'_, f64>, ArrayView2<'_, f64>),
    (val_x, val_y): (ArrayView2<'_, f64>, ArrayView2<'_, f64>),
    config: &TrainConfig,
    seed: u64,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome<M>> {
    let n = train_x.nrows();
    if n == 0 || val_x.nrows() == 0 {
        return Err(Error::Argument("training and validation sets must be nonempty".into()));
    }
    if config.batch_size == 0 || !(config.learning_rate > 0.0) {
        return Err(Error::Argument("batch size and learning rate must be positive".into()));
    }
    let mut adam = AdamState::new(
        &model,
        AdamConfig {
            learning_rate: config.learning_rate,
            ..AdamConfig::default()
        },
    );
    let mut stopper = EarlyStopping::new(config.patience, config.max_epochs, config.min_delta)?;
    let mut shuffle_rng = stream_rng(seed, Stream::Shuffle);
    let mut dropout_rng = stream_rng(seed, Stream::Dropout);
    let mut order: Vec<usize> = (0..n).collect();
    let mut log = Vec::new();

    loop {
        let epoch = log.len() + 1;
        order.shuffle(&mut shuffle_rng);
        let mut running = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let bx = train_x.select(Axis(0), chunk);
            let by = train_y.select(Axis(0), chunk);
            let (loss, grads) = model
                .batch_loss(bx.view(), by.view(), Mode::Train, &mut dropout_rng)
                .map_err(|e| match e {
                    Error::Diverged(m) => Error::Diverged(format!("epoch {epoch}: {m}")),
                    other => other,
                })?;
            running += loss * chunk.len() as f64;
            adam.step(&mut model, &grads)?;
        }
        let val_loss = model.eval_loss(val_x, val_y)?;
        let entry = EpochLog {
            epoch,
            train_loss: running / n as f64,
            val_loss,
        };
        log.push(entry);
        on_epoch(&entry);
        if stopper.update(val_loss, &model)? {
            break;
        }
    }

    let best_epoch = stopper.best_epoch();
    let best_val_loss = stopper.best_val_loss();
    let model = stopper
        .into_best()
        .ok_or_else(|| Error::Diverged("no finite validation loss recorded".into()))?;
    Ok(TrainOutcome {
        model,
        log,
        best_epoch,
        best_val_loss,
    })
}
