use crate::error::{Error, Result};

pub const DEFAULT_PATIENCE: usize = 50;
pub const DEFAULT_MIN_DELTA: f64 = 1e-4;
pub const DEFAULT_MAX_EPOCHS: usize = 1000;

/// Patience-based early stopping that retains the best checkpoint seen.
#[derive(Debug, Clone)]
pub struct EarlyStopping<C> {
    patience: usize,
    max_epochs: usize,
    min_delta: f64,
    best_val_loss: f64,
    best_epoch: usize,
    best: Option<C>,
    epochs_since_improvement: usize,
    epoch: usize,
}

impl<C: Clone> EarlyStopping<C> {
    pub fn new(patience: usize, max_epochs: usize, min_delta: f64) -> Result<Self> {
        if patience == 0 || max_epochs == 0 {
            return Err(Error::Argument("patience and max_epochs must be positive".into()));
        }
        Ok(Self {
            patience,
            max_epochs,
            min_delta,
            best_val_loss: f64::INFINITY,
            best_epoch: 0,
            best: None,
            epochs_since_improvement: 0,
            epoch: 0,
        })
    }

    /// Records the validation loss of the epoch that just finished.
    /// Returns `true` when training should stop.
    pub fn update(&mut self, val_loss: f64, checkpoint: &C) -> Result<bool> {
        if val_loss.is_nan() {
            return Err(Error::Diverged(format!(
                "validation loss is NaN at epoch {}",
                self.epoch + 1
            )));
        }
        self.epoch += 1;
        if val_loss < self.best_val_loss - self.min_delta {
            self.best_val_loss = val_loss;
            self.best_epoch = self.epoch;
            self.best = Some(checkpoint.clone());
            self.epochs_since_improvement = 0;
        } else {
            self.epochs_since_improvement += 1;
        }
        Ok(self.epochs_since_improvement >= self.patience || self.epoch >= self.max_epochs)
    }

    pub fn best_val_loss(&self) -> f64 {
        self.best_val_loss
    }

    /// 1-based epoch of the retained checkpoint (0 before any update).
    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn epochs_since_improvement(&self) -> usize {
        self.epochs_since_improvement
    }

    pub fn best(&self) -> Option<&C> {
        self.best.as_ref()
    }

    pub fn into_best(self) -> Option<C> {
        self.best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decreasing_losses_run_to_max_epochs() {
        let mut es = EarlyStopping::new(3, 40, 1e-4).unwrap();
        for e in 1..=40 {
            let stop = es.update(10.0 - e as f64 * 0.1, &e).unwrap();
            assert_eq!(stop, e == 40);
        }
        assert_eq!(es.best(), Some(&40));
    }

    #[test]
    fn constant_loss_stops_after_patience() {
        let mut es = EarlyStopping::new(50, 1000, 1e-4).unwrap();
        let mut stopped_at = None;
        for e in 1..=1000 {
            if es.update(1.0, &e).unwrap() {
                stopped_at = Some(e);
                break;
            }
        }
        assert_eq!(stopped_at, Some(51));
        assert_eq!(es.best_epoch(), 1);
    }

    #[test]
    fn best_checkpoint_is_argmin() {
        let mut es = EarlyStopping::new(3, 100, 1e-4).unwrap();
        let losses = [3.0, 2.0, 2.5, 2.4, 2.3, 2.2];
        for (i, &l) in losses.iter().enumerate() {
            if es.update(l, &(i + 1)).unwrap() {
                break;
            }
        }
        assert_eq!(es.into_best(), Some(2));
    }

    #[test]
    fn improvement_smaller_than_min_delta_counts_as_stall() {
        let mut es = EarlyStopping::new(2, 100, 1e-4).unwrap();
        es.update(1.0, &1).unwrap();
        assert!(!es.update(1.0 - 5e-5, &2).unwrap());
        assert!(es.update(1.0 - 9e-5, &3).unwrap());
        assert_eq!(es.best(), Some(&1));
    }

    #[test]
    fn nan_loss_is_an_error() {
        let mut es = EarlyStopping::new(2, 10, 0.0).unwrap();
        assert!(matches!(es.update(f64::NAN, &0), Err(Error::Diverged(_))));
    }

    #[test]
    fn best_loss_never_increases() {
        let mut es = EarlyStopping::new(100, 1000, 0.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..200u32 {
            let l = ((i * 7919) % 97) as f64;
            es.update(l, &i).unwrap();
            assert!(es.best_val_loss() <= prev);
            prev = es.best_val_loss();
        }
    }
}
