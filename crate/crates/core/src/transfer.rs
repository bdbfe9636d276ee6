//! Growing a trained `K-1` component network into a `K` component one, and the
//! `K = 1..K_max` sweep built on it.
//!
//! Growth keeps the trunk, zeroes every weight and bias of the mixing head so
//! each component starts at `1/K`, keeps the existing mean and deviation rows,
//! and fills the new component's rows from a donor: a random earlier
//! component (`tl1`) or component 1 (`tl2`).

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Xy;
use crate::error::{Error, Result};
use crate::mdn::MdnModel;
use crate::nn::{Dense, DEFAULT_DROPOUT_RATE};
use crate::rng::{derive_seed, mix64, seeded, stream_rng, Stream};
use crate::train::{fit_with, EpochLog, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    /// Every `K` trained from a fresh initialization.
    #[default]
    None,
    /// New component copies a uniformly chosen earlier component.
    Tl1,
    /// New component copies component 1.
    Tl2,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::None => "none",
            StrategyKind::Tl1 => "tl1",
            StrategyKind::Tl2 => "tl2",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(StrategyKind::None),
            "tl1" => Ok(StrategyKind::Tl1),
            "tl2" => Ok(StrategyKind::Tl2),
            other => Err(Error::Argument(format!("unknown strategy '{other}' (none|tl1|tl2)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthStrategy {
    pub kind: StrategyKind,
    /// Only consulted by `tl1`.
    pub rng_seed: u64,
}

impl GrowthStrategy {
    pub fn new(kind: StrategyKind, rng_seed: u64) -> Self {
        Self { kind, rng_seed }
    }
}

/// Zero-based index of the component whose rows seed the new component when
/// growing from `prev_k` components.
pub fn donor_index(prev_k: usize, strategy: &GrowthStrategy) -> Result<usize> {
    if prev_k == 0 {
        return Err(Error::Argument("cannot grow an empty mixture".into()));
    }
    match strategy.kind {
        StrategyKind::None => Err(Error::Argument(
            "growth is only defined for the tl1 and tl2 strategies".into(),
        )),
        StrategyKind::Tl1 => {
            let mut rng = seeded(mix64(strategy.rng_seed ^ (prev_k as u64 + 1)));
            Ok(rng.random_range(0..prev_k))
        }
        StrategyKind::Tl2 => Ok(0),
    }
}

/// Adds one component copied from `donor` (zero-based); the mixing head is
/// reset to zero.
pub fn grow_from_donor(prev: &MdnModel, donor: usize) -> Result<MdnModel> {
    let k = prev.k();
    let n = prev.n_params();
    if donor >= k {
        return Err(Error::Argument(format!("donor {donor} out of range for K = {k}")));
    }
    let features = prev.head.feature_width();
    let extend = |old: &Dense| {
        let mut d = Dense::zeros(features, (k + 1) * n);
        for r in 0..k * n {
            d.weight.row_mut(r).assign(&old.weight.row(r));
            d.bias[r] = old.bias[r];
        }
        for j in 0..n {
            d.weight.row_mut(k * n + j).assign(&old.weight.row(donor * n + j));
            d.bias[k * n + j] = old.bias[donor * n + j];
        }
        d
    };
    let mut head = prev.head.clone();
    head.pi = Dense::zeros(features, k + 1);
    head.mu = extend(&prev.head.mu);
    head.sigma = extend(&prev.head.sigma);
    let head = crate::mdn::MdnHead::from_parts(head.pi, head.mu, head.sigma, n)?;
    MdnModel::from_parts(prev.trunk.clone(), head)
}

pub fn grow(prev: &MdnModel, strategy: &GrowthStrategy) -> Result<MdnModel> {
    let donor = donor_index(prev.k(), strategy)?;
    grow_from_donor(prev, donor)
}

/// Default noise scale applied to a freshly grown component. An exact copy of
/// its donor receives identical gradients forever, so the pair never separates
/// unless the tie is broken.
pub const DEFAULT_GROWTH_JITTER: f64 = 0.05;

/// Adds Gaussian noise of standard deviation `scale` to the mean and deviation
/// rows of `component` (zero-based).
pub fn jitter_component(model: &mut MdnModel, component: usize, scale: f64, seed: u64) -> Result<()> {
    use rand_distr::{Distribution, Normal};
    let n = model.n_params();
    if component >= model.k() {
        return Err(Error::Argument(format!("component {component} out of range")));
    }
    let normal = Normal::new(0.0, scale).map_err(|e| Error::Argument(e.to_string()))?;
    let mut rng = stream_rng(seed, Stream::Jitter);
    for layer in [&mut model.head.mu, &mut model.head.sigma] {
        for r in component * n..(component + 1) * n {
            layer.weight.row_mut(r).mapv_inplace(|w| w + normal.sample(&mut rng));
            layer.bias[r] += normal.sample(&mut rng);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub k_max: usize,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub trunk_widths: Vec<usize>,
    pub n_params: usize,
    pub dropout_rate: f64,
    /// Standard deviation of the noise added to the new component's rows after
    /// growth; zero keeps the exact copy.
    pub growth_jitter: f64,
    pub train: TrainConfig,
}

impl SweepConfig {
    pub fn new(trunk_widths: &[usize], k_max: usize, strategy: StrategyKind, seed: u64) -> Self {
        Self {
            k_max,
            strategy,
            seed,
            trunk_widths: trunk_widths.to_vec(),
            n_params: 5,
            dropout_rate: DEFAULT_DROPOUT_RATE,
            growth_jitter: DEFAULT_GROWTH_JITTER,
            train: TrainConfig::default(),
        }
    }

    /// Seed of every random stream used while training the `k`-component model.
    pub fn seed_for(&self, k: usize) -> u64 {
        self.seed.wrapping_add(k as u64)
    }

    pub fn growth(&self) -> GrowthStrategy {
        GrowthStrategy::new(self.strategy, derive_seed(self.seed, Stream::Donor))
    }

    pub fn fresh_model(&self, k: usize) -> Result<MdnModel> {
        MdnModel::new(
            &self.trunk_widths,
            k,
            self.n_params,
            self.dropout_rate,
            &mut stream_rng(self.seed_for(k), Stream::Init),
        )
    }
}

/// Train/validation/test partitions fed to the network.
#[derive(Debug, Clone, Copy)]
pub struct MdnData<'a> {
    pub train: &'a Xy,
    pub val: &'a Xy,
    pub test: &'a Xy,
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub k: usize,
    pub strategy: StrategyKind,
    pub epochs: usize,
    pub best_epoch: usize,
    pub seconds: f64,
    pub train_nll: f64,
    pub val_nll: f64,
    pub test_nll: f64,
    pub log: Vec<EpochLog>,
    pub model: MdnModel,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub strategy: StrategyKind,
    pub entries: Vec<SweepEntry>,
}

pub const SWEEP_CSV_HEADER: &str = "K,strategy,epochs,seconds,train_nll,val_nll,test_nll";

impl SweepResult {
    pub fn total_epochs(&self) -> usize {
        self.entries.iter().map(|e| e.epochs).sum()
    }

    pub fn total_seconds(&self) -> f64 {
        self.entries.iter().map(|e| e.seconds).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(SWEEP_CSV_HEADER);
        s.push('\n');
        for e in &self.entries {
            s.push_str(&format!(
                "{},{},{},{:.3},{:.16e},{:.16e},{:.16e}\n",
                e.k, e.strategy, e.epochs, e.seconds, e.train_nll, e.val_nll, e.test_nll
            ));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv().as_bytes()).map_err(|e| Error::io(path, e))
    }
}

pub fn sweep(data: MdnData<'_>, config: &SweepConfig) -> Result<SweepResult> {
    sweep_with(data, config, |_, _| {}, |_| Ok(()))
}

/// Trains `K = 1..=k_max`. With a transfer strategy each `K >= 2` starts from
/// the grown `K - 1` model; with `none` it starts from a fresh initialization
/// seeded by `seed + K`.
pub fn sweep_with(
    data: MdnData<'_>,
    config: &SweepConfig,
    mut on_epoch: impl FnMut(usize, &EpochLog),
    mut on_entry: impl FnMut(&SweepEntry) -> Result<()>,
) -> Result<SweepResult> {
    if config.k_max == 0 {
        return Err(Error::Argument("k_max must be at least 1".into()));
    }
    let growth = config.growth();
    let mut entries: Vec<SweepEntry> = Vec::with_capacity(config.k_max);
    for k in 1..=config.k_max {
        let with_k = |e: Error| match e {
            Error::Diverged(m) => Error::Diverged(format!("K = {k}: {m}")),
            other => other,
        };
        let start = Instant::now();
        let init = match (entries.last(), config.strategy) {
            (Some(prev), StrategyKind::Tl1 | StrategyKind::Tl2) => {
                if prev.model.trunk.widths() != config.trunk_widths.as_slice() {
                    return Err(Error::Structure(format!(
                        "previous trunk {:?} differs from configured {:?}",
                        prev.model.trunk.widths(),
                        config.trunk_widths
                    )));
                }
                let mut m = grow(&prev.model, &growth)?;
                if config.growth_jitter > 0.0 {
                    jitter_component(&mut m, k - 1, config.growth_jitter, config.seed_for(k))?;
                }
                m
            }
            _ => config.fresh_model(k)?,
        };
        let outcome = fit_with(
            init,
            (data.train.x.view(), data.train.y.view()),
            (data.val.x.view(), data.val.y.view()),
            &config.train,
            config.seed_for(k),
            |log| on_epoch(k, log),
        )
        .map_err(with_k)?;
        let model = outcome.model;
        let train_nll = model.mean_nll(data.train.x.view(), data.train.y.view()).map_err(with_k)?;
        let test_nll = model.mean_nll(data.test.x.view(), data.test.y.view()).map_err(with_k)?;
        let entry = SweepEntry {
            k,
            strategy: config.strategy,
            epochs: outcome.log.len(),
            best_epoch: outcome.best_epoch,
            seconds: start.elapsed().as_secs_f64(),
            train_nll,
            val_nll: outcome.best_val_loss,
            test_nll,
            log: outcome.log,
            model,
        };
        on_entry(&entry)?;
        entries.push(entry);
    }
    Ok(SweepResult {
        strategy: config.strategy,
        entries,
    })
}
