use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{create_dir, format_log, k_dir, write_file, TRAIN_LOG_HEADER};
use crate::autoencoder::{mean_baseline_mse, train_ae, AeModel};
use crate::config::{RunConfig, CONFIG_FILE};
use crate::dataset::{save_metadata, DatasetMetadata, LabeledDataset, Split, Xy};
use crate::error::{Error, Result};
use crate::mdn::{LATENT_TRUNK_WIDTHS, SPECTRUM_TRUNK_WIDTHS};
use crate::train::fit;
use crate::transfer::{sweep_with, MdnData, StrategyKind, SweepConfig, SweepResult};

pub const MODEL_FILE: &str = "model.json";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const AE_FILE: &str = "ae.json";
pub const AE_LOG_FILE: &str = "ae_log.csv";

const AE_LOG_HEADER: &str = "epoch,train_mse,val_mse";

#[derive(Debug, Clone, PartialEq)]
pub struct GenDataArgs {
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
}

/// Generates a dataset and writes it as CSV plus a `.meta.json` sidecar.
pub fn cmd_gen_data(args: &GenDataArgs) -> Result<DatasetMetadata> {
    let (ds, meta) = LabeledDataset::generate(args.samples, args.seed)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    ds.save_csv(&args.out)?;
    save_metadata(&args.out, &meta)?;
    Ok(meta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeSummary {
    /// False when a previously trained autoencoder was loaded.
    pub trained: bool,
    pub epochs: usize,
    pub best_epoch: usize,
    pub seconds: f64,
    pub val_mse: f64,
    pub baseline_val_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub k: usize,
    pub epochs: usize,
    pub best_epoch: usize,
    pub seconds: f64,
    pub train_nll: f64,
    pub val_nll: f64,
    pub test_nll: f64,
    pub autoencoder: Option<AeSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub strategy: StrategyKind,
    pub k_max: usize,
    pub total_epochs: usize,
    pub sweep_seconds: f64,
    /// Sweep time plus autoencoder training time.
    pub total_seconds: f64,
    pub autoencoder: Option<AeSummary>,
}

struct Prepared {
    train: Xy,
    val: Xy,
    test: Xy,
    trunk: &'static [usize],
    ae: Option<AeSummary>,
}

fn encode(ae: &AeModel, xy: &Xy) -> Result<Xy> {
    Ok(Xy { x: ae.encode_batch(xy.x.view())?, y: xy.y.clone() })
}

/// Loads the dataset and, when configured, trains or loads the autoencoder
/// (saving it to the run directory) and swaps spectra for latents.
fn prepare(cfg: &RunConfig, out: &Path) -> Result<Prepared> {
    let ds = LabeledDataset::load_csv(&cfg.dataset)?;
    let (train, val, test) = (ds.xy(Split::Train), ds.xy(Split::Val), ds.xy(Split::Test));
    if train.is_empty() || val.is_empty() {
        return Err(Error::Argument("dataset needs nonempty train and validation partitions".into()));
    }
    if !cfg.use_autoencoder {
        return Ok(Prepared { train, val, test, trunk: &SPECTRUM_TRUNK_WIDTHS, ae: None });
    }
    let start = Instant::now();
    let (ae, mut summary) = match &cfg.autoencoder_path {
        Some(path) => {
            let ae = AeModel::load(path)?;
            (ae, AeSummary { trained: false, epochs: 0, best_epoch: 0, seconds: 0.0, val_mse: 0.0, baseline_val_mse: 0.0 })
        }
        None => {
            let outcome = train_ae(train.x.view(), val.x.view(), &cfg.train_config(), cfg.seed)?;
            write_file(&out.join(AE_LOG_FILE), &format_log(AE_LOG_HEADER, &outcome.log))?;
            let s = AeSummary {
                trained: true,
                epochs: outcome.epochs(),
                best_epoch: outcome.best_epoch,
                seconds: 0.0,
                val_mse: 0.0,
                baseline_val_mse: 0.0,
            };
            (outcome.model, s)
        }
    };
    summary.seconds = start.elapsed().as_secs_f64();
    summary.val_mse = ae.mse(val.x.view())?;
    summary.baseline_val_mse = mean_baseline_mse(train.x.view(), val.x.view());
    ae.save(&out.join(AE_FILE))?;
    Ok(Prepared {
        train: encode(&ae, &train)?,
        val: encode(&ae, &val)?,
        test: encode(&ae, &test)?,
        trunk: &LATENT_TRUNK_WIDTHS,
        ae: Some(summary),
    })
}

fn sweep_config(cfg: &RunConfig, trunk: &[usize], k_max: usize, strategy: StrategyKind) -> SweepConfig {
    let mut sc = SweepConfig::new(trunk, k_max, strategy, cfg.seed);
    sc.dropout_rate = cfg.dropout_rate;
    sc.growth_jitter = cfg.growth_jitter;
    sc.train = cfg.train_config();
    sc
}

fn start_run(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    create_dir(&cfg.out_dir)?;
    cfg.save(&cfg.out_dir.join(CONFIG_FILE))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    write_file(path, &s)
}

/// Trains one `cfg.k`-component network from scratch. Initialization and
/// training use the same seed as the `K = cfg.k` step of a `none` sweep.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainSummary> {
    if cfg.strategy != StrategyKind::None {
        return Err(Error::Argument("train fits a single network from scratch; use sweep for transfer strategies".into()));
    }
    start_run(cfg)?;
    let out = &cfg.out_dir;
    let data = prepare(cfg, out)?;
    let sc = sweep_config(cfg, data.trunk, cfg.k, StrategyKind::None);
    let start = Instant::now();
    let outcome = fit(
        sc.fresh_model(cfg.k)?,
        (data.train.x.view(), data.train.y.view()),
        (data.val.x.view(), data.val.y.view()),
        &sc.train,
        sc.seed_for(cfg.k),
    )?;
    let seconds = start.elapsed().as_secs_f64();
    let model = &outcome.model;
    model.save(&out.join(MODEL_FILE))?;
    write_file(&out.join(TRAIN_LOG_FILE), &format_log(TRAIN_LOG_HEADER, &outcome.log))?;
    let test_nll = if data.test.is_empty() { f64::NAN } else { model.mean_nll(data.test.x.view(), data.test.y.view())? };
    let summary = TrainSummary {
        k: cfg.k,
        epochs: outcome.epochs(),
        best_epoch: outcome.best_epoch,
        seconds,
        train_nll: model.mean_nll(data.train.x.view(), data.train.y.view())?,
        val_nll: outcome.best_val_loss,
        test_nll,
        autoencoder: data.ae,
    };
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// Trains `K = 1..=cfg.k_max`, writing each checkpoint and log as it finishes.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<(SweepResult, SweepSummary)> {
    start_run(cfg)?;
    let out = &cfg.out_dir;
    let data = prepare(cfg, out)?;
    if data.test.is_empty() {
        return Err(Error::Argument("sweep needs a nonempty test partition".into()));
    }
    let sc = sweep_config(cfg, data.trunk, cfg.k_max, cfg.strategy);
    let result = sweep_with(
        MdnData { train: &data.train, val: &data.val, test: &data.test },
        &sc,
        |_, _| {},
        |entry| {
            let dir = k_dir(out, entry.k);
            create_dir(&dir)?;
            entry.model.save(&dir.join(MODEL_FILE))?;
            write_file(&dir.join(TRAIN_LOG_FILE), &format_log(TRAIN_LOG_HEADER, &entry.log))
        },
    )?;
    result.write_csv(&out.join(SWEEP_FILE))?;
    let ae_seconds = data.ae.as_ref().map_or(0.0, |a| a.seconds);
    let summary = SweepSummary {
        strategy: cfg.strategy,
        k_max: cfg.k_max,
        total_epochs: result.total_epochs(),
        sweep_seconds: result.total_seconds(),
        total_seconds: result.total_seconds() + ae_seconds,
        autoencoder: data.ae,
    };
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok((result, summary))
}
