use std::path::{Path, PathBuf};
use std::process::Command;

use mdn_inverse::cli::{
    cmd_gen_data, cmd_predict, cmd_report, cmd_sweep, cmd_train, k_dir, parse_log, GenDataArgs, PredictArgs,
    ReportArgs, MODEL_FILE, SWEEP_FILE, TRAIN_LOG_FILE,
};
use mdn_inverse::config::{RunConfig, CONFIG_FILE, OUT_DIR_ENV};
use mdn_inverse::dataset::{rmse, surrogate_spectrum, LabeledDataset, Split, BOUNDS};
use mdn_inverse::mdn::MdnModel;
use mdn_inverse::transfer::StrategyKind;

fn dataset(dir: &Path, samples: usize) -> PathBuf {
    let out = dir.join("data.csv");
    cmd_gen_data(&GenDataArgs { samples, seed: 5, out: out.clone() }).unwrap();
    out
}

fn config(dir: &Path, data: &Path, name: &str) -> RunConfig {
    RunConfig { seed: 2, dataset: data.to_path_buf(), max_epochs: 50, out_dir: dir.join(name), ..RunConfig::default() }
}

#[test]
fn gen_data_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let meta = cmd_gen_data(&GenDataArgs { samples: 10, seed: 1, out: a.clone() }).unwrap();
    cmd_gen_data(&GenDataArgs { samples: 10, seed: 1, out: b.clone() }).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = meta.split_counts;
    assert_eq!((c.train, c.val, c.test), (8, 1, 1));
    assert!(dir.path().join("a.meta.json").exists());
}

#[test]
fn train_learns_and_logs_every_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(dir.path(), 200);
    let cfg = config(dir.path(), &data, "train");
    let summary = cmd_train(&cfg).unwrap();
    let log = parse_log(&cfg.out_dir.join(TRAIN_LOG_FILE)).unwrap();
    assert_eq!(log.len(), summary.epochs);
    assert_eq!(log.iter().map(|l| l.epoch).collect::<Vec<_>>(), (1..=log.len()).collect::<Vec<_>>());
    assert!(log.last().unwrap().train_loss < log[0].train_loss);

    // The saved model reproduces the logged validation loss of its epoch.
    let model = MdnModel::load(&cfg.out_dir.join(MODEL_FILE)).unwrap();
    let ds = LabeledDataset::load_csv(&data).unwrap();
    let val = ds.xy(Split::Val);
    let recomputed = model.mean_nll(val.x.view(), val.y.view()).unwrap();
    assert!((recomputed - log[summary.best_epoch - 1].val_loss).abs() <= 1e-9);
    assert_eq!(RunConfig::load(&cfg.out_dir.join(CONFIG_FILE)).unwrap(), cfg);

    let mut tl = cfg.clone();
    tl.strategy = StrategyKind::Tl1;
    assert_eq!(cmd_train(&tl).unwrap_err().exit_code(), 2);
}

#[test]
fn sweep_predict_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(dir.path(), 200);
    let mut cfg = config(dir.path(), &data, "sweep");
    cfg.k_max = 3;
    cfg.max_epochs = 10;
    cfg.strategy = StrategyKind::Tl1;
    let (result, summary) = cmd_sweep(&cfg).unwrap();
    assert_eq!(result.entries.len(), 3);
    assert_eq!(summary.total_epochs, result.total_epochs());
    let csv = std::fs::read_to_string(cfg.out_dir.join(SWEEP_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("K,strategy,epochs,seconds,train_nll,val_nll,test_nll\n"));
    for k in 1..=3 {
        assert_eq!(MdnModel::load(&k_dir(&cfg.out_dir, k).join(MODEL_FILE)).unwrap().k(), k);
    }

    // Predictions: ranked, with re-simulation errors that can be recomputed.
    let pred_dir = dir.path().join("pred");
    let args = PredictArgs {
        checkpoint: k_dir(&cfg.out_dir, 3).join(MODEL_FILE),
        autoencoder: None,
        spectrum_file: data.clone(),
        row: 2,
        top: 3,
        out_dir: pred_dir.clone(),
    };
    let out = cmd_predict(&args).unwrap();
    assert_eq!(out.predictions.len(), 3);
    for w in out.predictions.windows(2) {
        assert!(w[0].pi >= w[1].pi);
    }
    let rows: Vec<String> = std::fs::read_to_string(pred_dir.join("predictions.csv")).unwrap().lines().skip(1).map(String::from).collect();
    assert_eq!(rows.len(), 3);
    for (row, p) in rows.iter().zip(&out.predictions) {
        let f: Vec<&str> = row.split(',').collect();
        let design: Vec<f64> = f[3..8].iter().map(|v| v.parse().unwrap()).collect();
        let d = mdn_inverse::dataset::DesignParams::from_array(design.try_into().unwrap());
        let again = rmse(surrogate_spectrum(&d).unwrap().as_slice(), &out.spectrum);
        let logged: f64 = f[10].parse().unwrap();
        assert!((again - logged).abs() <= 1e-12);
        assert_eq!(logged, p.rmse);
    }
    let mixture = std::fs::read_to_string(pred_dir.join("mixture.csv")).unwrap();
    assert!(mixture.starts_with("component,pi,mu_1,mu_2,mu_3,mu_4,mu_5,sigma_1,"));
    assert_eq!(mixture.lines().count(), 4);
    assert_eq!(cmd_predict(&PredictArgs { top: 4, ..args.clone() }).unwrap_err().exit_code(), 2);

    // Report: marginals integrate to one and markers are the true design.
    let report = cmd_report(&ReportArgs { run_dir: cfg.out_dir.clone(), record: 1 }).unwrap();
    let ds = LabeledDataset::load_csv(&data).unwrap();
    let truth = ds.partition(Split::Test).nth(1).unwrap().design.to_array();
    assert_eq!(report.markers, truth);
    let markers = std::fs::read_to_string(cfg.out_dir.join("markers.csv")).unwrap();
    for (line, t) in markers.lines().skip(1).zip(truth) {
        assert_eq!(line.split(',').nth(1).unwrap().parse::<f64>().unwrap(), t);
    }
    for (c, name) in ["p", "w", "h1", "h2", "h3"].iter().enumerate() {
        let text = std::fs::read_to_string(cfg.out_dir.join(format!("marginal_{name}.csv"))).unwrap();
        let pts: Vec<(f64, f64)> = text
            .lines()
            .skip(1)
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.parse().unwrap(), b.parse().unwrap())
            })
            .collect();
        let integral: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
        assert!((integral - 1.0).abs() <= 1e-3, "{name}: {integral}");
        assert!((report.marginal_integrals[c] - integral).abs() <= 1e-9);
        let svg = std::fs::read_to_string(cfg.out_dir.join(format!("marginal_{name}.svg"))).unwrap();
        assert!(svg.contains("<polyline") && svg.contains(">true<"));
        assert!(BOUNDS[c].0 <= truth[c] && truth[c] <= BOUNDS[c].1);
    }

    // Regenerating the report gives identical bytes.
    let before: Vec<Vec<u8>> = report.files.iter().map(|f| std::fs::read(f).unwrap()).collect();
    let again = cmd_report(&ReportArgs { run_dir: cfg.out_dir.clone(), record: 1 }).unwrap();
    assert_eq!(again.files, report.files);
    for (f, b) in again.files.iter().zip(before) {
        assert_eq!(std::fs::read(f).unwrap(), b, "{}", f.display());
    }
}

#[test]
fn k_max_one_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(dir.path(), 60);
    let mut cfg = config(dir.path(), &data, "one");
    cfg.k_max = 1;
    cfg.max_epochs = 3;
    let (r, _) = cmd_sweep(&cfg).unwrap();
    assert_eq!(r.entries.len(), 1);
    assert_eq!(std::fs::read_to_string(cfg.out_dir.join(SWEEP_FILE)).unwrap().lines().count(), 2);
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mdn-inverse"))
}

#[test]
fn binary_exit_codes_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["gen-data", "--samples", "20", "--out"]).arg(dir.path().join("d.csv")).status().unwrap();
    assert!(status.success());

    let env_dir = dir.path().join("elsewhere");
    let status = bin()
        .args(["gen-data", "--samples", "20", "--out", "ignored/d.csv"])
        .env(OUT_DIR_ENV, &env_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(env_dir.join("d.csv").exists());

    // Unknown flag: argument error.
    assert_eq!(bin().args(["sweep", "--bogus"]).output().unwrap().status.code(), Some(2));
    // Missing dataset: I/O error.
    let out = bin()
        .args(["train", "--dataset"])
        .arg(dir.path().join("missing.csv"))
        .arg("--out")
        .arg(dir.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    // Growth strategies are not single-model training: argument error.
    let out = bin().args(["train", "--strategy", "tl2", "--dataset"]).arg(dir.path().join("d.csv")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
