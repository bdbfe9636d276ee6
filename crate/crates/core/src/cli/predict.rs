use std::path::{Path, PathBuf};

use super::{create_dir, write_file};
use crate::autoencoder::AeModel;
use crate::dataset::{N_WAVELENGTHS, PARAM_NAMES};
use crate::error::{Error, Result};
use crate::mdn::{MdnModel, MixtureParams};
use crate::predict::{predict_designs, Prediction};

pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const RESIMULATED_FILE: &str = "resimulated.csv";
pub const MIXTURE_FILE: &str = "mixture.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct PredictArgs {
    pub checkpoint: PathBuf,
    /// Required when the checkpoint takes latent inputs.
    pub autoencoder: Option<PathBuf>,
    /// Either a dataset CSV (columns `a_000..a_100` are used) or headerless
    /// rows of 101 absorbance values.
    pub spectrum_file: PathBuf,
    /// Zero-based data row of `spectrum_file`.
    pub row: usize,
    pub top: usize,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct PredictOutput {
    pub spectrum: Vec<f64>,
    pub mixture: MixtureParams,
    pub predictions: Vec<Prediction>,
}

/// Reads one spectrum from `path`; see [`PredictArgs::spectrum_file`].
pub fn read_spectrum(path: &Path, row: usize) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let parse_err = |line: u64, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut columns: Option<Vec<usize>> = None;
    let mut data_row = 0;
    for (i, rec) in reader.records().enumerate() {
        let line = i as u64 + 1;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if i == 0 && rec.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
            let idx: Vec<usize> = (0..N_WAVELENGTHS)
                .map(|j| {
                    let name = format!("a_{j:03}");
                    rec.iter().position(|h| h == name).ok_or_else(|| parse_err(line, format!("missing column {name}")))
                })
                .collect::<Result<_>>()?;
            columns = Some(idx);
            continue;
        }
        if data_row < row {
            data_row += 1;
            continue;
        }
        let fields: Vec<&str> = match &columns {
            Some(idx) => idx.iter().map(|&j| rec.get(j).unwrap_or("")).collect(),
            None => rec.iter().collect(),
        };
        if fields.len() != N_WAVELENGTHS {
            return Err(parse_err(line, format!("expected {N_WAVELENGTHS} values, found {}", fields.len())));
        }
        return fields
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| parse_err(line, format!("{f:?}: {e}"))))
            .collect();
    }
    Err(Error::Argument(format!("{} has no data row {row}", path.display())))
}

fn format_mixture(mix: &MixtureParams) -> String {
    let n = mix.n_params();
    let mut header = vec!["component".to_string(), "pi".to_string()];
    header.extend((1..=n).map(|i| format!("mu_{i}")));
    header.extend((1..=n).map(|i| format!("sigma_{i}")));
    let mut s = header.join(",") + "\n";
    for k in 0..mix.k() {
        let mut row = vec![(k + 1).to_string(), format!("{:.16e}", mix.pi()[k])];
        row.extend(mix.mean(k).iter().map(|v| format!("{v:.16e}")));
        row.extend(mix.std_dev(k).iter().map(|v| format!("{v:.16e}")));
        s += &(row.join(",") + "\n");
    }
    s
}

fn format_predictions(preds: &[Prediction]) -> String {
    let mut s = format!("rank,component,pi,{},clamped,feasible,rmse\n", PARAM_NAMES.join(","));
    for p in preds {
        let design: Vec<String> = p.design.to_array().iter().map(|v| format!("{v:.16e}")).collect();
        s += &format!(
            "{},{},{:.16e},{},{},{},{:.16e}\n",
            p.rank,
            p.component + 1,
            p.pi,
            design.join(","),
            p.clamped,
            p.feasible,
            p.rmse
        );
    }
    s
}

fn format_resimulated(input: &[f64], preds: &[Prediction]) -> String {
    let cols: Vec<String> = (0..N_WAVELENGTHS).map(|i| format!("a_{i:03}")).collect();
    let mut s = format!("source,{}\n", cols.join(","));
    let row = |name: String, v: &[f64]| {
        let vals: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
        format!("{name},{}\n", vals.join(","))
    };
    s += &row("input".into(), input);
    for p in preds {
        s += &row(format!("rank{}", p.rank), p.resimulated.as_slice());
    }
    s
}

/// Predicts the `top` most probable designs for one spectrum and writes
/// `predictions.csv`, `resimulated.csv` and `mixture.csv`.
pub fn cmd_predict(args: &PredictArgs) -> Result<PredictOutput> {
    let model = MdnModel::load(&args.checkpoint)?;
    let ae = args.autoencoder.as_deref().map(AeModel::load).transpose()?;
    if ae.is_none() && model.input_width() != N_WAVELENGTHS {
        return Err(Error::Argument(format!(
            "checkpoint expects {} inputs; pass the autoencoder it was trained with",
            model.input_width()
        )));
    }
    let spectrum = read_spectrum(&args.spectrum_file, args.row)?;
    let (mixture, predictions) = predict_designs(&model, ae.as_ref(), &spectrum, args.top)?;
    create_dir(&args.out_dir)?;
    write_file(&args.out_dir.join(PREDICTIONS_FILE), &format_predictions(&predictions))?;
    write_file(&args.out_dir.join(RESIMULATED_FILE), &format_resimulated(&spectrum, &predictions))?;
    write_file(&args.out_dir.join(MIXTURE_FILE), &format_mixture(&mixture))?;
    Ok(PredictOutput { spectrum, mixture, predictions })
}
