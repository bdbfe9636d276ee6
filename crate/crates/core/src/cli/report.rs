use std::path::{Path, PathBuf};

use super::svg::{Chart, Series};
use super::{k_dir, parse_log, write_file, AE_FILE, MODEL_FILE, SWEEP_FILE, TRAIN_LOG_FILE};
use crate::autoencoder::AeModel;
use crate::config::{RunConfig, CONFIG_FILE};
use crate::dataset::{LabeledDataset, Split, BOUNDS, PARAM_NAMES};
use crate::error::{Error, Result};
use crate::mdn::{marginal_grid, trapezoid, weighted_marginal_pdf, MdnModel};
use crate::train::EpochLog;

/// Grid resolution per mixture component for the marginal curves.
pub const MARGINAL_POINTS_PER_COMPONENT: usize = 801;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportArgs {
    pub run_dir: PathBuf,
    /// Zero-based index into the test partition whose marginals are drawn.
    pub record: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOutput {
    pub files: Vec<PathBuf>,
    /// Components of the model used for the marginals.
    pub k: usize,
    /// True design of the chosen test record, physical units.
    pub markers: [f64; 5],
    /// Trapezoid integral of each written marginal curve.
    pub marginal_integrals: [f64; 5],
}

struct SweepRow {
    k: usize,
    train: f64,
    val: f64,
    test: f64,
}

fn read_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("missing column {name}"),
        })
    };
    let (ck, ctr, cva, cte) = (col("K")?, col("train_nll")?, col("val_nll")?, col("test_nll")?);
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let err = |msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let f = |c: usize| rec.get(c).unwrap_or("").parse::<f64>().map_err(|e| err(e.to_string()));
        rows.push(SweepRow {
            k: rec.get(ck).unwrap_or("").parse().map_err(|e: std::num::ParseIntError| err(e.to_string()))?,
            train: f(ctr)?,
            val: f(cva)?,
            test: f(cte)?,
        });
    }
    Ok(rows)
}

fn loss_chart(logs: &[(usize, Vec<EpochLog>)]) -> Chart {
    let mut c = Chart::new("Training (solid) and validation (dashed) loss", "epoch", "NLL");
    for (i, (k, log)) in logs.iter().enumerate() {
        let pts = |f: fn(&EpochLog) -> f64| log.iter().map(|l| (l.epoch as f64, f(l))).collect();
        c.series.push(Series::line(format!("K={k} train"), pts(|l| l.train_loss), i));
        c.series.push(Series::line(format!("K={k} val"), pts(|l| l.val_loss), i).dashed());
    }
    c
}

/// Writes loss curves, test loss against K and the weighted marginal pdf of
/// every design parameter for one test record, with its true design marked.
pub fn cmd_report(args: &ReportArgs) -> Result<ReportOutput> {
    let dir = &args.run_dir;
    let cfg = RunConfig::load(&dir.join(CONFIG_FILE))?;
    let mut files = Vec::new();
    let mut emit = |name: String, contents: String| -> Result<()> {
        let p = dir.join(name);
        write_file(&p, &contents)?;
        files.push(p);
        Ok(())
    };

    let sweep_path = dir.join(SWEEP_FILE);
    let (logs, model_path) = if sweep_path.exists() {
        let rows = read_sweep(&sweep_path)?;
        let last = rows.last().ok_or_else(|| Error::Argument(format!("{} has no rows", sweep_path.display())))?;
        let model_path = k_dir(dir, last.k).join(MODEL_FILE);
        let logs = rows
            .iter()
            .map(|r| Ok((r.k, parse_log(&k_dir(dir, r.k).join(TRAIN_LOG_FILE))?)))
            .collect::<Result<Vec<_>>>()?;

        let mut csv = String::from("K,train_nll,val_nll,test_nll\n");
        for r in &rows {
            csv += &format!("{},{:.16e},{:.16e},{:.16e}\n", r.k, r.train, r.val, r.test);
        }
        emit("test_loss_vs_k.csv".into(), csv)?;
        let mut c = Chart::new("Final loss against number of components", "K", "NLL");
        let pts = |f: fn(&SweepRow) -> f64| rows.iter().map(|r| (r.k as f64, f(r))).collect();
        c.series.push(Series::line("train", pts(|r| r.train), 0).with_markers());
        c.series.push(Series::line("validation", pts(|r| r.val), 1).with_markers());
        c.series.push(Series::line("test", pts(|r| r.test), 3).with_markers());
        emit("test_loss_vs_k.svg".into(), c.render())?;
        (logs, model_path)
    } else {
        let model_path = dir.join(MODEL_FILE);
        let model = MdnModel::load(&model_path)?;
        (vec![(model.k(), parse_log(&dir.join(TRAIN_LOG_FILE))?)], model_path)
    };
    emit("loss_curves.svg".into(), loss_chart(&logs).render())?;

    let model = MdnModel::load(&model_path)?;
    let ae = if cfg.use_autoencoder { Some(AeModel::load(&dir.join(AE_FILE))?) } else { None };
    let ds = LabeledDataset::load_csv(&cfg.dataset)?;
    let record = ds.partition(Split::Test).nth(args.record).ok_or_else(|| {
        Error::Argument(format!("test partition has no record {}", args.record))
    })?;
    let input = match &ae {
        Some(ae) => ae.encode(record.spectrum.as_slice())?,
        None => record.spectrum.as_slice().to_vec(),
    };
    let mix = model.mixture(&input)?;
    let truth = record.design.to_array();

    let mut integrals = [0.0; 5];
    let mut markers = String::from("param,true_value\n");
    for (c, name) in PARAM_NAMES.iter().enumerate() {
        let (lo, hi) = BOUNDS[c];
        let span = hi - lo;
        let grid = marginal_grid(&mix, c, MARGINAL_POINTS_PER_COMPONENT);
        let pdf = weighted_marginal_pdf(&mix, c, &grid)?;
        // Normalized coordinates to physical units; the density scales inversely.
        let xs: Vec<f64> = grid.iter().map(|u| lo + span * u).collect();
        let ys: Vec<f64> = pdf.iter().map(|p| p / span).collect();
        integrals[c] = trapezoid(&xs, &ys);

        let mut csv = format!("{name},pdf\n");
        for (x, y) in xs.iter().zip(&ys) {
            csv += &format!("{x:.16e},{y:.16e}\n");
        }
        emit(format!("marginal_{name}.csv"), csv)?;
        let mut chart = Chart::new(
            format!("Weighted marginal pdf of {name} (K={}, test record {})", mix.k(), args.record),
            format!("{name} (nm)"),
            "density",
        );
        chart.series.push(Series::line("sum of weighted pdfs", xs.into_iter().zip(ys).collect(), 0));
        chart.vlines.push((truth[c], "true".into()));
        emit(format!("marginal_{name}.svg"), chart.render())?;
        markers += &format!("{name},{:.16e}\n", truth[c]);
    }
    emit("markers.csv".into(), markers)?;

    Ok(ReportOutput { files, k: mix.k(), markers: truth, marginal_integrals: integrals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_run_dir_is_io_error() {
        let err = cmd_report(&ReportArgs { run_dir: "/nonexistent/run".into(), record: 0 }).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
