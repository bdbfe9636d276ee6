//! Command implementations behind the `mdn-inverse` binary. Each command is a
//! plain function so it can be driven from examples and tests as well.

mod predict;
mod report;
mod run;
pub mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::train::EpochLog;

pub use predict::{cmd_predict, read_spectrum, PredictArgs, PredictOutput};
pub use report::{cmd_report, ReportArgs, ReportOutput, MARGINAL_POINTS_PER_COMPONENT};
pub use run::{
    cmd_gen_data, cmd_sweep, cmd_train, AeSummary, GenDataArgs, SweepSummary, TrainSummary, AE_FILE,
    AE_LOG_FILE, MODEL_FILE, SUMMARY_FILE, SWEEP_FILE, TRAIN_LOG_FILE,
};

pub const TRAIN_LOG_HEADER: &str = "epoch,train_nll,val_nll";

/// Directory holding the `K`-component model of a sweep.
pub fn k_dir(run_dir: &Path, k: usize) -> PathBuf {
    run_dir.join(format!("k{k:02}"))
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn format_log(header: &str, log: &[EpochLog]) -> String {
    let mut s = format!("{header}\n");
    for l in log {
        s.push_str(&format!("{},{:.16e},{:.16e}\n", l.epoch, l.train_loss, l.val_loss));
    }
    s
}

/// Parses a three-column epoch log written by [`format_log`].
pub fn parse_log(path: &Path) -> Result<Vec<EpochLog>> {
    let text = read_file(path)?;
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line: line as u64, msg };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(parse_err(i + 1, format!("expected 3 fields, found {}", f.len())));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| parse_err(i + 1, e.to_string()));
        out.push(EpochLog {
            epoch: f[0].trim().parse().map_err(|e: std::num::ParseIntError| parse_err(i + 1, e.to_string()))?,
            train_loss: num(f[1])?,
            val_loss: num(f[2])?,
        });
    }
    Ok(out)
}
