//! Synthetic labeled data: scrambled Sobol design sampling under the
//! fabrication constraint, analytic spectra, 80/10/10 partitioning and CSV
//! persistence.

mod design;
mod sobol;
mod surrogate;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use design::{scale_and_filter, DesignParams, BOUNDS, MIN_GAP, PARAM_NAMES};
pub use sobol::{max_dimensions, sobol_scrambled, Sobol};
pub use surrogate::{
    resonances, rmse, surrogate_spectrum, symmetric_witness, wavelength, wavelengths, Resonance,
    Spectrum, LAMBDA_MIN, LAMBDA_STEP, N_WAVELENGTHS, SURROGATE_VERSION,
};

use crate::error::{Error, Result};
use crate::nn::checkpoint::write_json;
use crate::rng::{stream_rng, Stream};

/// Number of labeled samples in the full-size dataset.
pub const DEFAULT_SAMPLES: usize = 3848;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "val" => Some(Split::Val),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// `(floor(0.8 n), floor(0.1 n), remainder)`.
pub fn split_counts(n: usize) -> SplitCounts {
    let train = n * 8 / 10;
    let val = n / 10;
    SplitCounts {
        train,
        val,
        test: n - train - val,
    }
}

/// Seeded uniform assignment of `n` records to train/val/test.
pub fn assign_splits(n: usize, seed: u64) -> Result<Vec<Split>> {
    if n < 10 {
        return Err(Error::Argument(format!("need at least 10 records to split, got {n}")));
    }
    let c = split_counts(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, Stream::Split));
    let mut tags = vec![Split::Test; n];
    for (rank, &i) in order.iter().enumerate() {
        tags[i] = if rank < c.train {
            Split::Train
        } else if rank < c.train + c.val {
            Split::Val
        } else {
            Split::Test
        };
    }
    Ok(tags)
}

/// Draws scrambled Sobol points until `n` designs satisfy the constraint.
/// Returns the designs and the number of points consumed.
pub fn sample_designs(n: usize, seed: u64) -> Result<(Vec<DesignParams>, usize)> {
    let sobol = Sobol::new(5, Some(crate::rng::derive_seed(seed, Stream::Scramble)))?;
    let mut designs = Vec::with_capacity(n);
    let mut index: u32 = 0;
    while designs.len() < n {
        let p = sobol.point(index);
        index = index
            .checked_add(1)
            .ok_or_else(|| Error::Argument("Sobol sequence exhausted".into()))?;
        designs.extend(scale_and_filter([[p[0], p[1], p[2], p[3], p[4]]]));
    }
    Ok((designs, index as usize))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub design: DesignParams,
    pub spectrum: Spectrum,
    pub split: Split,
}

/// Sidecar metadata written next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub seed: u64,
    pub samples: usize,
    pub sobol_points_consumed: usize,
    pub surrogate_version: String,
    pub split_counts: SplitCounts,
    pub columns: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    records: Vec<Record>,
}

/// Inputs and normalized targets of one partition, one sample per row.
#[derive(Debug, Clone)]
pub struct Xy {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
}

impl Xy {
    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.nrows() == 0
    }
}

impl LabeledDataset {
    pub fn from_records(records: Vec<Record>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            r.design
                .validate()
                .map_err(|e| Error::Domain(format!("record {i}: {e}")))?;
        }
        Ok(Self { records })
    }

    pub fn generate(n: usize, seed: u64) -> Result<(Self, DatasetMetadata)> {
        if n == 0 {
            return Err(Error::Argument("sample count must be positive".into()));
        }
        let (designs, consumed) = sample_designs(n, seed)?;
        let splits = assign_splits(n, seed)?;
        let records = designs
            .into_iter()
            .zip(splits)
            .map(|(design, split)| {
                Ok(Record {
                    spectrum: surrogate_spectrum(&design)?,
                    design,
                    split,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let ds = Self::from_records(records)?;
        let meta = DatasetMetadata {
            seed,
            samples: n,
            sobol_points_consumed: consumed,
            surrogate_version: SURROGATE_VERSION.into(),
            split_counts: ds.counts(),
            columns: header().join(","),
        };
        Ok((ds, meta))
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn counts(&self) -> SplitCounts {
        let count = |s| self.records.iter().filter(|r| r.split == s).count();
        SplitCounts {
            train: count(Split::Train),
            val: count(Split::Val),
            test: count(Split::Test),
        }
    }

    pub fn partition(&self, split: Split) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.split == split)
    }

    /// Spectra as rows and bound-normalized designs as targets.
    pub fn xy(&self, split: Split) -> Xy {
        let rows: Vec<&Record> = self.partition(split).collect();
        let mut x = Array2::zeros((rows.len(), N_WAVELENGTHS));
        let mut y = Array2::zeros((rows.len(), 5));
        for (i, r) in rows.iter().enumerate() {
            x.row_mut(i)
                .iter_mut()
                .zip(r.spectrum.as_slice())
                .for_each(|(d, s)| *d = *s);
            y.row_mut(i)
                .iter_mut()
                .zip(r.design.normalized())
                .for_each(|(d, s)| *d = s);
        }
        Xy { x, y }
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{}", header().join(",")).map_err(io)?;
        for r in &self.records {
            let mut line = String::with_capacity(2200);
            for v in r.design.to_array() {
                line.push_str(&format!("{v:.16e},"));
            }
            line.push_str(r.split.as_str());
            for v in r.spectrum.as_slice() {
                line.push_str(&format!(",{v:.16e}"));
            }
            writeln!(w, "{line}").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let parse_err = |line: u64, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                other => parse_err(1, format!("{other:?}")),
            })?;
        let expected = header();
        let found = reader
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        if found.len() != expected.len() {
            return Err(parse_err(
                1,
                format!(
                    "expected {} columns (5 design, split, {N_WAVELENGTHS} spectrum), found {}",
                    expected.len(),
                    found.len()
                ),
            ));
        }
        if let Some((i, (f, e))) = found.iter().zip(&expected).enumerate().find(|(_, (f, e))| f != e) {
            return Err(parse_err(1, format!("column {i} is '{f}', expected '{e}'")));
        }

        let mut records = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = row.position().map_or(0, |p| p.line());
            if row.len() != expected.len() {
                return Err(parse_err(
                    line,
                    format!("expected {} fields, found {}", expected.len(), row.len()),
                ));
            }
            let num = |i: usize| -> Result<f64> {
                row[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(line, format!("column {} is not a number: '{}'", expected[i], &row[i])))
            };
            let mut d = [0.0; 5];
            for (i, v) in d.iter_mut().enumerate() {
                *v = num(i)?;
            }
            let design = DesignParams::from_array(d);
            design.validate().map_err(|e| parse_err(line, e.to_string()))?;
            let split = Split::parse(row[5].trim())
                .ok_or_else(|| parse_err(line, format!("unknown split '{}'", &row[5])))?;
            let spectrum = (6..expected.len()).map(num).collect::<Result<Vec<_>>>()?;
            let spectrum = Spectrum::new(spectrum).map_err(|e| parse_err(line, e.to_string()))?;
            records.push(Record { design, spectrum, split });
        }
        Ok(Self { records })
    }
}

pub fn header() -> Vec<String> {
    PARAM_NAMES
        .iter()
        .map(|s| s.to_string())
        .chain(std::iter::once("split".to_string()))
        .chain((0..N_WAVELENGTHS).map(|i| format!("a_{i:03}")))
        .collect()
}

/// `dataset.csv` -> `dataset.meta.json`.
pub fn metadata_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn save_metadata(csv_path: &Path, meta: &DatasetMetadata) -> Result<()> {
    write_json(&metadata_path(csv_path), meta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_count_rule() {
        assert_eq!(split_counts(10), SplitCounts { train: 8, val: 1, test: 1 });
        assert_eq!(split_counts(3848), SplitCounts { train: 3078, val: 384, test: 386 });
    }

    #[test]
    fn split_is_seeded() {
        let a = assign_splits(200, 5).unwrap();
        assert_eq!(a, assign_splits(200, 5).unwrap());
        assert_ne!(a, assign_splits(200, 6).unwrap());
        assert_eq!(a.iter().filter(|&&s| s == Split::Train).count(), 160);
        assert!(assign_splits(9, 0).is_err());
    }

    #[test]
    fn generated_records_satisfy_constraints() {
        let (ds, meta) = LabeledDataset::generate(300, 11).unwrap();
        assert_eq!(ds.len(), 300);
        assert!(meta.sobol_points_consumed > 300);
        assert!(ds.records().iter().all(|r| r.design.validate().is_ok()));
        assert_eq!(ds.counts(), split_counts(300));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let (ds, _) = LabeledDataset::generate(100, 4).unwrap();
        ds.save_csv(&path).unwrap();
        assert_eq!(LabeledDataset::load_csv(&path).unwrap(), ds);
    }

    #[test]
    fn short_spectrum_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.csv");
        let mut h = header();
        h.pop();
        let mut text = h.join(",") + "\n";
        text += &format!("350,60,200,100,100,train{}\n", ",0.5".repeat(100));
        std::fs::write(&path, text).unwrap();
        match LabeledDataset::load_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn constraint_is_revalidated_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let mut text = header().join(",") + "\n";
        text += &format!("350,60,200,100,100,train{}\n", ",0.5".repeat(101));
        text += &format!("310,150,200,100,100,val{}\n", ",0.5".repeat(101));
        std::fs::write(&path, text).unwrap();
        match LabeledDataset::load_csv(&path) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("gap"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn normalized_targets_are_in_unit_interval() {
        let (ds, _) = LabeledDataset::generate(50, 1).unwrap();
        let xy = ds.xy(Split::Train);
        assert_eq!(xy.x.ncols(), 101);
        assert_eq!(xy.len(), 40);
        assert!(xy.y.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
