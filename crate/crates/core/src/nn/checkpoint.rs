//! JSON checkpoint encoding.
//!
//! Floating-point values are written in scientific notation with 17
//! significant digits, which round-trips every finite `f64` exactly.
//! The layout is documented in `docs/checkpoint.schema.json`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use super::activation::Activation;
use super::layer::Dense;
use super::mlp::MlpModel;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Row-major `fan_out x fan_in`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpRecord {
    pub layer_widths: Vec<usize>,
    pub activations: Vec<Activation>,
    pub dropout_after: Vec<usize>,
    pub dropout_rate: f64,
    pub layers: Vec<LayerRecord>,
}

impl From<&Dense> for LayerRecord {
    fn from(d: &Dense) -> Self {
        Self {
            fan_in: d.fan_in(),
            fan_out: d.fan_out(),
            weight: d.weight.iter().copied().collect(),
            bias: d.bias.to_vec(),
        }
    }
}

impl TryFrom<LayerRecord> for Dense {
    type Error = Error;

    fn try_from(r: LayerRecord) -> Result<Self> {
        if r.bias.len() != r.fan_out {
            return Err(Error::Format(format!(
                "bias has {} entries, expected {}",
                r.bias.len(),
                r.fan_out
            )));
        }
        let weight = Array2::from_shape_vec((r.fan_out, r.fan_in), r.weight)
            .map_err(|e| Error::Format(format!("weight array: {e}")))?;
        Ok(Dense {
            weight,
            bias: Array1::from(r.bias),
        })
    }
}

impl From<&MlpModel> for MlpRecord {
    fn from(m: &MlpModel) -> Self {
        Self {
            layer_widths: m.widths().to_vec(),
            activations: m.activations().to_vec(),
            dropout_after: m.dropout_after().iter().copied().collect(),
            dropout_rate: m.dropout_rate(),
            layers: m.layers().iter().map(LayerRecord::from).collect(),
        }
    }
}

impl TryFrom<MlpRecord> for MlpModel {
    type Error = Error;

    fn try_from(r: MlpRecord) -> Result<Self> {
        let layers = r
            .layers
            .into_iter()
            .map(Dense::try_from)
            .collect::<Result<Vec<_>>>()?;
        let model = MlpModel::from_layers(
            layers,
            r.activations,
            r.dropout_after.into_iter().collect::<BTreeSet<_>>(),
            r.dropout_rate,
        )
        .map_err(|e| Error::Format(e.to_string()))?;
        if model.widths() != r.layer_widths.as_slice() {
            return Err(Error::Format(format!(
                "declared widths {:?} disagree with layer shapes {:?}",
                r.layer_widths,
                model.widths()
            )));
        }
        Ok(model)
    }
}

/// Wrapper that stamps a record with its kind and format version.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub format_version: u32,
    pub kind: String,
    #[serde(flatten)]
    pub body: T,
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut ser = serde_json::Serializer::with_formatter(&mut w, Sig17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn save_mlp(path: &Path, model: &MlpModel) -> Result<()> {
    write_json(
        path,
        &Envelope {
            format_version: FORMAT_VERSION,
            kind: "mlp".into(),
            body: MlpRecord::from(model),
        },
    )
}

pub fn load_mlp(path: &Path) -> Result<MlpModel> {
    let env: Envelope<MlpRecord> = read_json(path)?;
    check_envelope(&env, "mlp")?;
    env.body.try_into()
}

pub fn check_envelope<T>(env: &Envelope<T>, kind: &str) -> Result<()> {
    if env.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {}",
            env.format_version
        )));
    }
    if env.kind != kind {
        return Err(Error::Format(format!("expected a '{kind}' checkpoint, found '{}'", env.kind)));
    }
    Ok(())
}
