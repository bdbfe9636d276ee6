//! Inverse prediction: spectrum → ranked candidate designs, each re-simulated
//! through the surrogate.

use crate::autoencoder::AeModel;
use crate::dataset::{rmse, surrogate_spectrum, DesignParams, Record, Spectrum, N_WAVELENGTHS};
use crate::error::{Error, Result};
use crate::mdn::{predict_modes, MdnModel, MixtureParams};

/// One ranked candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// 1-based rank by mixing coefficient.
    pub rank: usize,
    /// 0-based component index.
    pub component: usize,
    pub pi: f64,
    /// Component mean mapped to physical units, clamped into the design bounds.
    pub design: DesignParams,
    /// Whether clamping changed the raw mean.
    pub clamped: bool,
    /// Whether the design satisfies the gap constraint.
    pub feasible: bool,
    pub resimulated: Spectrum,
    pub rmse: f64,
}

/// Runs the inverse model on `spectrum` and re-simulates the `top_m` most
/// probable component means. With an autoencoder the spectrum is encoded
/// first and the model must take latents as input.
pub fn predict_designs(
    model: &MdnModel,
    ae: Option<&AeModel>,
    spectrum: &[f64],
    top_m: usize,
) -> Result<(MixtureParams, Vec<Prediction>)> {
    if spectrum.len() != N_WAVELENGTHS {
        return Err(Error::InputShape { expected: N_WAVELENGTHS, got: spectrum.len() });
    }
    let input = match ae {
        Some(ae) => ae.encode(spectrum)?,
        None => spectrum.to_vec(),
    };
    if input.len() != model.input_width() {
        return Err(Error::InputShape { expected: model.input_width(), got: input.len() });
    }
    let mix = model.mixture(&input)?;
    let candidates = predict_modes(&mix, top_m)?;
    let mut out = Vec::with_capacity(candidates.len());
    for (i, c) in candidates.into_iter().enumerate() {
        let mut u = [0.0; 5];
        for (dst, &m) in u.iter_mut().zip(c.mean.iter()) {
            *dst = m;
        }
        let raw = DesignParams::from_normalized(u);
        let design = raw.clamped();
        let resimulated = surrogate_spectrum(&design)?;
        let err = rmse(resimulated.as_slice(), spectrum);
        out.push(Prediction {
            rank: i + 1,
            component: c.component,
            pi: c.pi,
            clamped: design != raw,
            feasible: design.satisfies_gap(),
            design,
            resimulated,
            rmse: err,
        });
    }
    Ok((mix, out))
}

/// Lowest re-simulation RMSE among the predictions.
pub fn best_rmse(predictions: &[Prediction]) -> Option<f64> {
    predictions.iter().map(|p| p.rmse).min_by(f64::total_cmp)
}

/// Baseline inverse model: the training record whose spectrum is closest to
/// the query. Returns its index in `train` and the spectrum RMSE, which is also
/// the re-simulation error of its design.
pub fn nearest_neighbor<'a, I>(train: I, spectrum: &[f64]) -> Option<(usize, f64)>
where
    I: IntoIterator<Item = &'a Record>,
{
    train
        .into_iter()
        .map(|r| rmse(r.spectrum.as_slice(), spectrum))
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdn::SPECTRUM_TRUNK_WIDTHS;
    use crate::rng::seeded;

    #[test]
    fn candidates_are_ranked_and_rmse_is_consistent() {
        let model = MdnModel::new(&SPECTRUM_TRUNK_WIDTHS, 3, 5, 0.2, &mut seeded(1)).unwrap();
        let d = DesignParams::from_array([350.0, 100.0, 200.0, 100.0, 120.0]);
        let s = surrogate_spectrum(&d).unwrap();
        let (mix, preds) = predict_designs(&model, None, s.as_slice(), 3).unwrap();
        assert_eq!(mix.k(), 3);
        assert_eq!(preds.len(), 3);
        for w in preds.windows(2) {
            assert!(w[0].pi >= w[1].pi);
        }
        for p in &preds {
            let again = surrogate_spectrum(&p.design).unwrap();
            assert!((rmse(again.as_slice(), s.as_slice()) - p.rmse).abs() <= 1e-12);
            p.design.check_bounds().unwrap();
        }
    }

    #[test]
    fn too_many_modes_is_an_error() {
        let model = MdnModel::new(&SPECTRUM_TRUNK_WIDTHS, 1, 5, 0.2, &mut seeded(1)).unwrap();
        let s = vec![0.5; N_WAVELENGTHS];
        assert!(predict_designs(&model, None, &s, 1).is_ok());
        assert!(matches!(predict_designs(&model, None, &s, 2), Err(Error::Argument(_))));
        assert!(matches!(predict_designs(&model, None, &s[..50], 1), Err(Error::InputShape { .. })));
    }
}
