//! Deterministic analytic absorbance model.
//!
//! Three Gaussian resonances whose centres, widths and amplitudes depend on
//! the normalized design. The `sin` and `frac` terms make the design-to-spectrum
//! map many-to-one.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::design::DesignParams;
use crate::error::{Error, Result};

pub const N_WAVELENGTHS: usize = 101;
pub const LAMBDA_MIN: f64 = 400.0;
pub const LAMBDA_STEP: f64 = 3.0;
pub const SURROGATE_VERSION: &str = "three-resonance-v1";

pub fn wavelength(i: usize) -> f64 {
    LAMBDA_MIN + LAMBDA_STEP * i as f64
}

pub fn wavelengths() -> Vec<f64> {
    (0..N_WAVELENGTHS).map(wavelength).collect()
}

/// Absorbance sampled at `400, 403, ..., 700` nm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != N_WAVELENGTHS {
            return Err(Error::InputShape {
                expected: N_WAVELENGTHS,
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("absorbance {bad} outside [0, 1]")));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn rmse(&self, other: &[f64]) -> f64 {
        rmse(&self.0, other)
    }
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()).max(1);
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Resonance {
    pub fn at(&self, lambda: f64) -> f64 {
        let r = (lambda - self.center) / self.width;
        self.amplitude * (-r * r).exp()
    }
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

pub fn resonances(d: &DesignParams) -> [Resonance; 3] {
    let [u1, u2, u3, u4, u5] = d.normalized();
    [
        Resonance {
            center: 430.0 + 240.0 * u1,
            width: 12.0 + 28.0 * u3,
            amplitude: 0.55 + 0.45 * u2,
        },
        Resonance {
            center: 550.0 + 90.0 * (2.0 * PI * u4).sin(),
            width: 15.0 + 25.0 * u5,
            amplitude: 0.45 + 0.5 * u5,
        },
        Resonance {
            center: 400.0 + 300.0 * frac(u2 + u3),
            width: 20.0 + 20.0 * u1,
            amplitude: 0.35 + 0.4 * u4,
        },
    ]
}

pub fn surrogate_spectrum(d: &DesignParams) -> Result<Spectrum> {
    d.check_bounds()?;
    let peaks = resonances(d);
    let values = (0..N_WAVELENGTHS)
        .map(|i| {
            let l = wavelength(i);
            peaks.iter().map(|p| p.at(l)).sum::<f64>().clamp(0.0, 1.0)
        })
        .collect();
    Ok(Spectrum(values))
}

/// Two designs, far apart in normalized space, with nearly identical spectra.
///
/// They differ only in `h2` (`u4 = 0.14` and `0.36`, symmetric about 0.25, so
/// the second resonance sits at the same centre). The third resonance, whose
/// amplitude does depend on `u4`, is placed under the second one where the
/// clamp at 1 hides most of the difference.
pub fn symmetric_witness() -> (DesignParams, DesignParams) {
    let (u1, u2, u5) = (0.0, 0.2, 1.0);
    let (lo, hi) = (0.14, 0.36);
    let center2 = 550.0 + 90.0 * (2.0 * PI * lo).sin();
    let u3 = (center2 - 400.0) / 300.0 - u2;
    (
        DesignParams::from_normalized([u1, u2, u3, lo, u5]),
        DesignParams::from_normalized([u1, u2, u3, hi, u5]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_range() {
        assert_eq!(wavelength(0), 400.0);
        assert_eq!(wavelength(100), 700.0);
        let s = surrogate_spectrum(&DesignParams::from_normalized([0.3, 0.2, 0.7, 0.1, 0.9])).unwrap();
        assert_eq!(s.as_slice().len(), 101);
        assert!(s.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn sin_symmetry_gives_same_second_center() {
        let a = DesignParams::from_normalized([0.4, 0.3, 0.5, 0.1, 0.6]);
        let b = DesignParams::from_normalized([0.4, 0.3, 0.5, 0.4, 0.6]);
        assert!((resonances(&a)[1].center - resonances(&b)[1].center).abs() < 1e-9);
    }

    #[test]
    fn isolated_first_peak_height() {
        // u1 = 0.5 puts peak 1 at 550 nm; u4 = 0.5 moves peak 2 to 550 too, so
        // pick u4 = 0.75 (peak 2 at 460 nm) and u2 + u3 = 0.05 (peak 3 at 415 nm).
        let u = [0.5, 0.0, 0.05, 0.75, 0.0];
        let d = DesignParams::from_normalized(u);
        let peaks = resonances(&d);
        let spec = surrogate_spectrum(&d).unwrap();
        let i = ((peaks[0].center - LAMBDA_MIN) / LAMBDA_STEP).round() as usize;
        assert_eq!(wavelength(i), peaks[0].center);
        let oracle = peaks[0].amplitude + peaks[1].at(wavelength(i)) + peaks[2].at(wavelength(i));
        assert!((spec.as_slice()[i] - oracle.min(1.0)).abs() < 1e-15);
        assert!((spec.as_slice()[i] - peaks[0].amplitude).abs() < 0.02);
    }

    #[test]
    fn out_of_bounds_design_is_domain_error() {
        let mut d = DesignParams::from_normalized([0.5; 5]);
        d.p = 500.0;
        assert!(matches!(surrogate_spectrum(&d), Err(Error::Domain(_))));
    }

    #[test]
    fn witness_pair_is_far_apart_but_spectrally_close() {
        let (a, b) = symmetric_witness();
        a.validate().unwrap();
        b.validate().unwrap();
        let (ua, ub) = (a.normalized(), b.normalized());
        let dist = ua.iter().zip(&ub).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(dist >= 0.2, "distance {dist}");
        let sa = surrogate_spectrum(&a).unwrap();
        let sb = surrogate_spectrum(&b).unwrap();
        let e = sa.rmse(sb.as_slice());
        assert!(e <= 0.01, "rmse {e}");
    }

    #[test]
    fn spectrum_length_is_checked() {
        assert!(matches!(Spectrum::new(vec![0.5; 100]), Err(Error::InputShape { .. })));
    }
}
