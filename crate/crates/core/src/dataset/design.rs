use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter names in storage order.
pub const PARAM_NAMES: [&str; 5] = ["p", "w", "h1", "h2", "h3"];

/// Inclusive intervals in nm, same order as [`PARAM_NAMES`].
pub const BOUNDS: [(f64, f64); 5] = [
    (305.0, 415.0),
    (45.0, 190.0),
    (150.0, 295.0),
    (25.0, 200.0),
    (80.0, 165.0),
];

/// Fabrication constraint: `p - w >= MIN_GAP` (nm).
pub const MIN_GAP: f64 = 200.0;

/// Unit-cell geometry in nanometres: period, width and three thicknesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    pub p: f64,
    pub w: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl DesignParams {
    pub fn from_array(v: [f64; 5]) -> Self {
        Self {
            p: v[0],
            w: v[1],
            h1: v[2],
            h2: v[3],
            h3: v[4],
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.p, self.w, self.h1, self.h2, self.h3]
    }

    /// Affine map from the unit cube onto the parameter intervals.
    pub fn from_normalized(u: [f64; 5]) -> Self {
        let mut v = [0.0; 5];
        for (i, (lo, hi)) in BOUNDS.iter().enumerate() {
            v[i] = lo + u[i] * (hi - lo);
        }
        Self::from_array(v)
    }

    pub fn normalized(&self) -> [f64; 5] {
        let mut u = [0.0; 5];
        for (i, (&x, (lo, hi))) in self.to_array().iter().zip(BOUNDS).enumerate() {
            u[i] = (x - lo) / (hi - lo);
        }
        u
    }

    pub fn gap(&self) -> f64 {
        self.p - self.w
    }

    pub fn satisfies_gap(&self) -> bool {
        self.gap() >= MIN_GAP
    }

    pub fn check_bounds(&self) -> Result<()> {
        for ((&x, (lo, hi)), name) in self.to_array().iter().zip(BOUNDS).zip(PARAM_NAMES) {
            if !(lo..=hi).contains(&x) {
                return Err(Error::Domain(format!("{name} = {x} outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    /// Bounds plus the `p - w` fabrication constraint.
    pub fn validate(&self) -> Result<()> {
        self.check_bounds()?;
        if !self.satisfies_gap() {
            return Err(Error::Domain(format!(
                "p - w = {} violates the minimum gap of {MIN_GAP} nm",
                self.gap()
            )));
        }
        Ok(())
    }

    /// Clips every field into its interval.
    pub fn clamped(&self) -> Self {
        let mut v = self.to_array();
        for (x, (lo, hi)) in v.iter_mut().zip(BOUNDS) {
            *x = x.clamp(lo, hi);
        }
        Self::from_array(v)
    }
}

/// Scales unit-cube points onto the design intervals and keeps those that
/// satisfy the fabrication constraint, in order.
pub fn scale_and_filter<I>(points: I) -> Vec<DesignParams>
where
    I: IntoIterator<Item = [f64; 5]>,
{
    points
        .into_iter()
        .map(DesignParams::from_normalized)
        .filter(DesignParams::satisfies_gap)
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn interval_endpoints() {
        let d = DesignParams::from_normalized([0.0; 5]);
        assert_eq!(d.to_array(), [305.0, 45.0, 150.0, 25.0, 80.0]);
        assert_eq!(d.gap(), 260.0);
        assert_eq!(scale_and_filter([[0.0; 5]]).len(), 1);
    }

    #[test]
    fn narrow_gap_is_rejected() {
        let d = DesignParams::from_normalized([0.0, 1.0, 0.5, 0.5, 0.5]);
        assert_eq!((d.p, d.w), (305.0, 190.0));
        assert_eq!(d.gap(), 115.0);
        assert!(scale_and_filter([[0.0, 1.0, 0.5, 0.5, 0.5]]).is_empty());
        assert!(d.validate().is_err());

        let e = DesignParams::from_normalized([1.0, 1.0, 0.5, 0.5, 0.5]);
        assert_eq!(e.gap(), 225.0);
        assert!(e.validate().is_ok());
    }

    #[test]
    fn out_of_bounds_is_domain_error() {
        let mut d = DesignParams::from_normalized([0.5; 5]);
        d.h2 = 201.0;
        assert!(matches!(d.check_bounds(), Err(Error::Domain(_))));
        assert_eq!(d.clamped().h2, 200.0);
    }

    proptest! {
        #[test]
        fn normalization_round_trip(u in proptest::array::uniform5(0.0f64..=1.0)) {
            let d = DesignParams::from_normalized(u);
            let back = DesignParams::from_normalized(d.normalized());
            for (a, b) in d.to_array().iter().zip(back.to_array()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
