//! Nevanlinna functionals on ℂ evaluated numerically.
//!
//! Every baseline integral over the unit circle is computed explicitly rather
//! than absorbed into an O(1), so identities such as the first main theorem
//! become checks on bounded oscillation.

mod growth;
mod logdiff;
mod quadrature;
mod slice;
mod zeros;

pub use growth::{growth_table, order_estimates, order_from_series, GrowthMeta, GrowthRow, GrowthTable, OrderEstimate};
pub use logdiff::{
    logdiff_bound, logdiff_constant, logdiff_proximity, nevanlinna_char_entire, recenter, LogDiffSample,
};
pub(crate) use quadrature::wide_at;
pub use quadrature::{
    circle_average, ln_max_abs, ln_norm, log_plus, proximity, proximity_raw, tchar, tchar_raw, CircleAverage,
};
pub use slice::{slice_tchar, SliceEstimate};
pub use zeros::{
    count_zeros, counting_from_divisor, counting_integral, jensen_check, locate_zeros, JensenReport, ZeroCount,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::funcalg::FuncError;
use crate::projgeom::GeomError;

/// Quadrature points per circle when the caller has no preference.
pub const DEFAULT_QUADRATURE: usize = 1024;
/// Smallest accepted quadrature size.
pub const MIN_QUADRATURE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NevError {
    #[error("quadrature unreliable at r = {r}: {nudges} of {k} nodes hit singularities")]
    QuadratureUnreliable { r: f64, nudges: usize, k: usize },
    #[error("invalid radius grid: {0}")]
    BadGrid(String),
    #[error("need at least {MIN_QUADRATURE} quadrature points, got {0}")]
    TooFewPoints(usize),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("function is identically zero")]
    IdenticallyZero,
    #[error("expression may have poles; count zeros and poles of numerator and denominator separately (jensen route)")]
    HasPoles,
    #[error("winding integral did not converge on |z| = {0}")]
    WindingNoConvergence(f64),
    #[error("zero localization failed: {0}")]
    Localization(String),
    #[error("g(0) is {0}; recenter the variable before applying the estimate")]
    Normalization(&'static str),
    #[error("order estimate undefined: {0}")]
    UndefinedEstimate(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// Strictly increasing radii above 1, with a per-circle quadrature size.
#[derive(Clone, Debug, PartialEq)]
pub struct RGrid {
    radii: Vec<f64>,
    quadrature_points: usize,
}

impl RGrid {
    pub fn new(radii: Vec<f64>, quadrature_points: usize) -> Result<Self, NevError> {
        if quadrature_points < MIN_QUADRATURE {
            return Err(NevError::TooFewPoints(quadrature_points));
        }
        if radii.is_empty() {
            return Err(NevError::BadGrid("no radii".into()));
        }
        if radii.iter().any(|&r| !(r > 1.0) || !r.is_finite()) {
            return Err(NevError::BadGrid("every radius must be finite and > 1".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NevError::BadGrid("radii must be strictly increasing".into()));
        }
        Ok(RGrid {
            radii,
            quadrature_points,
        })
    }

    /// `count` radii spaced geometrically from `r_min` to `r_max`.
    pub fn geometric(r_min: f64, r_max: f64, count: usize, quadrature_points: usize) -> Result<Self, NevError> {
        if count < 2 || !(r_max > r_min) {
            return Err(NevError::BadGrid("need count >= 2 and r_max > r_min".into()));
        }
        let ratio = (r_max / r_min).ln() / (count - 1) as f64;
        let mut radii: Vec<f64> = (0..count).map(|i| r_min * (ratio * i as f64).exp()).collect();
        radii[count - 1] = r_max;
        RGrid::new(radii, quadrature_points)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().expect("grid is nonempty")
    }
}

/// Zeros (or poles) with multiplicities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Divisor {
    pub points: Vec<(Complex64, usize)>,
}

impl Divisor {
    /// Total multiplicity in the closed disk `|z| <= t`.
    pub fn count_within(&self, t: f64) -> usize {
        self.points.iter().filter(|(p, _)| p.norm() <= t).map(|(_, m)| m).sum()
    }

    pub fn degree(&self) -> usize {
        self.points.iter().map(|(_, m)| m).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(RGrid::new(vec![2.0, 3.0], 64).is_ok());
        assert!(RGrid::new(vec![1.0, 3.0], 64).is_err());
        assert!(RGrid::new(vec![3.0, 2.0], 64).is_err());
        assert!(RGrid::new(vec![2.0], 32).is_err());
        let g = RGrid::geometric(2.0, 200.0, 3, 128).unwrap();
        assert!((g.radii()[1] - 20.0).abs() < 1e-12);
        assert_eq!(g.r_max(), 200.0);
    }

    #[test]
    fn divisor_counts() {
        let d = Divisor {
            points: vec![(Complex64::new(0.0, 0.0), 2), (Complex64::new(3.0, 0.0), 1)],
        };
        assert_eq!(d.count_within(1.0), 2);
        assert_eq!(d.count_within(3.0), 3);
        assert_eq!(d.degree(), 3);
    }
}
