//! Monte Carlo slice estimate of the characteristic of a map on ℂ^m.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::quadrature::tchar;
use super::NevError;
use crate::projgeom::ProjectiveMap;

#[derive(Clone, Debug, PartialEq)]
pub struct SliceEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub used: usize,
    /// Directions whose restricted map was degenerate.
    pub skipped: usize,
}

/// Averages the one-variable characteristic of `u ↦ f(uξ)` over `directions`
/// random unit vectors `ξ ∈ S^{2m-1}`.
///
/// `slice(ξ)` builds the restricted map; returning `Err` marks a degenerate
/// slice, which is skipped.
pub fn slice_tchar<S>(
    slice: S,
    m: usize,
    r: f64,
    directions: usize,
    k: usize,
    seed: u64,
) -> Result<SliceEstimate, NevError>
where
    S: Fn(&[Complex64]) -> Result<ProjectiveMap, NevError>,
{
    if directions < 16 {
        return Err(NevError::BadGrid(format!(
            "need at least 16 directions, got {directions}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(directions);
    let mut skipped = 0;
    for _ in 0..directions {
        let mut xi: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let norm = xi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        xi.iter_mut().for_each(|v| *v /= norm);
        match slice(&xi) {
            Ok(f) => values.push(tchar(&f, r, k)?),
            Err(_) => skipped += 1,
        }
    }
    let used = values.len();
    if used < 2 {
        return Err(NevError::BadGrid("every slice was degenerate".into()));
    }
    let mean = values.iter().sum::<f64>() / used as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (used - 1) as f64;
    Ok(SliceEstimate {
        mean,
        std_error: (var / used as f64).sqrt(),
        used,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::Expr;
    use std::f64::consts::PI;

    fn linear_slice(weights: &[Complex64]) -> impl Fn(&[Complex64]) -> Result<ProjectiveMap, NevError> + '_ {
        move |xi| {
            let a: Complex64 = weights.iter().zip(xi).map(|(w, x)| w * x).sum();
            let comp = Expr::z() * Expr::constant(a);
            Ok(ProjectiveMap::new(vec![Expr::one(), comp], Complex64::new(1.0, 0.0))?)
        }
    }

    #[test]
    fn constant_map_has_zero_characteristic() {
        let slice = |_: &[Complex64]| {
            Ok(ProjectiveMap::new(
                vec![Expr::one(), Expr::real(3.0)],
                Complex64::new(1.0, 0.0),
            )?)
        };
        let est = slice_tchar(slice, 2, 5.0, 16, 64, 1).unwrap();
        assert!(est.mean.abs() < 1e-14);
    }

    #[test]
    fn coordinate_map_matches_closed_form() {
        // |ξ₁|² is uniform on [0, 1] over S³, so the expected slice value is
        // ∫_{1/r²}^1 (log r + ½ log u) du.
        let r: f64 = 6.0;
        let a = 1.0 / (r * r);
        let prim = |u: f64| u * r.ln() + 0.5 * (u * u.ln() - u);
        let want = prim(1.0) - prim(a);
        let w = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let est = slice_tchar(linear_slice(&w), 2, r, 400, 256, 7).unwrap();
        assert!(
            (est.mean - want).abs() <= 2.0 * est.std_error + 1e-3,
            "{est:?} vs {want}"
        );
    }

    #[test]
    fn sum_map_matches_sphere_quadrature() {
        // |ξ₁ + ξ₂|² = 1 + sin 2η cos φ in Hopf coordinates, with density
        // sin 2η on [0, π/2] and φ uniform.
        let r: f64 = 4.0;
        let (ne, nf) = (400, 400);
        let mut want = 0.0;
        for i in 0..ne {
            let eta = (i as f64 + 0.5) * (PI / 2.0) / ne as f64;
            let mut inner = 0.0;
            for j in 0..nf {
                let phi = (j as f64 + 0.5) * 2.0 * PI / nf as f64;
                let s = (1.0 + (2.0 * eta).sin() * phi.cos()).max(0.0).sqrt();
                inner += (r * s).ln().max(0.0) - s.ln().max(0.0);
            }
            want += (2.0 * eta).sin() * inner / nf as f64 * (PI / 2.0) / ne as f64;
        }
        let w = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let est = slice_tchar(linear_slice(&w), 2, r, 400, 256, 9).unwrap();
        assert!(
            (est.mean - want).abs() <= 2.0 * est.std_error + 1e-3,
            "{est:?} vs {want}"
        );
    }
}
