//! The difference analogue of the logarithmic derivative lemma, with its
//! explicit constant.

use num_complex::Complex64;

use super::quadrature::{circle_average, log_plus, wide_at};
use super::NevError;
use crate::funcalg::{Eval, Expr};

/// `K(α, δ, c) = 4|c|^δ (4α + αδ + δ) / (δ (1-δ) (α-1))`.
pub fn logdiff_constant(alpha: f64, delta: f64, c_abs: f64) -> f64 {
    4.0 * c_abs.powf(delta) * (4.0 * alpha + alpha * delta + delta) / (delta * (1.0 - delta) * (alpha - 1.0))
}

/// Nevanlinna characteristic `T(r, g) = m(r, g)` of an entire function,
/// i.e. the circle average of `log⁺|g|`.
pub fn nevanlinna_char_entire(g: &Expr, r: f64, k: usize) -> Result<f64, NevError> {
    if g.may_have_poles() {
        return Err(NevError::HasPoles);
    }
    let avg = circle_average(|z| wide_at(g, z).map(|w| w.ln_abs().max(0.0)), r, k)?;
    Ok(avg.value)
}

fn regular_nonzero(g: &Expr, z: Complex64) -> Result<Complex64, &'static str> {
    match g.eval_wide(z) {
        Eval::Value(w) if w.is_zero() => Err("a zero"),
        Eval::Value(w) => Ok(w.to_complex().unwrap_or(Complex64::new(f64::INFINITY, 0.0))),
        Eval::Pole => Err("a pole"),
        Eval::Indeterminate { .. } => Err("indeterminate"),
    }
}

/// `m(r, g(z+c)/g(z))` by trapezoidal quadrature.
///
/// Requires `g(0) ≠ 0, ∞`; see [`recenter`].
pub fn logdiff_proximity(g: &Expr, c: Complex64, r: f64, k: usize) -> Result<f64, NevError> {
    if g.is_identically_zero()? {
        return Err(NevError::IdenticallyZero);
    }
    regular_nonzero(g, Complex64::new(0.0, 0.0)).map_err(NevError::Normalization)?;
    let avg = circle_average(
        |z| {
            let a = wide_at(g, z + c)?;
            let b = wide_at(g, z)?;
            if a.is_zero() || b.is_zero() {
                return None;
            }
            Some((a.ln_abs() - b.ln_abs()).max(0.0))
        },
        r,
        k,
    )?;
    Ok(avg.value)
}

/// `K(α,δ,c)/r^δ · (T(α(r+|c|)) + log⁺(1/|g(0)|))` for a supplied characteristic.
pub fn logdiff_bound<T: Fn(f64) -> f64>(t_of: T, g0_abs: f64, c: Complex64, r: f64, alpha: f64, delta: f64) -> f64 {
    let k = logdiff_constant(alpha, delta, c.norm());
    k / r.powf(delta) * (t_of(alpha * (r + c.norm())) + log_plus(1.0 / g0_abs))
}

/// Moves the origin to the regular point of smallest modulus on a search
/// spiral when `g(0)` is a zero or pole. Returns the shifted function and the
/// offset `z₀` with `g̃(w) = g(w + z₀)`.
pub fn recenter(g: &Expr) -> Result<(Expr, Complex64), NevError> {
    if regular_nonzero(g, Complex64::new(0.0, 0.0)).is_ok() {
        return Ok((g.clone(), Complex64::new(0.0, 0.0)));
    }
    for ring in 1..=40 {
        let rho = 0.05 * ring as f64;
        for j in 0..16 {
            let z0 = Complex64::from_polar(rho, std::f64::consts::TAU * (j as f64 + 0.37) / 16.0);
            if let Ok(v) = regular_nonzero(g, z0) {
                if v.norm() > 1e-6 {
                    return Ok((g.shift(z0), z0));
                }
            }
        }
    }
    Err(NevError::Normalization("singular on the whole search grid"))
}

/// One radius of a logarithmic-difference check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDiffSample {
    pub r: f64,
    pub proximity: f64,
    pub characteristic: f64,
    pub bound: f64,
}

impl LogDiffSample {
    pub fn holds(&self, tol: f64) -> bool {
        self.proximity <= self.bound + tol
    }

    /// Proximity and bound for an entire `g` at each radius, recentering first
    /// if needed. The offset actually used is returned alongside.
    pub fn sweep(
        g: &Expr,
        c: Complex64,
        radii: &[f64],
        alpha: f64,
        delta: f64,
        k: usize,
    ) -> Result<(Vec<LogDiffSample>, Complex64), NevError> {
        let (g, offset) = recenter(g)?;
        let g0 = g.eval(Complex64::new(0.0, 0.0)).value().map_or(1.0, |v| v.norm());
        let mut out = Vec::with_capacity(radii.len());
        for &r in radii {
            let proximity = logdiff_proximity(&g, c, r, k)?;
            let rho = alpha * (r + c.norm());
            let characteristic = nevanlinna_char_entire(&g, rho, k)?;
            let bound = logdiff_bound(|_| characteristic, g0, c, r, alpha, delta);
            out.push(LogDiffSample {
                r,
                proximity,
                characteristic,
                bound,
            });
        }
        Ok((out, offset))
    }
}
