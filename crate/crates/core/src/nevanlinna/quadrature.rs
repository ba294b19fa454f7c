use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{NevError, MIN_QUADRATURE};
use crate::funcalg::{Eval, Expr, Wide};
use crate::projgeom::{Hyperplane, ProjectiveMap};

/// Trapezoidal circle average plus the number of nodes that had to be moved
/// off a singularity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircleAverage {
    pub value: f64,
    pub nudges: usize,
}

const MAX_NUDGES_PER_NODE: usize = 3;

/// Average of `g` over `K` equispaced points of `|z| = r`.
///
/// `g` returns `None` (or a non-finite value) at singular points; such nodes
/// are rotated by `2π/(7K)` and retried.
pub fn circle_average<G>(g: G, r: f64, k: usize) -> Result<CircleAverage, NevError>
where
    G: Fn(Complex64) -> Option<f64>,
{
    if !(r > 0.0) {
        return Err(NevError::BadRadius(r));
    }
    if k < MIN_QUADRATURE {
        return Err(NevError::TooFewPoints(k));
    }
    let h = TAU / k as f64;
    let nudge = h / 7.0;
    let mut sum = 0.0;
    let mut nudges = 0;
    for i in 0..k {
        let mut theta = h * i as f64;
        let mut value = None;
        for attempt in 0..=MAX_NUDGES_PER_NODE {
            if let Some(v) = g(Complex64::from_polar(r, theta)).filter(|v| v.is_finite()) {
                value = Some(v);
                break;
            }
            if attempt == 0 {
                nudges += 1;
            }
            theta += nudge;
        }
        match value {
            Some(v) => sum += v,
            None => {
                return Err(NevError::QuadratureUnreliable {
                    r,
                    nudges: nudges.max(k / 8 + 1),
                    k,
                })
            }
        }
    }
    if nudges > k / 8 {
        return Err(NevError::QuadratureUnreliable { r, nudges, k });
    }
    Ok(CircleAverage {
        value: sum / k as f64,
        nudges,
    })
}

pub fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

pub(crate) fn wide_at(e: &Expr, z: Complex64) -> Option<Wide> {
    match e.eval_wide(z) {
        Eval::Value(w) if !w.ln_abs().is_nan() => Some(w),
        _ => None,
    }
}

fn component_values(f: &ProjectiveMap, z: Complex64) -> Option<Vec<Wide>> {
    f.components().iter().map(|e| wide_at(e, z)).collect()
}

/// `ln max_j |v_j|`; `-inf` when every value vanishes.
pub fn ln_max_abs(values: &[Wide]) -> f64 {
    values.iter().map(|w| w.ln_abs()).fold(f64::NEG_INFINITY, f64::max)
}

/// `ln (Σ |v_j|²)^{1/2}` without leaving log space.
pub fn ln_norm(values: &[Wide]) -> f64 {
    let m = ln_max_abs(values);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = values.iter().map(|w| (2.0 * (w.ln_abs() - m)).exp()).sum();
    m + 0.5 * s.ln()
}

/// Circle average of `log max_j |f_j|` at radius `r`, without baseline.
pub fn tchar_raw(f: &ProjectiveMap, r: f64, k: usize) -> Result<f64, NevError> {
    let g = |z: Complex64| component_values(f, z).map(|v| ln_max_abs(&v));
    Ok(circle_average(g, r, k)?.value)
}

/// Cartan characteristic normalised so that `T_f(1) = 0`.
pub fn tchar(f: &ProjectiveMap, r: f64, k: usize) -> Result<f64, NevError> {
    Ok(tchar_raw(f, r, k)? - tchar_raw(f, 1.0, k)?)
}

/// Circle average of `log⁺(‖f‖‖H‖/|(f,H)|)` at radius `r`, without baseline.
pub fn proximity_raw(f: &ProjectiveMap, h: &Hyperplane, r: f64, k: usize) -> Result<f64, NevError> {
    let pairing = f.intersect(h)?;
    if pairing.is_identically_zero()? {
        return Err(NevError::IdenticallyZero);
    }
    let ln_h = h.norm().ln();
    let g = |z: Complex64| {
        let vals = component_values(f, z)?;
        let dot: Wide = vals
            .iter()
            .zip(h.coeffs())
            .map(|(v, a)| *v * Wide::from_complex(*a))
            .sum();
        if dot.is_zero() {
            return None;
        }
        // the quotient is >= 1 by Cauchy-Schwarz, so log⁺ is only a guard
        Some((ln_norm(&vals) + ln_h - dot.ln_abs()).max(0.0))
    };
    Ok(circle_average(g, r, k)?.value)
}

/// Proximity function `m_{f,H}(r)` with the unit-circle baseline subtracted.
pub fn proximity(f: &ProjectiveMap, h: &Hyperplane, r: f64, k: usize) -> Result<f64, NevError> {
    Ok(proximity_raw(f, h, r, k)? - proximity_raw(f, h, 1.0, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::parse_expr;
    use std::f64::consts::PI;

    fn map(src: &[&str]) -> ProjectiveMap {
        ProjectiveMap::new(
            src.iter().map(|s| parse_expr(s).unwrap()).collect(),
            Complex64::new(1.0, 0.0),
        )
        .unwrap()
    }

    /// avg over θ of max(0, a cos θ + b) for a > 0, in closed form.
    fn avg_pos_cos(a: f64, b: f64) -> f64 {
        if b >= a {
            return b;
        }
        if b <= -a {
            return 0.0;
        }
        let t0 = (-b / a).acos();
        (a * t0.sin() + b * t0) / PI
    }

    #[test]
    fn averages_of_harmonic_functions() {
        let r = 3.7;
        let a = circle_average(|z| Some(z.norm().ln()), r, 64).unwrap();
        assert!((a.value - r.ln()).abs() < 1e-14);
        let b = circle_average(|z| Some(z.re), r, 64).unwrap();
        assert!(b.value.abs() < 1e-12);
        let c = circle_average(|z| Some(z.re.max(0.0)), 10.0, 512).unwrap();
        assert!((c.value - 10.0 / PI).abs() < 0.005 * 10.0 / PI);
    }

    #[test]
    fn singular_nodes_are_nudged() {
        // 1/(z-2) has a pole on the node θ = 0 of the circle |z| = 2
        let e = parse_expr("1/(z-2)").unwrap();
        let avg = circle_average(|z| wide_at(&e, z).map(|w| w.ln_abs()), 2.0, 64).unwrap();
        assert_eq!(avg.nudges, 1);
        // Jensen: avg log|1/(z-2)| on |z| = 2 is -log 2
        assert!((avg.value + 2f64.ln()).abs() < 0.05);
        let bad = circle_average(|_| None, 2.0, 64);
        assert!(matches!(bad, Err(NevError::QuadratureUnreliable { .. })));
        assert!(circle_average(|_| Some(0.0), 2.0, 16).is_err());
    }

    #[test]
    fn characteristic_examples() {
        let lin = map(&["1", "z"]);
        for r in [2.0, 10.0, 40.0] {
            assert!((tchar(&lin, r, 1024).unwrap() - r.ln()).abs() < 1e-6);
        }
        let ex = map(&["1", "exp(z)"]);
        for r in [5.0, 20.0, 50.0] {
            let want = avg_pos_cos(r, 0.0) - avg_pos_cos(1.0, 0.0);
            assert!((tchar(&ex, r, 1024).unwrap() - want).abs() < 0.01 * want);
            assert!((want - (r - 1.0) / PI).abs() < 1e-12);
        }
        let constant = map(&["1", "2"]);
        assert!(tchar(&constant, 7.0, 256).unwrap().abs() < 1e-14);
    }

    #[test]
    fn proximity_examples() {
        let ex = map(&["1", "exp(z)"]);
        let h0 = Hyperplane::real(&[1.0, 0.0], "w0").unwrap();
        // log⁺(‖f‖/1) = ½ log(1 + |e^z|²), dominated by max(0, Re z)
        let m20 = proximity(&ex, &h0, 20.0, 1024).unwrap();
        let want = 20.0 / PI - 1.0 / PI;
        assert!((m20 - want).abs() < 0.01 * want + 0.1);

        let lin = map(&["1", "z"]);
        let h1 = Hyperplane::real(&[0.0, 1.0], "w1").unwrap();
        // ½ log(1 + 1/r²) minus its value ½ log 2 at r = 1
        for r in [10.0, 100.0, 1000.0] {
            let m = proximity(&lin, &h1, r, 512).unwrap();
            let want = 0.5 * (1.0 + 1.0 / (r * r)).ln() - 0.5 * 2f64.ln();
            assert!((m - want).abs() < 1e-12);
        }

        let zero = map(&["1", "1"]);
        let h = Hyperplane::real(&[1.0, -1.0], "diag").unwrap();
        assert_eq!(proximity(&zero, &h, 2.0, 64), Err(NevError::IdenticallyZero));
    }

    #[test]
    fn raw_characteristic_is_monotone() {
        let f = map(&["sin(z)", "cos(z)"]);
        let h = Hyperplane::real(&[1.0, 1.0], "s+c").unwrap();
        let mut last_t = f64::NEG_INFINITY;
        for r in [1.5, 2.5, 4.0, 8.0] {
            let t = tchar_raw(&f, r, 512).unwrap();
            let m = proximity_raw(&f, &h, r, 512).unwrap();
            assert!(t >= last_t - 1e-6);
            assert!(m >= 0.0);
            last_t = t;
        }
    }
}
