//! Argument-principle zero counting and zero localization.

use std::f64::consts::{FRAC_PI_4, TAU};

use num_complex::Complex64;

use super::quadrature::{circle_average, wide_at};
use super::{Divisor, NevError};
use crate::funcalg::{Expr, Wide};

/// Initial samples per closed contour before adaptive refinement.
const CONTOUR_SAMPLES: usize = 256;
/// Bisection depth per sample interval.
const MAX_DEPTH: u32 = 40;
/// A contour passing closer than this (estimated by |e/e'|) to a zero is moved.
const NEAR_ZERO: f64 = 1e-6;
/// Radius perturbation when the circle passes too close to a zero.
const RADIUS_NUDGE: f64 = 1e-4;
const MAX_RADIUS_NUDGES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroCount {
    pub count: usize,
    /// The radius actually integrated over (after any perturbation).
    pub radius: f64,
    pub perturbations: usize,
}

struct Sample {
    unit: Complex64,
    /// e'/e, or `None` if it overflows.
    log_deriv: Option<Complex64>,
}

struct Tracker {
    e: Expr,
    de: Expr,
}

impl Tracker {
    fn new(e: &Expr) -> Tracker {
        Tracker {
            e: e.clone(),
            de: e.derivative(),
        }
    }

    fn sample(&self, z: Complex64) -> Option<Sample> {
        let v = wide_at(&self.e, z)?;
        if v.is_zero() || !v.ln_abs().is_finite() {
            return None;
        }
        let d = wide_at(&self.de, z)?;
        let ratio = (d / v).to_complex();
        // distance-to-zero estimate for a simple zero
        if let Some(l) = ratio {
            if l.norm() * NEAR_ZERO > 1.0 {
                return None;
            }
        }
        Some(Sample {
            unit: v.unit(),
            log_deriv: ratio,
        })
    }

    /// Total change of `arg e` along `path(s)`, `s ∈ [0, 1]`, or `None` if the
    /// path runs (nearly) through a zero.
    fn phase_change<P: Fn(f64) -> Complex64>(&self, path: &P, samples: usize) -> Option<f64> {
        let pts: Vec<(f64, Complex64, Sample)> = (0..=samples)
            .map(|i| {
                let s = i as f64 / samples as f64;
                let z = path(s);
                self.sample(z).map(|smp| (s, z, smp))
            })
            .collect::<Option<_>>()?;
        let mut total = 0.0;
        for w in pts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            total += self.segment(path, (a.0, a.1, &a.2), (b.0, b.1, &b.2), MAX_DEPTH)?;
        }
        Some(total)
    }

    fn segment<P: Fn(f64) -> Complex64>(
        &self,
        path: &P,
        a: (f64, Complex64, &Sample),
        b: (f64, Complex64, &Sample),
        depth: u32,
    ) -> Option<f64> {
        let d = (b.2.unit * a.2.unit.conj()).arg();
        // Predicted change from the logarithmic derivative at both ends; a
        // disagreement exposes an unresolved 2π wrap.
        let dz = b.1 - a.1;
        let predicted = match (a.2.log_deriv, b.2.log_deriv) {
            (Some(la), Some(lb)) => Some(((la + lb) * 0.5 * dz).im),
            _ => None,
        };
        let resolved = d.abs() < FRAC_PI_4 && predicted.map_or(false, |p| (p - d).abs() < FRAC_PI_4);
        if resolved {
            return Some(d);
        }
        if depth == 0 {
            return None;
        }
        let sm = 0.5 * (a.0 + b.0);
        let zm = path(sm);
        let mid = self.sample(zm)?;
        let left = self.segment(path, a, (sm, zm, &mid), depth - 1)?;
        let right = self.segment(path, (sm, zm, &mid), b, depth - 1)?;
        Some(left + right)
    }

    /// Winding number of `e` around the closed `path`, if resolvable.
    fn winding<P: Fn(f64) -> Complex64>(&self, path: &P, samples: usize) -> Option<usize> {
        let total = self.phase_change(path, samples)? / TAU;
        let k = total.round();
        ((total - k).abs() <= 0.25 && k >= 0.0).then_some(k as usize)
    }

    fn winding_circle(&self, center: Complex64, radius: f64) -> Option<usize> {
        self.winding(
            &|s: f64| center + Complex64::from_polar(radius, TAU * s),
            CONTOUR_SAMPLES,
        )
    }

    fn winding_rect(&self, lo: Complex64, hi: Complex64) -> Option<usize> {
        let corners = [lo, Complex64::new(hi.re, lo.im), hi, Complex64::new(lo.re, hi.im)];
        let path = |s: f64| {
            let t = (s * 4.0).min(3.999_999_999_999);
            let i = t.floor() as usize;
            let f = t - i as f64;
            corners[i] + (corners[(i + 1) % 4] - corners[i]) * f
        };
        self.winding(&path, CONTOUR_SAMPLES)
    }

    /// `z - μ e/e'` iterated; `None` if it fails to settle.
    fn newton(&self, mut z: Complex64, mu: f64) -> Option<Complex64> {
        for _ in 0..60 {
            let v = wide_at(&self.e, z)?;
            if v.is_zero() {
                return Some(z);
            }
            let d = wide_at(&self.de, z)?;
            if d.is_zero() {
                return None;
            }
            let step = (v / d).to_complex()? * mu;
            z -= step;
            if !z.re.is_finite() || !z.im.is_finite() {
                return None;
            }
            if step.norm() <= 1e-14 * z.norm().max(1.0) {
                return Some(z);
            }
        }
        None
    }
}

fn check_entire(e: &Expr) -> Result<(), NevError> {
    if e.may_have_poles() {
        return Err(NevError::HasPoles);
    }
    if e.is_identically_zero()? {
        return Err(NevError::IdenticallyZero);
    }
    Ok(())
}

/// Number of zeros (with multiplicity) of an entire `e` in `|z| <= t`.
pub fn count_zeros(e: &Expr, t: f64) -> Result<ZeroCount, NevError> {
    if !(t > 0.0) {
        return Err(NevError::BadRadius(t));
    }
    check_entire(e)?;
    let tracker = Tracker::new(e);
    let mut radius = t;
    for perturbations in 0..=MAX_RADIUS_NUDGES {
        if let Some(count) = tracker.winding_circle(Complex64::new(0.0, 0.0), radius) {
            return Ok(ZeroCount {
                count,
                radius,
                perturbations,
            });
        }
        radius += RADIUS_NUDGE;
    }
    Err(NevError::WindingNoConvergence(t))
}

#[derive(Clone, Copy, Debug)]
struct Rect {
    lo: Complex64,
    hi: Complex64,
}

impl Rect {
    fn width(&self) -> f64 {
        (self.hi.re - self.lo.re).max(self.hi.im - self.lo.im)
    }

    fn center(&self) -> Complex64 {
        (self.lo + self.hi) * 0.5
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.lo.re - slack
            && z.re <= self.hi.re + slack
            && z.im >= self.lo.im - slack
            && z.im <= self.hi.im + slack
    }

    fn split(&self, p: Complex64) -> [Rect; 4] {
        let c = |re, im| Complex64::new(re, im);
        [
            Rect { lo: self.lo, hi: p },
            Rect {
                lo: c(p.re, self.lo.im),
                hi: c(self.hi.re, p.im),
            },
            Rect {
                lo: c(self.lo.re, p.im),
                hi: c(p.re, self.hi.im),
            },
            Rect { lo: p, hi: self.hi },
        ]
    }
}

const MAX_BOXES: usize = 200_000;
const SPLIT_JITTER: [(f64, f64); 6] = [
    (0.0173, 0.0119),
    (-0.0311, 0.0257),
    (0.0419, -0.0377),
    (-0.0613, -0.0541),
    (0.0871, 0.0797),
    (-0.1103, 0.0967),
];

/// Zeros of an entire `e` in `|z| <= r`, located by recursive subdivision of
/// a square with argument-principle counts, then polished by Newton.
pub fn locate_zeros(e: &Expr, r: f64) -> Result<Divisor, NevError> {
    if !(r > 0.0) {
        return Err(NevError::BadRadius(r));
    }
    check_entire(e)?;
    let tracker = Tracker::new(e);
    let scale = r.max(1.0);
    let min_width = 1e-4 * scale;
    // slightly off-centre so that lattice-aligned zeros avoid the edges
    let offset = Complex64::new(1.37e-3, 2.11e-3) * scale;
    let half = 1.05 * r + 1e-3;
    let mut root = None;
    for (k, j) in SPLIT_JITTER.iter().enumerate() {
        let c = offset + Complex64::new(j.0, j.1) * (k as f64) * 1e-2 * scale;
        let rect = Rect {
            lo: c - Complex64::new(half, half),
            hi: c + Complex64::new(half, half),
        };
        if let Some(n) = tracker.winding_rect(rect.lo, rect.hi) {
            root = Some((rect, n));
            break;
        }
    }
    let (root, total) = root.ok_or_else(|| NevError::Localization("outer contour passes through a zero".into()))?;

    let mut found: Vec<(Complex64, usize)> = Vec::new();
    let mut stack = vec![(root, total)];
    let mut boxes = 0;
    while let Some((rect, count)) = stack.pop() {
        if count == 0 {
            continue;
        }
        boxes += 1;
        if boxes > MAX_BOXES {
            return Err(NevError::Localization("too many subdivision boxes".into()));
        }
        let w = rect.width();
        if let Some(z) = tracker.newton(rect.center(), count as f64) {
            if rect.contains(z, 1e-9 * scale) {
                let accept = count == 1 || {
                    let rho = (0.25 * w).min(1e-3 * z.norm().max(1.0));
                    tracker.winding_circle(z, rho) == Some(count)
                };
                if accept {
                    found.push((z, count));
                    continue;
                }
            }
        }
        if w < min_width {
            // unresolved cluster: report it as one point of full multiplicity
            let z = tracker
                .newton(rect.center(), count as f64)
                .filter(|z| rect.contains(*z, w))
                .unwrap_or(rect.center());
            found.push((z, count));
            continue;
        }
        let mut split = None;
        for j in SPLIT_JITTER {
            let p = rect.center() + Complex64::new(j.0, j.1) * w;
            let kids = rect.split(p);
            let counts: Option<Vec<usize>> = kids.iter().map(|k| tracker.winding_rect(k.lo, k.hi)).collect();
            if let Some(counts) = counts {
                if counts.iter().sum::<usize>() == count {
                    split = Some(kids.into_iter().zip(counts).collect::<Vec<_>>());
                    break;
                }
            }
        }
        match split {
            Some(children) => stack.extend(children),
            None => {
                return Err(NevError::Localization(format!(
                    "could not split box around {}",
                    rect.center()
                )))
            }
        }
    }

    // merge duplicates and keep the closed disk
    found.sort_by(|a, b| a.0.norm().total_cmp(&b.0.norm()));
    let mut points: Vec<(Complex64, usize)> = Vec::new();
    for (z, m) in found {
        match points.iter_mut().find(|(p, _)| (*p - z).norm() <= 1e-8 * scale) {
            Some(p) => p.1 += m,
            None => points.push((z, m)),
        }
    }
    points.retain(|(z, _)| z.norm() <= r);
    Ok(Divisor { points })
}

/// `∫₁^r n(t)/t dt` from a divisor: `μ log(r/|ρ|)` for `1 < |ρ| <= r`, and
/// `μ log r` for zeros in the closed unit disk.
pub fn counting_from_divisor(d: &Divisor, r: f64) -> f64 {
    d.points
        .iter()
        .filter(|(p, _)| p.norm() <= r)
        .map(|(p, m)| *m as f64 * (r / p.norm().max(1.0)).ln())
        .sum()
}

/// Integrated counting function `N(r, ν⁰_e)` for an entire `e`.
pub fn counting_integral(e: &Expr, r: f64) -> Result<f64, NevError> {
    if !(r > 1.0) {
        return Err(NevError::BadRadius(r));
    }
    Ok(counting_from_divisor(&locate_zeros(e, r)?, r))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JensenReport {
    /// `N(r, zeros) - N(r, poles)`
    pub counting: f64,
    /// Circle average of `log|h|` at `r` minus the one at radius 1.
    pub average: f64,
    pub residual: f64,
}

/// Both sides of Jensen's formula for `h = num/den` with entire `num`, `den`.
pub fn jensen_check(num: &Expr, den: &Expr, r: f64, k: usize) -> Result<JensenReport, NevError> {
    let counting = counting_integral(num, r)? - counting_integral(den, r)?;
    let g = |z: Complex64| {
        let a: Wide = wide_at(num, z)?;
        let b: Wide = wide_at(den, z)?;
        if a.is_zero() || b.is_zero() {
            return None;
        }
        Some(a.ln_abs() - b.ln_abs())
    };
    let average = circle_average(g, r, k)?.value - circle_average(g, 1.0, k)?.value;
    Ok(JensenReport {
        counting,
        average,
        residual: (counting - average).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::parse_expr;
    use std::f64::consts::PI;

    fn ex(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn counts_on_simple_functions() {
        assert_eq!(count_zeros(&ex("z"), 2.0).unwrap().count, 1);
        assert_eq!(count_zeros(&ex("exp(z)"), 30.0).unwrap().count, 0);
        // double zeros at 0, ±2πi inside |z| <= 7
        assert_eq!(count_zeros(&ex("(exp(z)-1)^2"), 7.0).unwrap().count, 6);
        assert_eq!(count_zeros(&ex("z^3*(z-5)"), 6.0).unwrap().count, 4);
        assert!(matches!(count_zeros(&ex("1/z"), 1.0), Err(NevError::HasPoles)));
        assert!(matches!(count_zeros(&ex("z-z"), 1.0), Err(NevError::IdenticallyZero)));
    }

    #[test]
    fn zero_on_the_circle_perturbs_radius() {
        let c = count_zeros(&ex("z-2"), 2.0).unwrap();
        assert!(c.perturbations >= 1);
        assert_eq!(c.count, 1);
    }

    #[test]
    fn counts_agree_with_lattice_oracle() {
        // zeros of sin z: kπ, simple
        let e = ex("sin(z)");
        for t in [1.0, 4.0, 10.0, 25.0] {
            let oracle = (0..100).map(|k| k as f64 * PI).filter(|x| *x <= t).count() * 2 - 1;
            assert_eq!(count_zeros(&e, t).unwrap().count, oracle, "t = {t}");
        }
    }

    #[test]
    fn localization_finds_lattice() {
        let d = locate_zeros(&ex("(exp(z)-1)^2"), 10.0).unwrap();
        assert_eq!(d.degree(), 6);
        for (p, m) in &d.points {
            assert_eq!(*m, 2);
            let k = (p.im / TAU).round();
            assert!((p - Complex64::new(0.0, TAU * k)).norm() < 1e-8, "{p}");
        }
        let d = locate_zeros(&ex("(z-1)*(z-1.00001)*(z+3)"), 5.0).unwrap();
        assert_eq!(d.degree(), 3);
    }

    #[test]
    fn counting_integral_examples() {
        assert!((counting_integral(&ex("z"), 5.0).unwrap() - 5f64.ln()).abs() < 1e-12);
        assert!((counting_integral(&ex("z-2"), 8.0).unwrap() - 4f64.ln()).abs() < 1e-9);
        let want = 2.0 * 10f64.ln() + 4.0 * (10.0 / TAU).ln();
        assert!((counting_integral(&ex("(exp(z)-1)^2"), 10.0).unwrap() - want).abs() < 1e-3);
    }

    #[test]
    fn jensen_examples() {
        let one = Expr::one();
        assert!(jensen_check(&ex("z"), &one, 4.0, 1024).unwrap().residual < 1e-6);
        let rep = jensen_check(&ex("z-2"), &ex("z-3"), 10.0, 1024).unwrap();
        assert!((rep.counting - 1.5f64.ln()).abs() < 1e-9);
        assert!(rep.residual < 1e-3);
        assert!(jensen_check(&ex("exp(z)"), &one, 6.0, 1024).unwrap().residual < 1e-9);
    }
}
