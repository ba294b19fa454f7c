//! Pointwise spot-check of the weighted product inequality behind the second
//! main theorem.

use num_complex::Complex64;

use super::margin::check_hypotheses;
use super::SmtError;
use crate::determinants::wide_det;
use crate::funcalg::Wide;
use crate::nevanlinna::{ln_norm, wide_at};
use crate::nochka::{verify_weights, NochkaWeights};
use crate::projgeom::{combinations, HyperplaneSystem, ProjectiveMap};

/// Samples closer than this (relative) to a zero of a pairing are excluded.
const EXCLUSION_TOL: f64 = 1e-8;

/// `R° ⊆ R = Q ∖ S`; `r` lists `t_0, …, t_N` with `R°` first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub s: Vec<usize>,
    pub r: Vec<usize>,
    pub r0: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseSample {
    pub z: Complex64,
    /// `ln K_z`, minimised over decompositions.
    pub ln_k: f64,
    pub decomposition: Decomposition,
    /// `ln |C(((f,H_j), j∈R°))| - ln |C(f)|`
    pub ln_casorati_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseReport {
    pub samples: Vec<PointwiseSample>,
    /// Points in (or numerically next to) the excluded analytic set.
    pub rejected: Vec<Complex64>,
    pub decompositions: usize,
}

impl PointwiseReport {
    pub fn k_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.ln_k.exp()).collect()
    }

    pub fn sup_k(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.ln_k)
            .fold(f64::NEG_INFINITY, f64::max)
            .exp()
    }
}

fn decompositions(sys: &HyperplaneSystem) -> Vec<Decomposition> {
    let (q, big_n, n) = (sys.q(), sys.big_n(), sys.n());
    let mut out = Vec::new();
    for s in combinations(q, q - big_n - 1) {
        let r: Vec<usize> = (0..q).filter(|j| !s.contains(j)).collect();
        for pick in combinations(r.len(), n + 1) {
            let r0: Vec<usize> = pick.iter().map(|&i| r[i]).collect();
            if sys.rank_of_subset(&r0) < n + 1 {
                continue;
            }
            let mut ordered = r0.clone();
            ordered.extend(r.iter().filter(|j| !r0.contains(j)));
            out.push(Decomposition {
                s: s.clone(),
                r: ordered,
                r0,
            });
        }
    }
    out
}

/// Minimal constant `K_z` in
/// `‖f‖^{ω̃(q-2N+n-1)} <= K_z · Π_{t_i∈R}|(f̄^{[i]},H_{t_i})|^{ω(t_i)} · Π_{j∈S}|(f,H_j)|^{ω(j)}
///   / |C(f)| · |C((f,H_j), j∈R°)| / Π_{i<=n}|(f̄^{[i]},H_{t_i})|`
/// at each sample point, over all admissible decompositions.
pub fn pointwise_lemma35_check(
    f: &ProjectiveMap,
    sys: &HyperplaneSystem,
    weights: &NochkaWeights,
    zs: &[Complex64],
) -> Result<PointwiseReport, SmtError> {
    check_hypotheses(f, sys)?;
    let cert = verify_weights(weights, sys);
    if !cert.passed() {
        let failed: Vec<String> = cert.failures().map(|r| r.detail.clone()).collect();
        return Err(SmtError::Weights(failed.join("; ")));
    }
    let (q, big_n, n) = (sys.q(), sys.big_n(), sys.n());
    let omega = weights.weights_f64();
    let exponent = weights.constant_f64() * (q as f64 - 2.0 * big_n as f64 + n as f64 - 1.0);
    let decs = decompositions(sys);
    let c = f.shift_offset();
    let ln_h: Vec<f64> = sys.planes().iter().map(|h| h.norm().ln()).collect();

    let mut samples = Vec::new();
    let mut rejected = Vec::new();
    'points: for &z in zs {
        // fv[k] = f(z + kc), pair[k][j] = (f̄^{[k]}, H_j)
        let mut fv: Vec<Vec<Wide>> = Vec::with_capacity(big_n + 1);
        for k in 0..=big_n {
            let at = z + c * k as f64;
            let Some(row) = f
                .components()
                .iter()
                .map(|e| wide_at(e, at))
                .collect::<Option<Vec<_>>>()
            else {
                rejected.push(z);
                continue 'points;
            };
            fv.push(row);
        }
        let mut pair = vec![vec![Wide::ZERO; q]; big_n + 1];
        for k in 0..=big_n {
            let ln_f = ln_norm(&fv[k]);
            for (j, h) in sys.planes().iter().enumerate() {
                let v: Wide = fv[k]
                    .iter()
                    .zip(h.coeffs())
                    .map(|(a, b)| *a * Wide::from_complex(*b))
                    .sum();
                if v.is_zero() || v.ln_abs() - ln_f - ln_h[j] < EXCLUSION_TOL.ln() {
                    rejected.push(z);
                    continue 'points;
                }
                pair[k][j] = v;
            }
        }
        let cf = wide_det(fv[..=n].to_vec());
        let hadamard: f64 = fv[..=n].iter().map(|row| ln_norm(row)).sum();
        if cf.is_zero() || cf.ln_abs() - hadamard < EXCLUSION_TOL.ln() {
            rejected.push(z);
            continue;
        }
        let lhs = exponent * ln_norm(&fv[0]);

        let mut best: Option<PointwiseSample> = None;
        for d in &decs {
            let mut sorted = d.r0.clone();
            sorted.sort_unstable();
            let cg = wide_det((0..=n).map(|k| sorted.iter().map(|&j| pair[k][j]).collect()).collect());
            if cg.is_zero() {
                continue;
            }
            let ratio = cg.ln_abs() - cf.ln_abs();
            let weighted: f64 =
                d.r.iter()
                    .enumerate()
                    .map(|(i, &t)| omega[t] * pair[i][t].ln_abs())
                    .sum::<f64>()
                    + d.s.iter().map(|&j| omega[j] * pair[0][j].ln_abs()).sum::<f64>();
            let shifted: f64 = d.r0.iter().enumerate().map(|(i, &t)| pair[i][t].ln_abs()).sum();
            let ln_k = lhs - (weighted + ratio - shifted);
            if best.as_ref().map_or(true, |b| ln_k < b.ln_k) {
                best = Some(PointwiseSample {
                    z,
                    ln_k,
                    decomposition: d.clone(),
                    ln_casorati_ratio: ratio,
                });
            }
        }
        match best {
            Some(s) => samples.push(s),
            None => return Err(SmtError::NoDecomposition(format!("{z}"))),
        }
    }
    Ok(PointwiseReport {
        samples,
        rejected,
        decompositions: decs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::funcalg::parse_expr;
    use crate::nochka::compute_weights;
    use crate::projgeom::Hyperplane;
    use crate::sampling::annulus_points;
    use nalgebra::Matrix2;

    fn map(src: &[&str]) -> ProjectiveMap {
        ProjectiveMap::new(
            src.iter().map(|s| parse_expr(s).unwrap()).collect(),
            Complex64::new(1.0, 0.0),
        )
        .unwrap()
    }

    fn system(rows: &[&[f64]], big_n: usize) -> HyperplaneSystem {
        let planes = rows
            .iter()
            .enumerate()
            .map(|(i, r)| Hyperplane::real(r, format!("H{i}")).unwrap())
            .collect();
        HyperplaneSystem::new(planes, big_n).unwrap()
    }

    #[test]
    fn three_points_reduce_to_a_two_by_two_identity() {
        let rows: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [1.0, -1.0]];
        let sys = system(&[&rows[0], &rows[1], &rows[2]], 1);
        let f = map(&["1", "exp(z)"]);
        let w = compute_weights(&sys).unwrap();
        let zs = annulus_points(60, 0.3, 3.0, 11);
        let rep = pointwise_lemma35_check(&f, &sys, &w, &zs).unwrap();
        assert_eq!(rep.decompositions, 3);
        assert!(rep.samples.len() >= 50);
        for s in &rep.samples {
            // C((f,H_a),(f,H_b)) = C(f)·det B for the two planes in R
            let r = &s.decomposition.r0;
            let b = Matrix2::new(rows[r[0]][0], rows[r[1]][0], rows[r[0]][1], rows[r[1]][1]);
            let det_b = b.determinant().abs();
            assert!((s.ln_casorati_ratio - det_b.ln()).abs() < 1e-9);
            // closed form: K_z = min_s ‖f‖ / (|(f,H_s)|·|det B_{Q∖s}|)
            let e = s.z.exp();
            let vals = [Complex64::new(1.0, 0.0), e, 1.0 - e];
            let norm = (1.0 + e.norm_sqr()).sqrt();
            let oracle = (0..3)
                .map(|j| {
                    let rest: Vec<usize> = (0..3).filter(|&i| i != j).collect();
                    let bm = Matrix2::new(rows[rest[0]][0], rows[rest[1]][0], rows[rest[0]][1], rows[rest[1]][1]);
                    norm / (vals[j].norm() * bm.determinant().abs())
                })
                .fold(f64::INFINITY, f64::min);
            assert!((s.ln_k.exp() - oracle).abs() < 1e-9 * oracle);
            // every |det B| is 1 and max(1, |e^z|) <= max_j |(f,H_j)| <= 1 + |e^z|,
            // so K_z lies in [1/√2, √2]
            let k = s.ln_k.exp();
            assert!(k <= 2f64.sqrt() + 1e-12 && k >= 0.5f64.sqrt() - 1e-12);
        }
    }

    #[test]
    fn general_position_battery_is_bounded() {
        let (_, sys) = &fixtures::systems_p1()[1];
        let f = map(&["1", "exp(z)"]);
        let w = compute_weights(sys).unwrap();
        let rep = pointwise_lemma35_check(&f, sys, &w, &annulus_points(100, 0.2, 4.0, 5)).unwrap();
        assert!(rep.samples.len() >= 90);
        assert!(rep.sup_k() <= 1e6);

        let f2 = map(&["1", "exp(z)", "exp(2*z)"]);
        let six = system(
            &[
                &[1.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0],
                &[0.0, 0.0, 1.0],
                &[1.0, 1.0, 1.0],
                &[1.0, 2.0, 3.0],
                &[1.0, -1.0, 2.0],
            ],
            2,
        );
        let (_, concurrent) = &fixtures::systems_p2()[2];
        for sys2 in [&six, concurrent] {
            let w2 = compute_weights(sys2).unwrap();
            let rep2 = pointwise_lemma35_check(&f2, sys2, &w2, &annulus_points(100, 0.2, 3.0, 6)).unwrap();
            assert!(rep2.samples.len() >= 90);
            assert!(rep2.sup_k() <= 1e6, "{}", rep2.sup_k());
        }
    }

    #[test]
    fn points_on_a_zero_are_rejected() {
        let sys = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0]], 1);
        let f = map(&["1", "exp(z)"]);
        let w = compute_weights(&sys).unwrap();
        let z0 = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let rep = pointwise_lemma35_check(&f, &sys, &w, &[z0, Complex64::new(0.5, 0.5)]).unwrap();
        assert_eq!(rep.rejected, vec![z0]);
        assert_eq!(rep.samples.len(), 1);
        let bad = NochkaWeights::unchecked(vec![crate::nochka::simplex::qi(2); 3], crate::nochka::simplex::qi(1));
        assert!(matches!(
            pointwise_lemma35_check(&f, &sys, &bad, &[z0]),
            Err(SmtError::Weights(_))
        ));
    }
}
