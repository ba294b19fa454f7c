use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::simplex::{maximize, qi, Constraint, LpOutcome, Sense, Q};
use super::{fmt_rational, NochkaError};
use crate::projgeom::{subsets_up_to, HyperplaneSystem, PositionCertificate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// `0 < ω(j) <= 1`
    Bounds,
    /// `Σ ω(j) = ω̃(q - 2N + n - 1) + n + 1`
    SumIdentity,
    /// `(n+1)/(2N-n+1) <= ω̃ <= n/N`
    ConstantRange,
    /// `Σ_{j∈R} ω(j) <= rk(R)` for `0 < |R| <= N+1`
    SubsetRank,
    /// `ω̃ = max ω(j)`
    ConstantIsMax,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub kind: CheckKind,
    pub passed: bool,
    pub detail: String,
    /// Offending plane indices, when a check fails on specific planes.
    pub witness: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightCertificate {
    pub records: Vec<CheckRecord>,
}

impl WeightCertificate {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.passed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NochkaWeights {
    pub weights: Vec<BigRational>,
    pub constant: BigRational,
    pub certificates: Vec<CheckRecord>,
}

impl NochkaWeights {
    /// Weights without certificates; call [`verify_weights`] to fill them.
    pub fn unchecked(weights: Vec<BigRational>, constant: BigRational) -> Self {
        NochkaWeights {
            weights,
            constant,
            certificates: Vec::new(),
        }
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(to_f64).collect()
    }

    pub fn constant_f64(&self) -> f64 {
        to_f64(&self.constant)
    }
}

pub(crate) fn to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

fn ratio(p: usize, q: usize) -> Q {
    Q::new((p as i64).into(), (q as i64).into())
}

/// `q - 2N + n - 1` as a (possibly negative) integer.
fn excess(sys: &HyperplaneSystem) -> i64 {
    sys.q() as i64 - 2 * sys.big_n() as i64 + sys.n() as i64 - 1
}

/// Solves for Nochka weights, maximising `ω̃` among feasible choices.
pub fn compute_weights(sys: &HyperplaneSystem) -> Result<NochkaWeights, NochkaError> {
    let (q, big_n, n) = (sys.q(), sys.big_n(), sys.n());
    if let PositionCertificate::Fail { witness, rank } = sys.check_subgeneral() {
        return Err(NochkaError::NotSubgeneral { big_n, witness, rank });
    }
    if q <= 2 * big_n - n + 1 {
        return Err(NochkaError::TooFewPlanes { q, big_n, n });
    }
    if big_n == n {
        let w = NochkaWeights::unchecked(vec![Q::one(); q], Q::one());
        return Ok(certify(w, sys));
    }

    // variables: ω_0..ω_{q-1}, t = ω̃, s = positivity margin
    let nv = q + 2;
    let (t, s) = (q, q + 1);
    let unit = |idx: &[(usize, Q)]| {
        let mut v = vec![Q::zero(); nv];
        for (i, c) in idx {
            v[*i] = c.clone();
        }
        v
    };
    let upper = ratio(n, big_n);
    let lower = ratio(n + 1, 2 * big_n - n + 1);
    let mut cons: Vec<Constraint> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for j in 0..q {
        cons.push(Constraint::new(unit(&[(j, qi(1)), (t, qi(-1))]), Sense::Le, Q::zero()));
        names.push(format!("omega({j}) <= constant"));
    }
    let mut sum = vec![Q::one(); nv];
    sum[t] = qi(-excess(sys));
    sum[s] = Q::zero();
    cons.push(Constraint::new(sum, Sense::Eq, qi(n as i64 + 1)));
    names.push("sum identity".into());
    cons.push(Constraint::new(unit(&[(t, qi(1))]), Sense::Le, upper.clone()));
    names.push(format!("constant <= {}", fmt_rational(&upper)));
    cons.push(Constraint::new(unit(&[(t, qi(1))]), Sense::Ge, lower.clone()));
    names.push(format!("constant >= {}", fmt_rational(&lower)));
    // Σ_R ω <= |R|·t <= |R|·n/N already, so only rk(R)·N < |R|·n can bind.
    for r in subsets_up_to(q, big_n + 1) {
        let rk = sys.rank_of_subset(&r);
        if rk * big_n < r.len() * n {
            let idx: Vec<(usize, Q)> = r.iter().map(|&j| (j, qi(1))).collect();
            cons.push(Constraint::new(unit(&idx), Sense::Le, qi(rk as i64)));
            names.push(format!("sum over R={r:?} <= rk(R)={rk}"));
        }
    }

    let lp = |extra: &[Constraint], objective: &[Q]| {
        let mut all = cons.clone();
        all.extend_from_slice(extra);
        maximize(objective, &all)
    };

    let best_t = match lp(&[], &unit(&[(t, qi(1))])) {
        LpOutcome::Optimal { value, .. } => value,
        LpOutcome::Infeasible { row, violation } => {
            return Err(NochkaError::Infeasible {
                constraint: names.get(row).cloned().unwrap_or_else(|| format!("row {row}")),
                violation: fmt_rational(&violation),
            })
        }
        LpOutcome::Unbounded => unreachable!("t is bounded above by n/N"),
    };

    // Second pass: keep t at its maximum, force ω̃ to be attained, and push all
    // weights away from zero.
    let margin_rows = |pin_t: Option<&Q>, j0: usize| {
        let mut extra: Vec<Constraint> = (0..q)
            .map(|j| Constraint::new(unit(&[(s, qi(1)), (j, qi(-1))]), Sense::Le, Q::zero()))
            .collect();
        extra.push(Constraint::new(unit(&[(j0, qi(1)), (t, qi(-1))]), Sense::Eq, Q::zero()));
        if let Some(tv) = pin_t {
            extra.push(Constraint::new(unit(&[(t, qi(1))]), Sense::Eq, tv.clone()));
        }
        extra
    };
    for pin in [Some(&best_t), None] {
        for j0 in 0..q {
            if let LpOutcome::Optimal { x, .. } = lp(&margin_rows(pin, j0), &unit(&[(s, qi(1))])) {
                if x[s].is_positive() {
                    let w = NochkaWeights::unchecked(x[..q].to_vec(), x[t].clone());
                    return Ok(certify(w, sys));
                }
            }
        }
    }
    Err(NochkaError::Infeasible {
        constraint: "strict positivity with the constant attained".into(),
        violation: "0/1".into(),
    })
}

fn certify(mut w: NochkaWeights, sys: &HyperplaneSystem) -> NochkaWeights {
    w.certificates = verify_weights(&w, sys).records;
    w
}

/// Re-checks the four defining properties plus `ω̃ = max ω(j)`.
pub fn verify_weights(w: &NochkaWeights, sys: &HyperplaneSystem) -> WeightCertificate {
    let (q, big_n, n) = (sys.q(), sys.big_n(), sys.n());
    let mut records = Vec::new();
    if w.weights.len() != q {
        records.push(CheckRecord {
            kind: CheckKind::Bounds,
            passed: false,
            detail: format!("expected {q} weights, got {}", w.weights.len()),
            witness: None,
        });
        return WeightCertificate { records };
    }

    let bad: Vec<usize> = (0..q)
        .filter(|&j| !(w.weights[j].is_positive() && w.weights[j] <= Q::one()))
        .collect();
    records.push(CheckRecord {
        kind: CheckKind::Bounds,
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            "all weights in (0, 1]".into()
        } else {
            format!("weight {} out of (0, 1]", fmt_rational(&w.weights[bad[0]]))
        },
        witness: (!bad.is_empty()).then_some(bad),
    });

    let total: Q = w.weights.iter().cloned().sum();
    let expected = &w.constant * qi(excess(sys)) + qi(n as i64 + 1);
    records.push(CheckRecord {
        kind: CheckKind::SumIdentity,
        passed: total == expected,
        detail: format!("sum = {}, expected {}", fmt_rational(&total), fmt_rational(&expected)),
        witness: None,
    });

    let lo = ratio(n + 1, 2 * big_n - n + 1);
    let hi = ratio(n, big_n);
    records.push(CheckRecord {
        kind: CheckKind::ConstantRange,
        passed: lo <= w.constant && w.constant <= hi,
        detail: format!(
            "{} <= {} <= {}",
            fmt_rational(&lo),
            fmt_rational(&w.constant),
            fmt_rational(&hi)
        ),
        witness: None,
    });

    let mut violation = None;
    for r in subsets_up_to(q, big_n + 1) {
        let s: Q = r.iter().map(|&j| w.weights[j].clone()).sum();
        let rk = sys.rank_of_subset(&r);
        if s > qi(rk as i64) {
            violation = Some((r, s, rk));
            break;
        }
    }
    records.push(CheckRecord {
        kind: CheckKind::SubsetRank,
        passed: violation.is_none(),
        detail: match &violation {
            None => format!("all subsets of size <= {} respect rank", big_n + 1),
            Some((r, s, rk)) => format!("sum over {r:?} is {} > rk = {rk}", fmt_rational(s)),
        },
        witness: violation.map(|v| v.0),
    });

    let max = w.weights.iter().max().cloned().unwrap_or_else(Q::zero);
    records.push(CheckRecord {
        kind: CheckKind::ConstantIsMax,
        passed: max == w.constant,
        detail: format!("max weight {}", fmt_rational(&max)),
        witness: None,
    });
    WeightCertificate { records }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nochka::simplex::q as rat;
    use crate::projgeom::Hyperplane;

    fn system(rows: &[&[f64]], big_n: usize) -> HyperplaneSystem {
        let planes = rows
            .iter()
            .enumerate()
            .map(|(i, r)| Hyperplane::real(r, format!("H{i}")).unwrap())
            .collect();
        HyperplaneSystem::new(planes, big_n).unwrap()
    }

    fn five_points() -> HyperplaneSystem {
        system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0], &[1.0, 2.0], &[2.0, -3.0]], 2)
    }

    #[test]
    fn general_position_gives_all_ones() {
        let sys = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0], &[1.0, 1.0]], 1);
        let w = compute_weights(&sys).unwrap();
        assert_eq!(w.weights, vec![Q::one(); 4]);
        assert_eq!(w.constant, Q::one());
        assert!(w.certificates.iter().all(|c| c.passed));
    }

    #[test]
    fn minimum_q_sum_reads_constant_plus_n_plus_one() {
        // n = 1, N = 2, q = 2N - n + 2 = 5
        let sys = five_points();
        let w = compute_weights(&sys).unwrap();
        let total: Q = w.weights.iter().cloned().sum();
        assert_eq!(total, &w.constant + qi(2));
    }

    /// Independent oracle: scan every weight vector with a common denominator
    /// d <= 20 and report the largest feasible constant, if any.
    fn grid_oracle(sys: &HyperplaneSystem) -> Option<Q> {
        let (q, big_n, n) = (sys.q(), sys.big_n(), sys.n());
        let ranks: Vec<(Vec<usize>, usize)> = subsets_up_to(q, big_n + 1)
            .map(|r| (r.clone(), sys.rank_of_subset(&r)))
            .collect();
        let k = excess(sys);
        let (n1, span) = (n as i64 + 1, 2 * big_n as i64 - n as i64 + 1);
        let mut best: Option<Q> = None;
        for d in 1..=20i64 {
            let combos = (d as usize).pow(q as u32 - 1);
            for code in 0..combos {
                let mut c = code;
                let mut full: Vec<i64> = (0..q - 1)
                    .map(|_| {
                        let v = (c % d as usize) as i64 + 1;
                        c /= d as usize;
                        v
                    })
                    .collect();
                let head: i64 = full.iter().sum();
                let head_max = *full.iter().max().unwrap();
                // the last numerator is forced by the sum identity once max(a) is known
                let mut lasts = vec![head_max * k + n1 * d - head];
                if k != 1 && (n1 * d - head) % (1 - k) == 0 {
                    lasts.push((n1 * d - head) / (1 - k));
                } else if k == 1 && n1 * d == head {
                    lasts.extend(head_max + 1..=d);
                }
                full.push(0);
                for last in lasts {
                    if last < 1 || last > d {
                        continue;
                    }
                    full[q - 1] = last;
                    let m = head_max.max(last);
                    let sum_ok = full.iter().sum::<i64>() == m * k + n1 * d;
                    let range_ok = m * span >= n1 * d && m * big_n as i64 <= n as i64 * d;
                    let rank_ok = ranks
                        .iter()
                        .all(|(r, rk)| r.iter().map(|&j| full[j]).sum::<i64>() <= *rk as i64 * d);
                    if sum_ok && range_ok && rank_ok {
                        let c = rat(m, d);
                        if best.as_ref().map_or(true, |b| c > *b) {
                            best = Some(c);
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn five_points_in_p1_match_grid_oracle() {
        let sys = five_points();
        let w = compute_weights(&sys).unwrap();
        assert!(verify_weights(&w, &sys).passed());
        let oracle = grid_oracle(&sys).expect("oracle finds a feasible point");
        assert_eq!(w.constant, oracle);
        assert_eq!(w.constant, rat(1, 2));
    }

    #[test]
    fn all_ones_fail_when_subgeneral() {
        // duplicate planes make rk({2,3}) = 1 < 2
        let sys = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0], &[2.0, -2.0], &[1.0, 3.0]], 2);
        let w = NochkaWeights::unchecked(vec![Q::one(); 5], Q::one());
        let cert = verify_weights(&w, &sys);
        assert!(!cert.passed());
        let rank_rec = cert.records.iter().find(|r| r.kind == CheckKind::SubsetRank).unwrap();
        assert_eq!(rank_rec.witness.as_deref(), Some(&[2usize, 3][..]));
    }

    #[test]
    fn rejects_bad_inputs() {
        let dup = system(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]], 1);
        assert!(matches!(compute_weights(&dup), Err(NochkaError::NotSubgeneral { .. })));
        // q = 4 is not > 2N - n + 1 = 4 for n = 1, N = 2
        let few = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], &[1.0, 2.0]], 2);
        assert!(matches!(compute_weights(&few), Err(NochkaError::TooFewPlanes { .. })));
    }

    #[test]
    fn duplicated_plane_system_solves() {
        let sys = system(
            &[
                &[1.0, 0.0],
                &[0.0, 1.0],
                &[1.0, -1.0],
                &[2.0, -2.0],
                &[1.0, 3.0],
                &[3.0, 1.0],
            ],
            2,
        );
        let w = compute_weights(&sys).unwrap();
        let cert = verify_weights(&w, &sys);
        assert!(cert.passed(), "{:?}", cert.failures().collect::<Vec<_>>());
        // the duplicated pair shares rank 1
        assert!(&w.weights[2] + &w.weights[3] <= Q::one());
    }
}
