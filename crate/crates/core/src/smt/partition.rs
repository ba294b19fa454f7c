use num_complex::Complex64;

use super::SmtError;
use crate::funcalg::{Eval, Expr, Wide};
use crate::sampling::zero_test_points;

/// Pairs whose periodicity residual is below this share a class.
pub const PERIODICITY_TOL: f64 = 1e-6;
/// Relative size below which a class sum counts as vanishing.
const SUM_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct PairResidual {
    pub i: usize,
    pub j: usize,
    /// `max_z |ρ(z+c) - ρ(z)| / (1 + |ρ(z)|)` with `ρ = g_i/g_j`; `None` when
    /// no sample point was usable.
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionReport {
    pub classes: Vec<Vec<usize>>,
    pub pairs: Vec<PairResidual>,
    /// Pairs that could not be evaluated anywhere.
    pub inconclusive: Vec<(usize, usize)>,
    /// Projective dimension spanned over the periodic field by the class
    /// representatives: `classes - 1`.
    pub dimension_bound: usize,
    /// Largest `|Σ_j g_j| / Σ_j |g_j|` over the samples.
    pub total_sum_residual: f64,
    /// Per-class relative sums, only when the total sum vanishes.
    pub class_sum_residuals: Option<Vec<f64>>,
}

impl PartitionReport {
    /// True when `Σ g_j ≡ 0` and every class sum vanishes too.
    pub fn class_sums_vanish(&self) -> bool {
        self.class_sum_residuals
            .as_ref()
            .is_some_and(|v| v.iter().all(|&r| r < SUM_TOL))
    }
}

fn value(e: &Expr, z: Complex64) -> Option<Wide> {
    match e.eval_wide(z) {
        Eval::Value(w) if w.is_finite() => Some(w),
        _ => None,
    }
}

/// `ln(1 + e^x)` without overflow.
fn ln1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn pair_residual(gi: &Expr, gj: &Expr, c: Complex64, points: &[Complex64]) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for &z in points {
        let (Some(a0), Some(b0), Some(a1), Some(b1)) = (value(gi, z), value(gj, z), value(gi, z + c), value(gj, z + c))
        else {
            continue;
        };
        if b0.is_zero() || b1.is_zero() {
            continue;
        }
        let (r0, r1) = (a0 / b0, a1 / b1);
        let diff = r1 - r0;
        let rel = if diff.is_zero() {
            0.0
        } else {
            (diff.ln_abs() - ln1p_exp(r0.ln_abs())).exp()
        };
        worst = Some(worst.map_or(rel, |w: f64| w.max(rel)));
    }
    worst
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

/// `max_z |Σ_{j∈idx} g_j| / Σ_{j∈idx} |g_j|`
fn relative_sum(g: &[Expr], idx: &[usize], points: &[Complex64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &z in points {
        let Some(vals) = idx.iter().map(|&j| value(&g[j], z)).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let sum: Wide = vals.iter().copied().sum();
        if sum.is_zero() {
            continue;
        }
        let scale = vals.iter().map(|v| v.ln_abs()).fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = vals.iter().map(|v| (v.ln_abs() - scale).exp()).sum();
        worst = worst.max((sum.ln_abs() - scale).exp() / total);
    }
    worst
}

/// Groups `g_0, …, g_k` into classes with `c`-periodic pairwise ratios.
pub fn borel_partition(g: &[Expr], c: Complex64) -> Result<PartitionReport, SmtError> {
    for (j, e) in g.iter().enumerate() {
        if e.is_identically_zero()? {
            return Err(SmtError::ZeroFunction(j));
        }
    }
    let points = zero_test_points();
    let k = g.len();
    let mut parent: Vec<usize> = (0..k).collect();
    let mut pairs = Vec::new();
    let mut inconclusive = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let residual = pair_residual(&g[i], &g[j], c, &points);
            match residual {
                Some(r) if r < PERIODICITY_TOL => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
                None => inconclusive.push((i, j)),
                _ => {}
            }
            pairs.push(PairResidual { i, j, residual });
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; k];
    for j in 0..k {
        let root = find(&mut parent, j);
        match root_of[root] {
            Some(c) => classes[c].push(j),
            None => {
                root_of[root] = Some(classes.len());
                classes.push(vec![j]);
            }
        }
    }
    let all: Vec<usize> = (0..k).collect();
    let total_sum_residual = relative_sum(g, &all, &points);
    let class_sum_residuals =
        (total_sum_residual < SUM_TOL).then(|| classes.iter().map(|cl| relative_sum(g, cl, &points)).collect());
    Ok(PartitionReport {
        dimension_bound: classes.len().saturating_sub(1),
        classes,
        pairs,
        inconclusive,
        total_sum_residual,
        class_sum_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::parse_expr;
    use std::f64::consts::PI;

    fn exprs(src: &[&str]) -> Vec<Expr> {
        src.iter().map(|s| parse_expr(s).unwrap()).collect()
    }

    #[test]
    fn exponential_sum_splits_by_frequency() {
        let g = exprs(&["exp(z)", "2*exp(z)", "exp(2*z)", "-3*exp(z)", "-exp(2*z)"]);
        let rep = borel_partition(&g, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(rep.classes, vec![vec![0, 1, 3], vec![2, 4]]);
        assert!(rep.total_sum_residual < 1e-12);
        assert!(rep.class_sums_vanish());
        assert_eq!(rep.dimension_bound, 1);
        // with c = 2πi every ratio is periodic
        let rep = borel_partition(&g, Complex64::new(0.0, 2.0 * PI)).unwrap();
        assert_eq!(rep.classes.len(), 1);
    }

    #[test]
    fn trivial_partitions() {
        let same = exprs(&["sin(z)", "sin(z)", "sin(z)"]);
        assert_eq!(
            borel_partition(&same, Complex64::new(0.7, 0.0)).unwrap().classes.len(),
            1
        );
        let two = exprs(&["1", "exp(z)"]);
        let rep = borel_partition(&two, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(rep.classes, vec![vec![0], vec![1]]);
        assert!(rep.class_sum_residuals.is_none());
        assert!(matches!(
            borel_partition(&exprs(&["z", "z-z"]), Complex64::new(1.0, 0.0)),
            Err(SmtError::ZeroFunction(1))
        ));
    }

    #[test]
    fn periodic_coefficients_share_a_class() {
        // the ratio z·sin(2πz) / z is 1-periodic
        let g = exprs(&["z", "z*sin(2*pi*z)", "exp(z)"]);
        let rep = borel_partition(&g, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(rep.classes, vec![vec![0, 1], vec![2]]);
    }
}
