use num_rational::BigRational;

use super::margin::{assemble, check_hypotheses, chen_coefficient, determinant_for, smt_coefficient, SmtForm};
use super::{SmtError, Tolerances, Verdict};
use crate::nevanlinna::{counting_from_divisor, locate_zeros, RGrid};
use crate::nochka::to_f64;
use crate::projgeom::{HyperplaneSystem, ProjectiveMap};

/// Smallest `T_f(r)` on the top quartile for which `N/T` is meaningful.
const MIN_CHARACTERISTIC: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DefectReport {
    /// Radii of the last grid quartile, where limsup and liminf are taken.
    pub quartile_radii: Vec<f64>,
    pub per_plane: Vec<f64>,
    pub delta_c: f64,
    /// Present when `W(f) ≢ 0`.
    pub delta_w: Option<f64>,
    pub coefficient: BigRational,
    /// `2N - n + 1`
    pub bound: i64,
    /// `bound - ((N/n)δ_C + Σ δ_j)`
    pub slack: f64,
    /// `bound - (((N+1)/(n+1))δ_W + Σ δ_j)`
    pub chen_slack: Option<f64>,
    /// Every `δ_j` lies in `[-tol, 1 + tol]` and `δ_C >= -tol`.
    pub in_bounds: bool,
    pub verdict: Verdict,
}

fn quartile_start(len: usize) -> usize {
    (len * 3 / 4).min(len - 1)
}

/// `min_{top quartile} N/T`
fn liminf(counting: &[f64], t: &[f64]) -> f64 {
    counting.iter().zip(t).map(|(n, t)| n / t).fold(f64::INFINITY, f64::min)
}

/// `max_{top quartile} N/T`
fn limsup(counting: &[f64], t: &[f64]) -> f64 {
    counting
        .iter()
        .zip(t)
        .map(|(n, t)| n / t)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn defects(f: &ProjectiveMap, sys: &HyperplaneSystem, grid: &RGrid) -> Result<DefectReport, SmtError> {
    defects_with(f, sys, grid, &Tolerances::default())
}

/// Defects `δ(f, H_j) = 1 - limsup N_j/T`, `δ_C = liminf N_C/T`, estimated on
/// the last quartile of the grid, and the slack of the defect relation.
pub fn defects_with(
    f: &ProjectiveMap,
    sys: &HyperplaneSystem,
    grid: &RGrid,
    tol: &Tolerances,
) -> Result<DefectReport, SmtError> {
    check_hypotheses(f, sys)?;
    let det = determinant_for(f, SmtForm::Casorati)?;
    let asm = assemble(f, sys, grid, &det)?;
    let start = quartile_start(grid.radii().len());
    let rows = &asm.table.rows[start..];
    let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
    if let Some(bad) = rows.iter().find(|r| r.t < MIN_CHARACTERISTIC) {
        return Err(SmtError::UndefinedDefect(format!(
            "T({}) = {:.3e} < {MIN_CHARACTERISTIC} on the top quartile; extend the grid",
            bad.r, bad.t
        )));
    }
    let per_plane: Vec<f64> = (0..sys.q())
        .map(|j| {
            let nj: Vec<f64> = rows.iter().map(|r| r.counting[j]).collect();
            1.0 - limsup(&nj, &t)
        })
        .collect();
    let delta_c = liminf(&asm.det_counting[start..], &t);

    // the Wronskian relation only when W(f) ≢ 0; its zeros reuse the same table
    let delta_w = match determinant_for(f, SmtForm::Wronskian) {
        Ok(w) => {
            let expanded = w.expanded().expect("checked by determinant_for");
            let divisor = locate_zeros(expanded, grid.r_max())?;
            let nw: Vec<f64> = rows.iter().map(|r| counting_from_divisor(&divisor, r.r)).collect();
            Some(liminf(&nw, &t))
        }
        Err(SmtError::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };

    let (n, big_n) = (sys.n(), sys.big_n());
    let coefficient = smt_coefficient(n, big_n);
    let bound = 2 * big_n as i64 - n as i64 + 1;
    let sum: f64 = per_plane.iter().sum();
    let slack = bound as f64 - (to_f64(&coefficient) * delta_c + sum);
    let chen_slack = delta_w.map(|dw| bound as f64 - (to_f64(&chen_coefficient(n, big_n)) * dw + sum));
    let in_bounds = per_plane
        .iter()
        .all(|&d| d >= -tol.defect_bound && d <= 1.0 + tol.defect_bound)
        && delta_c >= -tol.defect_bound;
    let verdict = Verdict::from_bool(in_bounds && slack >= -tol.relation_slack);
    Ok(DefectReport {
        quartile_radii: rows.iter().map(|r| r.r).collect(),
        per_plane,
        delta_c,
        delta_w,
        coefficient,
        bound,
        slack,
        chen_slack,
        in_bounds,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcalg::parse_expr;
    use crate::projgeom::Hyperplane;
    use num_complex::Complex64;

    fn map(src: &[&str]) -> ProjectiveMap {
        ProjectiveMap::new(
            src.iter().map(|s| parse_expr(s).unwrap()).collect(),
            Complex64::new(1.0, 0.0),
        )
        .unwrap()
    }

    fn three_points() -> HyperplaneSystem {
        let planes = [[1.0, 0.0], [0.0, 1.0], [1.0, -1.0]]
            .iter()
            .enumerate()
            .map(|(i, r)| Hyperplane::real(r, format!("H{i}")).unwrap())
            .collect();
        HyperplaneSystem::new(planes, 1).unwrap()
    }

    #[test]
    fn exponential_defects() {
        let f = map(&["1", "exp(z)"]);
        let grid = RGrid::geometric(10.0, 300.0, 12, 1024).unwrap();
        let rep = defects(&f, &three_points(), &grid).unwrap();
        // 1 and e^z never vanish
        assert!((rep.per_plane[0] - 1.0).abs() <= 0.02);
        assert!((rep.per_plane[1] - 1.0).abs() <= 0.02);
        // 1 - e^z has N ~ r/π ~ T
        assert!(rep.per_plane[2].abs() <= 0.02, "{rep:?}");
        assert_eq!(rep.delta_c, 0.0);
        assert_eq!(rep.bound, 2);
        assert!(rep.slack.abs() <= 0.05, "{rep:?}");
        assert_eq!(rep.delta_w, Some(0.0));
        assert!(rep.verdict.passed());
    }

    #[test]
    fn small_characteristic_is_undefined() {
        let f = map(&["1", "z"]);
        let grid = RGrid::geometric(1.5, 2.5, 4, 128).unwrap();
        assert!(matches!(
            defects(&f, &three_points(), &grid),
            Err(SmtError::UndefinedDefect(_))
        ));
    }
}
