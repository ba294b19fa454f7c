use num_rational::BigRational;
use rayon::prelude::*;

use super::{SmtError, Tolerances, Verdict};
use crate::determinants::{casorati, test_nonvanishing, wronskian, Degeneracy, DeterminantExpr};
use crate::nevanlinna::{
    counting_from_divisor, growth_table, locate_zeros, order_from_series, tchar, GrowthTable, RGrid, MIN_QUADRATURE,
};
use crate::nochka::simplex::q as rat;
use crate::nochka::to_f64;
use crate::projgeom::{HyperplaneSystem, PositionCertificate, ProjectiveMap};

/// Which determinant enters the ramification term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmtForm {
    /// `C(f)` with coefficient `N/n`.
    Casorati,
    /// `W(f)` with coefficient `(N+1)/(n+1)`.
    Wronskian,
}

impl SmtForm {
    pub fn name(self) -> &'static str {
        match self {
            SmtForm::Casorati => "casorati",
            SmtForm::Wronskian => "wronskian",
        }
    }
}

/// `N/n`
pub fn smt_coefficient(n: usize, big_n: usize) -> BigRational {
    rat(big_n as i64, n as i64)
}

/// `(N+1)/(n+1)`
pub fn chen_coefficient(n: usize, big_n: usize) -> BigRational {
    rat(big_n as i64 + 1, n as i64 + 1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmtRow {
    pub r: f64,
    pub t: f64,
    /// `(q - 2N + n - 1)·T_f(r)`
    pub lhs: f64,
    /// `Σ_j N(r, ν⁰_{(f,H_j)})`
    pub counting_sum: f64,
    /// `N(r, ν⁰)` of the determinant
    pub det_counting: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tol: f64,
    /// `|T_K - T_{K/2}|`
    pub quadrature_error: f64,
    /// `margin / T` when `T > 0`
    pub relative_margin: Option<f64>,
    pub exceptional: bool,
}

#[derive(Clone, Debug)]
pub struct SmtReport {
    pub form: SmtForm,
    pub coefficient: BigRational,
    pub excess: i64,
    pub grid: RGrid,
    pub table: GrowthTable,
    pub rows: Vec<SmtRow>,
    pub exceptional_radii: Vec<f64>,
    pub hyperorder: Option<f64>,
    pub tolerances: Tolerances,
    pub verdict: Verdict,
}

impl SmtReport {
    pub fn margins(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.margin).collect()
    }

    /// Fraction of radii where `margin >= -tol`.
    pub fn pass_fraction(&self) -> f64 {
        let ok = self.rows.iter().filter(|r| !r.exceptional).count();
        ok as f64 / self.rows.len() as f64
    }
}

/// Hypotheses shared by every inequality check: dimensions agree, the
/// position is certified and `q > 2N - n + 1`.
pub(crate) fn check_hypotheses(f: &ProjectiveMap, sys: &HyperplaneSystem) -> Result<(), SmtError> {
    if f.dim() != sys.n() {
        return Err(SmtError::DimensionMismatch {
            map: f.dim(),
            planes: sys.n(),
        });
    }
    if let PositionCertificate::Fail { witness, rank } = sys.check_subgeneral() {
        return Err(SmtError::Position {
            big_n: sys.big_n(),
            witness,
            rank,
        });
    }
    let bound = 2 * sys.big_n() as i64 - sys.n() as i64 + 1;
    if (sys.q() as i64) <= bound {
        return Err(SmtError::TooFewPlanes { q: sys.q(), bound });
    }
    Ok(())
}

pub(crate) fn determinant_for(f: &ProjectiveMap, form: SmtForm) -> Result<DeterminantExpr, SmtError> {
    let det = match form {
        SmtForm::Casorati => casorati(f.components(), f.shift_offset()),
        SmtForm::Wronskian => wronskian(f.components()),
    };
    if let Degeneracy::Degenerate { .. } = test_nonvanishing(&det)? {
        return Err(SmtError::Degenerate(match form {
            SmtForm::Casorati => "C(f)",
            SmtForm::Wronskian => "W(f)",
        }));
    }
    if det.expanded().is_none() {
        return Err(SmtError::DeterminantTooLarge(det.size()));
    }
    Ok(det)
}

/// Growth table plus the determinant counting function and a quadrature
/// error estimate on every radius.
pub(crate) struct Assembled {
    pub table: GrowthTable,
    pub det_counting: Vec<f64>,
    pub quadrature_error: Vec<f64>,
    pub hyperorder: Option<f64>,
}

pub(crate) fn assemble(
    f: &ProjectiveMap,
    sys: &HyperplaneSystem,
    grid: &RGrid,
    det: &DeterminantExpr,
) -> Result<Assembled, SmtError> {
    let table = growth_table(f, sys.planes(), sys.big_n(), grid)?;
    let hyperorder = order_from_series(grid.radii(), &table.t_values())
        .ok()
        .map(|e| e.hyperorder);
    if let Some(h) = hyperorder {
        if h >= 1.0 {
            return Err(SmtError::Hyperorder(h));
        }
    }
    let expanded = det.expanded().expect("checked by determinant_for");
    let divisor = locate_zeros(expanded, grid.r_max())?;
    let det_counting = grid
        .radii()
        .iter()
        .map(|&r| counting_from_divisor(&divisor, r))
        .collect();
    let k = grid.quadrature_points();
    let quadrature_error = if k / 2 >= MIN_QUADRATURE {
        grid.radii()
            .par_iter()
            .zip(table.rows.par_iter())
            .map(|(&r, row)| Ok((row.t - tchar(f, r, k / 2)?).abs()))
            .collect::<Result<Vec<_>, SmtError>>()?
    } else {
        vec![0.0; grid.radii().len()]
    };
    Ok(Assembled {
        table,
        det_counting,
        quadrature_error,
        hyperorder,
    })
}

fn margin_report(
    f: &ProjectiveMap,
    sys: &HyperplaneSystem,
    grid: &RGrid,
    form: SmtForm,
    tol: &Tolerances,
) -> Result<SmtReport, SmtError> {
    check_hypotheses(f, sys)?;
    let det = determinant_for(f, form)?;
    let Assembled {
        mut table,
        det_counting,
        quadrature_error,
        hyperorder,
    } = assemble(f, sys, grid, &det)?;
    let coefficient = match form {
        SmtForm::Casorati => smt_coefficient(sys.n(), sys.big_n()),
        SmtForm::Wronskian => chen_coefficient(sys.n(), sys.big_n()),
    };
    let coef = to_f64(&coefficient);
    let excess = sys.q() as i64 - 2 * sys.big_n() as i64 + sys.n() as i64 - 1;

    let mut rows = Vec::with_capacity(table.rows.len());
    for (i, g) in table.rows.iter_mut().enumerate() {
        let lhs = excess as f64 * g.t;
        let counting_sum: f64 = g.counting.iter().sum();
        let rhs = counting_sum - coef * det_counting[i];
        let margin = rhs - lhs;
        let budget = tol.relative * g.t.max(1.0) + quadrature_error[i];
        g.margin = Some(margin);
        rows.push(SmtRow {
            r: g.r,
            t: g.t,
            lhs,
            counting_sum,
            det_counting: det_counting[i],
            rhs,
            margin,
            tol: budget,
            quadrature_error: quadrature_error[i],
            relative_margin: (g.t > 0.0).then(|| margin / g.t),
            exceptional: margin < -budget,
        });
    }
    let exceptional_radii: Vec<f64> = rows.iter().filter(|r| r.exceptional).map(|r| r.r).collect();
    let verdict = Verdict::from_bool(exceptional_radii.len() as f64 <= tol.exceptional_fraction * rows.len() as f64);
    Ok(SmtReport {
        form,
        coefficient,
        excess,
        grid: grid.clone(),
        table,
        rows,
        exceptional_radii,
        hyperorder,
        tolerances: *tol,
        verdict,
    })
}

/// Evaluates `Σ_j N(r, ν⁰_{(f,H_j)}) - (N/n)·N(r, ν⁰_{C(f)}) - (q-2N+n-1)·T_f(r)`
/// on the grid.
pub fn smt_margin(f: &ProjectiveMap, sys: &HyperplaneSystem, grid: &RGrid) -> Result<SmtReport, SmtError> {
    smt_margin_with(f, sys, grid, &Tolerances::default())
}

pub fn smt_margin_with(
    f: &ProjectiveMap,
    sys: &HyperplaneSystem,
    grid: &RGrid,
    tol: &Tolerances,
) -> Result<SmtReport, SmtError> {
    margin_report(f, sys, grid, SmtForm::Casorati, tol)
}

/// The classical form with `W(f)` and coefficient `(N+1)/(n+1)`.
pub fn chen_margin(f: &ProjectiveMap, sys: &HyperplaneSystem, grid: &RGrid) -> Result<SmtReport, SmtError> {
    chen_margin_with(f, sys, grid, &Tolerances::default())
}

pub fn chen_margin_with(
    f: &ProjectiveMap,
    sys: &HyperplaneSystem,
    grid: &RGrid,
    tol: &Tolerances,
) -> Result<SmtReport, SmtError> {
    margin_report(f, sys, grid, SmtForm::Wronskian, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::funcalg::parse_expr;
    use crate::projgeom::Hyperplane;
    use num_complex::Complex64;
    use num_traits::One;
    use std::f64::consts::PI;

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

    /// `Σ_{|2πk| <= r} log(r / max(1, |2πk|))`
    fn lattice_counting(r: f64) -> f64 {
        let m = (r / (2.0 * PI)).floor() as i64;
        r.ln() + 2.0 * (1..=m).map(|k| (r / (2.0 * PI * k as f64)).ln()).sum::<f64>()
    }

    #[test]
    fn exponential_three_points() {
        let f = map(&["1", "exp(z)"]);
        let sys = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0]], 1);
        let grid = RGrid::geometric(4.0, 40.0, 8, 512).unwrap();
        let rep = smt_margin(&f, &sys, &grid).unwrap();
        assert_eq!(rep.excess, 1);
        assert!(rep.coefficient.is_one());
        for row in &rep.rows {
            let t_oracle = (row.r - 1.0) / PI;
            assert!((row.t - t_oracle).abs() < 0.01 * t_oracle);
            assert!((row.counting_sum - lattice_counting(row.r)).abs() < 1e-6);
            assert_eq!(row.det_counting, 0.0);
            // margin is N₃ - T ≈ 1/π plus the lattice sawtooth
            assert!(row.margin.abs() <= row.tol.max(1.0), "{row:?}");
        }
        assert!(rep.verdict.passed());
    }

    #[test]
    fn constant_map_is_refused() {
        let f = map(&["1", "2"]);
        let sys = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]], 1);
        let grid = RGrid::geometric(2.0, 10.0, 4, 128).unwrap();
        assert!(matches!(smt_margin(&f, &sys, &grid), Err(SmtError::Degenerate("C(f)"))));
        // periodic with period c: degenerate over periodic functions but not over ℂ
        let per = map(&["1", "exp(2*pi*i*z)"]);
        assert!(matches!(smt_margin(&per, &sys, &grid), Err(SmtError::Degenerate(_))));
    }

    #[test]
    fn hypotheses_are_enforced() {
        let f = map(&["1", "exp(z)"]);
        let grid = RGrid::geometric(2.0, 10.0, 4, 128).unwrap();
        let few = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]], 2);
        let err = smt_margin(&f, &few, &grid).unwrap_err();
        assert!(err.to_string().contains("q(>2N-n+1)"));
        let p2 = &fixtures::systems_p2()[0].1;
        assert!(matches!(
            smt_margin(&f, p2, &grid),
            Err(SmtError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn subgeneral_five_points() {
        let f = map(&["1", "exp(z)"]);
        let sys = system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0], &[1.0, 1.0], &[1.0, -2.0]], 2);
        let grid = RGrid::geometric(4.0, 30.0, 6, 512).unwrap();
        let rep = smt_margin(&f, &sys, &grid).unwrap();
        assert_eq!(to_f64(&rep.coefficient), 2.0);
        // zero lattices: 1-e^z at 2πik, 1+e^z at iπ(2k+1), 1-2e^z at -ln 2 + 2πik
        let lattice = |r: f64, re: f64, im0: f64| -> f64 {
            (-200i64..=200)
                .map(|k| Complex64::new(re, im0 + 2.0 * PI * k as f64))
                .filter(|rho| rho.norm() <= r)
                .map(|rho| (r / rho.norm().max(1.0)).ln())
                .sum()
        };
        for row in &rep.rows {
            let r = row.r;
            let want = lattice(r, 0.0, 0.0) + lattice(r, 0.0, PI) + lattice(r, -(2f64.ln()), 0.0);
            assert!(
                (row.counting_sum - want).abs() < 1e-6,
                "{r}: {} vs {want}",
                row.counting_sum
            );
            assert!(row.margin >= 0.0);
        }
    }

    #[test]
    fn wronskian_form_for_the_conic() {
        let f = map(&["1", "z", "z^2"]);
        let (_, sys) = &fixtures::systems_p2()[1];
        let grid = RGrid::geometric(3.0, 30.0, 5, 256).unwrap();
        let rep = chen_margin(&f, sys, &grid).unwrap();
        assert_eq!(rep.coefficient, chen_coefficient(2, 2));
        for row in &rep.rows {
            assert_eq!(row.det_counting, 0.0);
            // each pairing a + bz + cz² has its roots counted by hand
            let mut want = 0.0;
            for h in sys.planes() {
                let c: Vec<f64> = h.coeffs().iter().map(|v| v.re).collect();
                let roots: Vec<Complex64> = if c[2] != 0.0 {
                    let d = Complex64::new(c[1] * c[1] - 4.0 * c[2] * c[0], 0.0).sqrt();
                    vec![(-c[1] + d) / (2.0 * c[2]), (-c[1] - d) / (2.0 * c[2])]
                } else if c[1] != 0.0 {
                    vec![Complex64::new(-c[0] / c[1], 0.0)]
                } else {
                    vec![]
                };
                want += roots.iter().map(|z| (row.r / z.norm().max(1.0)).ln()).sum::<f64>();
            }
            assert!((row.counting_sum - want).abs() < 1e-6);
        }
        assert!(rep.verdict.passed());
        // degenerate over ℂ
        let deg = map(&["1", "z", "1+z"]);
        assert!(matches!(
            chen_margin(&deg, sys, &grid),
            Err(SmtError::Degenerate("W(f)"))
        ));
    }

    #[test]
    fn coefficients_agree_in_general_position() {
        for n in 1..6 {
            assert_eq!(smt_coefficient(n, n), chen_coefficient(n, n));
            for big_n in n..10 {
                assert!(smt_coefficient(n, big_n) >= chen_coefficient(n, big_n));
            }
        }
    }
}
