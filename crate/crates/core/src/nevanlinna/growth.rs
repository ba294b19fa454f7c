use num_complex::Complex64;
use rayon::prelude::*;

use super::quadrature::{log_plus, proximity, tchar};
use super::zeros::{counting_from_divisor, locate_zeros};
use super::{NevError, RGrid};
use crate::projgeom::{Hyperplane, ProjectiveMap};

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthMeta {
    pub n: usize,
    pub big_n: usize,
    pub q: usize,
    pub c: Complex64,
    pub plane_labels: Vec<String>,
    pub quadrature_points: usize,
}

/// Values at one radius. `proximity[j]` and `counting[j]` refer to plane `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub r: f64,
    pub t: f64,
    pub proximity: Vec<f64>,
    pub counting: Vec<f64>,
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthTable {
    pub meta: GrowthMeta,
    pub rows: Vec<GrowthRow>,
}

impl GrowthTable {
    pub fn radii(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.r).collect()
    }

    pub fn t_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// First-main-theorem residual `T - N_j - m_j` for plane `j`, per radius.
    pub fn fmt_residual(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.t - r.counting[j] - r.proximity[j]).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.rows.iter().all(|r| {
            r.t.is_finite()
                && r.proximity.iter().all(|v| v.is_finite())
                && r.counting.iter().all(|v| v.is_finite())
                && r.margin.map_or(true, f64::is_finite)
        })
    }
}

/// `T_f`, `m_{f,H_j}` and `N(r, ν⁰_{(f,H_j)})` on every radius of the grid.
///
/// Zeros of each `(f, H_j)` are localized once at the largest radius and the
/// counting function is evaluated from that divisor.
pub fn growth_table(
    f: &ProjectiveMap,
    planes: &[Hyperplane],
    big_n: usize,
    grid: &RGrid,
) -> Result<GrowthTable, NevError> {
    let k = grid.quadrature_points();
    let divisors = planes
        .par_iter()
        .map(|h| locate_zeros(&f.intersect(h)?, grid.r_max()))
        .collect::<Result<Vec<_>, NevError>>()?;
    let rows = grid
        .radii()
        .par_iter()
        .map(|&r| {
            let t = tchar(f, r, k)?;
            let proximity = planes
                .iter()
                .map(|h| proximity(f, h, r, k))
                .collect::<Result<Vec<_>, _>>()?;
            let counting = divisors.iter().map(|d| counting_from_divisor(d, r)).collect();
            Ok(GrowthRow {
                r,
                t,
                proximity,
                counting,
                margin: None,
            })
        })
        .collect::<Result<Vec<_>, NevError>>()?;
    Ok(GrowthTable {
        meta: GrowthMeta {
            n: f.dim(),
            big_n,
            q: planes.len(),
            c: f.shift_offset(),
            plane_labels: planes.iter().map(|h| h.label().to_string()).collect(),
            quadrature_points: k,
        },
        rows,
    })
}

/// Least-squares slopes on the upper half of a radius grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderEstimate {
    /// slope of `log⁺ T` against `log r`
    pub order: f64,
    /// slope of `log⁺ log⁺ T` against `log r`
    pub hyperorder: f64,
    /// root-mean-square residuals of the two fits
    pub order_residual: f64,
    pub hyperorder_residual: f64,
}

fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}

/// Order and hyperorder estimates from `(r, T(r))` samples.
pub fn order_from_series(radii: &[f64], t: &[f64]) -> Result<OrderEstimate, NevError> {
    if radii.len() != t.len() || radii.len() < 8 {
        return Err(NevError::UndefinedEstimate("need at least 8 radii".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
        return Err(NevError::UndefinedEstimate(
            "radii must be positive and increasing".into(),
        ));
    }
    if radii[radii.len() - 1] / radii[0] < 100.0 {
        return Err(NevError::UndefinedEstimate(
            "radii must span at least two decades".into(),
        ));
    }
    let start = radii.len() / 2;
    let (rs, ts) = (&radii[start..], &t[start..]);
    if ts.iter().any(|&v| !(v > 0.0)) {
        return Err(NevError::UndefinedEstimate(
            "T(r) <= 0 on the upper half of the grid".into(),
        ));
    }
    let x: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let y1: Vec<f64> = ts.iter().map(|&v| log_plus(v)).collect();
    let y2: Vec<f64> = y1.iter().map(|&v| log_plus(v)).collect();
    let (order, order_residual) = fit_slope(&x, &y1);
    let (hyperorder, hyperorder_residual) = fit_slope(&x, &y2);
    Ok(OrderEstimate {
        order,
        hyperorder,
        order_residual,
        hyperorder_residual,
    })
}

pub fn order_estimates(table: &GrowthTable) -> Result<OrderEstimate, NevError> {
    order_from_series(&table.radii(), &table.t_values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::funcalg::parse_expr;

    fn map(src: &[&str]) -> ProjectiveMap {
        ProjectiveMap::new(
            src.iter().map(|s| parse_expr(s).unwrap()).collect(),
            Complex64::new(1.0, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn synthetic_series() {
        let radii: Vec<f64> = (0..16).map(|i| 10f64.powf(1.0 + 0.25 * i as f64)).collect();
        let t: Vec<f64> = radii.iter().map(|r| r.sqrt().exp()).collect();
        let est = order_from_series(&radii, &t).unwrap();
        assert!((est.hyperorder - 0.5).abs() < 0.02);
        let bad = vec![0.0; 16];
        assert!(order_from_series(&radii, &bad).is_err());
        assert!(order_from_series(&radii[..4], &t[..4]).is_err());
    }

    #[test]
    fn orders_of_basic_maps() {
        let grid = RGrid::geometric(10.0, 1e15, 16, 256).unwrap();
        let t_of = |f: &ProjectiveMap| {
            grid.radii()
                .iter()
                .map(|&r| tchar(f, r, 256).unwrap())
                .collect::<Vec<_>>()
        };
        let ex = map(&["1", "exp(z)"]);
        let est = order_from_series(grid.radii(), &t_of(&ex)).unwrap();
        assert!((est.order - 1.0).abs() < 0.05, "{est:?}");
        assert!(est.hyperorder.abs() < 0.05, "{est:?}");
        let lin = map(&["1", "z"]);
        let est = order_from_series(grid.radii(), &t_of(&lin)).unwrap();
        assert!(est.order.abs() < 0.1 && est.hyperorder.abs() < 0.05, "{est:?}");
    }

    #[test]
    fn table_holds_first_main_theorem() {
        let grid = RGrid::geometric(2.0, 20.0, 8, 512).unwrap();
        let f = &fixtures::curves_p1()[0].map;
        let (_, sys) = &fixtures::systems_p1()[1];
        let table = growth_table(f, sys.planes(), 1, &grid).unwrap();
        assert!(table.all_finite());
        let scale = table.rows.last().unwrap().t.max(1.0);
        for j in 0..sys.q() {
            let res = table.fmt_residual(j);
            let spread = res.iter().cloned().fold(f64::MIN, f64::max) - res.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread <= 0.05 * scale, "plane {j}: {res:?}");
        }
    }
}
