//! Wronskian and Casorati determinants, and the nondegeneracy tests built on
//! them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::funcalg::{differentiate_n, Eval, EvalResult, Expr, FuncError, Wide};
use crate::projgeom::{GeomError, Hyperplane, ProjectiveMap};
use crate::sampling::zero_test_points;

/// Largest size for which the cofactor expansion is built symbolically.
pub const MAX_SYMBOLIC_SIZE: usize = 6;
/// `|det| < NONDEGENERACY_TOL · Π‖row‖` counts as zero.
pub const NONDEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetError {
    #[error("every sample point is singular for the determinant; test inconclusive")]
    Inconclusive,
    #[error("matrix must be {expected}x{expected}")]
    Shape { expected: usize },
    #[error("transformation matrix is singular")]
    SingularTransform,
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Func(#[from] FuncError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetKind {
    Wronskian,
    Casorati,
}

/// A square matrix of expressions together with its determinant.
#[derive(Clone, Debug)]
pub struct DeterminantExpr {
    matrix: Vec<Vec<Expr>>,
    expanded: Option<Expr>,
    kind: DetKind,
    offset: Complex64,
}

fn cofactor(matrix: &[Vec<Expr>], rows: &[usize], cols: &[usize]) -> Expr {
    if rows.len() == 1 {
        return matrix[rows[0]][cols[0]].clone();
    }
    let mut acc = Expr::zero();
    for (k, &c) in cols.iter().enumerate() {
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = &matrix[rows[0]][c] * &cofactor(matrix, &rows[1..], &rest);
        acc = if k % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Determinant by partial pivoting in log-polar arithmetic.
pub(crate) fn wide_det(mut a: Vec<Vec<Wide>>) -> Wide {
    let n = a.len();
    let mut det = Wide::ONE;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].ln_abs().total_cmp(&a[j][col].ln_abs()))
            .unwrap_or(col);
        if a[pivot][col].is_zero() {
            return Wide::ZERO;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det = det * p;
        for i in col + 1..n {
            let f = a[i][col] / p;
            if f.is_zero() {
                continue;
            }
            for j in col..n {
                let v = a[col][j];
                a[i][j] = a[i][j] - f * v;
            }
        }
    }
    det
}

impl DeterminantExpr {
    fn build(matrix: Vec<Vec<Expr>>, kind: DetKind, offset: Complex64) -> Self {
        let n = matrix.len();
        let expanded = (n <= MAX_SYMBOLIC_SIZE).then(|| {
            let idx: Vec<usize> = (0..n).collect();
            cofactor(&matrix, &idx, &idx)
        });
        DeterminantExpr {
            matrix,
            expanded,
            kind,
            offset,
        }
    }

    pub fn matrix(&self) -> &[Vec<Expr>] {
        &self.matrix
    }

    /// The cofactor expansion, when the size allows one.
    pub fn expanded(&self) -> Option<&Expr> {
        self.expanded.as_ref()
    }

    pub fn kind(&self) -> DetKind {
        self.kind
    }

    pub fn offset(&self) -> Complex64 {
        self.offset
    }

    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    /// Entries at `z`, or `None` if any entry is singular there.
    pub fn eval_matrix(&self, z: Complex64) -> Option<Vec<Vec<Wide>>> {
        self.matrix
            .iter()
            .map(|row| row.iter().map(|e| e.eval_wide(z).value()).collect::<Option<Vec<_>>>())
            .collect()
    }

    /// Determinant at `z` by elimination on the evaluated entries.
    pub fn eval_numeric(&self, z: Complex64) -> Option<Wide> {
        self.eval_matrix(z).map(wide_det)
    }

    pub fn eval_wide(&self, z: Complex64) -> Eval<Wide> {
        match &self.expanded {
            Some(e) => e.eval_wide(z),
            None => match self.eval_numeric(z) {
                Some(w) => Eval::Value(w),
                None => Eval::Indeterminate { overflow: false },
            },
        }
    }

    pub fn eval(&self, z: Complex64) -> EvalResult {
        match self.eval_wide(z) {
            Eval::Value(w) => match w.to_complex() {
                Some(v) => Eval::Value(v),
                None => Eval::Indeterminate { overflow: true },
            },
            Eval::Pole => Eval::Pole,
            Eval::Indeterminate { overflow } => Eval::Indeterminate { overflow },
        }
    }

    /// `ln Π_k ‖row_k‖` at `z`: the Hadamard bound for `|det|`.
    pub fn ln_scale(&self, z: Complex64) -> Option<f64> {
        let m = self.eval_matrix(z)?;
        Some(m.iter().map(|row| crate::nevanlinna::ln_norm(row)).sum())
    }
}

/// `C(f₀, …, f_n)`: row `k` holds the components shifted by `k·c`.
pub fn casorati(components: &[Expr], c: Complex64) -> DeterminantExpr {
    let matrix = (0..components.len())
        .map(|k| components.iter().map(|e| e.shift(c * k as f64)).collect())
        .collect();
    DeterminantExpr::build(matrix, DetKind::Casorati, c)
}

/// Casorati determinant of `((f, H_j), j ∈ R)` with the indices taken in
/// increasing order.
pub fn casorati_of_intersections(
    f: &ProjectiveMap,
    planes: &[Hyperplane],
    r: &[usize],
) -> Result<DeterminantExpr, DetError> {
    let mut idx = r.to_vec();
    idx.sort_unstable();
    let comps = idx
        .iter()
        .map(|&j| f.intersect(&planes[j]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(casorati(&comps, f.shift_offset()))
}

/// `W(f₀, …, f_n)`: row `k` holds the `k`-th derivatives.
pub fn wronskian(components: &[Expr]) -> DeterminantExpr {
    let matrix = (0..components.len())
        .map(|k| components.iter().map(|e| differentiate_n(e, k)).collect())
        .collect();
    DeterminantExpr::build(matrix, DetKind::Wronskian, Complex64::new(0.0, 0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Degeneracy {
    /// `witness` is the sample point where `|det|/scale` was largest.
    Nondegenerate { witness: Complex64, relative: f64 },
    /// The determinant was negligible at every regular sample point.
    Degenerate { witnesses: Vec<Complex64> },
}

impl Degeneracy {
    pub fn is_nondegenerate(&self) -> bool {
        matches!(self, Degeneracy::Nondegenerate { .. })
    }
}

/// Sampling test for `det ≢ 0`, relative to the Hadamard bound at each point.
pub fn test_nonvanishing(det: &DeterminantExpr) -> Result<Degeneracy, DetError> {
    let mut best: Option<(Complex64, f64)> = None;
    let mut witnesses = Vec::new();
    for z in zero_test_points() {
        let (Eval::Value(v), Some(scale)) = (det.eval_wide(z), det.ln_scale(z)) else {
            continue;
        };
        if !scale.is_finite() {
            // an all-zero row: the determinant vanishes here
            witnesses.push(z);
            continue;
        }
        let rel = (v.ln_abs() - scale).exp();
        if best.map_or(true, |(_, b)| rel > b) {
            best = Some((z, rel));
        }
        witnesses.push(z);
    }
    match best {
        Some((witness, relative)) if relative >= NONDEGENERACY_TOL => {
            Ok(Degeneracy::Nondegenerate { witness, relative })
        }
        _ if witnesses.is_empty() => Err(DetError::Inconclusive),
        _ => Ok(Degeneracy::Degenerate { witnesses }),
    }
}

/// Linear nondegeneracy over the field of `c`-periodic functions, via `C(f) ≢ 0`.
pub fn nondegenerate_over_periodic(f: &ProjectiveMap) -> Result<Degeneracy, DetError> {
    test_nonvanishing(&casorati(f.components(), f.shift_offset()))
}

/// Linear nondegeneracy over ℂ, via `W(f) ≢ 0`.
pub fn nondegenerate_over_constants(f: &ProjectiveMap) -> Result<Degeneracy, DetError> {
    test_nonvanishing(&wronskian(f.components()))
}

/// `max_z |C(fB) - C(f)·det B| / Π‖rows of the fB matrix‖` over the sample points.
pub fn matrix_transform_check(f: &ProjectiveMap, b: &[Vec<Complex64>]) -> Result<f64, DetError> {
    let n = f.components().len();
    if b.len() != n || b.iter().any(|row| row.len() != n) {
        return Err(DetError::Shape { expected: n });
    }
    let bm = DMatrix::from_fn(n, n, |i, j| b[i][j]);
    let det_b = bm.determinant();
    if det_b.norm() == 0.0 {
        return Err(DetError::SingularTransform);
    }
    // (fB)_j = Σ_i f_i B_ij
    let transformed: Vec<Expr> = (0..n)
        .map(|j| {
            f.components()
                .iter()
                .enumerate()
                .fold(Expr::zero(), |acc, (i, fi)| acc + fi.clone() * b[i][j])
        })
        .collect();
    let c = f.shift_offset();
    let lhs = casorati(&transformed, c);
    let rhs = casorati(f.components(), c);
    let det_b = Wide::from_complex(det_b);
    let mut worst: Option<f64> = None;
    for z in zero_test_points() {
        let (Eval::Value(l), Eval::Value(r), Some(scale)) = (lhs.eval_wide(z), rhs.eval_wide(z), lhs.ln_scale(z))
        else {
            continue;
        };
        let diff = l - r * det_b;
        let res = if diff.is_zero() {
            0.0
        } else {
            (diff.ln_abs() - scale).exp()
        };
        worst = Some(worst.map_or(res, |w: f64| w.max(res)));
    }
    worst.ok_or(DetError::Inconclusive)
}
