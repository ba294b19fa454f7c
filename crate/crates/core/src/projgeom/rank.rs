use nalgebra::DMatrix;
use num_complex::Complex64;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_REL_TOL: f64 = 1e-9;

/// Numeric rank of the matrix whose rows are `rows`, by SVD thresholding.
pub fn matrix_rank(rows: &[&[Complex64]]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let m = DMatrix::from_fn(rows.len(), first.len(), |i, j| rows[i][j]);
    let sv = m.singular_values();
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_REL_TOL * largest).count()
}
