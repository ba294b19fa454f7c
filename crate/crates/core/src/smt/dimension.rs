use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::SmtError;
use crate::nochka::simplex::{q as rat, qi};

/// `N/(N-n+1) + N - n`, above which shift-invariant preimages force `f(z) = f(z+c)`.
pub fn uniqueness_threshold(n: usize, big_n: usize) -> Result<BigRational, SmtError> {
    if n == 0 || big_n < n {
        return Err(SmtError::Range(format!("need 1 <= n <= N, got n = {n}, N = {big_n}")));
    }
    Ok(rat(big_n as i64, (big_n - n + 1) as i64) + qi(big_n as i64 - n as i64))
}

/// `⌊N/(N-n+1) + N - n + 1⌋`, the top of the stated range for `p`. Larger `p`
/// is still accepted by [`picard_dimension_bound`]; the bound is then 0.
pub fn admissible_p_max(n: usize, big_n: usize) -> Result<usize, SmtError> {
    let t = uniqueness_threshold(n, big_n)? + qi(1);
    Ok(t.floor().to_integer().to_usize().expect("threshold is positive"))
}

/// `⌊N/(n+p-N) - N + n⌋`, clamped at 0, for `n + p` hyperplanes in
/// `N`-subgeneral position with shift-invariant preimages.
pub fn picard_dimension_bound(n: usize, p: usize, big_n: usize) -> Result<usize, SmtError> {
    if p == 0 || big_n < n || big_n >= n + p {
        return Err(SmtError::Range(format!(
            "need p >= 1 and n <= N < n+p, got n = {n}, p = {p}, N = {big_n}"
        )));
    }
    let raw = (big_n / (n + p - big_n)) as i64 + n as i64 - big_n as i64;
    let bound = raw.max(0) as usize;
    if qi(p as i64) > uniqueness_threshold(n, big_n)? {
        assert_eq!(bound, 0, "bound must vanish above the uniqueness threshold");
    }
    Ok(bound)
}

/// Dimension left after the `N + 1 - l` independent relations produced by `l`
/// classes: `n - (N + 1 - l)`.
pub fn dimension_from_classes(n: usize, big_n: usize, classes: usize) -> i64 {
    n as i64 - (big_n as i64 + 1 - classes as i64)
}
