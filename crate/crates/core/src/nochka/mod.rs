//! Nochka weights for hyperplanes in N-subgeneral position.
//!
//! Only existence is classical; here the defining constraints are solved
//! directly as an exact rational linear program. The verifier re-checks every
//! constraint from scratch, without touching the solver.

mod product;
pub mod simplex;
mod weights;

pub use product::select_product_indices;
pub(crate) use weights::to_f64;
pub use weights::{compute_weights, verify_weights, CheckKind, CheckRecord, NochkaWeights, WeightCertificate};

use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NochkaError {
    #[error("system is not in {big_n}-subgeneral position: planes {witness:?} have rank {rank}")]
    NotSubgeneral {
        big_n: usize,
        witness: Vec<usize>,
        rank: usize,
    },
    #[error("need q(>2N-n+1) hyperplanes, got q = {q} with N = {big_n}, n = {n}")]
    TooFewPlanes { q: usize, big_n: usize, n: usize },
    #[error("weight constraints infeasible; tightest violated constraint: {constraint} (by {violation})")]
    Infeasible { constraint: String, violation: String },
    #[error("no rank-preserving selection satisfies the product inequality for R = {0:?}")]
    NoSelection(Vec<usize>),
    #[error("index set {0:?} is invalid for this system")]
    BadIndexSet(Vec<usize>),
}

/// Renders a rational as `p/q`, always with an explicit denominator.
pub fn fmt_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q` or a bare integer.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p = p.trim().parse().ok()?;
            let q: num_bigint::BigInt = q.trim().parse().ok()?;
            if q == num_bigint::BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}
