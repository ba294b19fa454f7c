//! Second main theorem margins, defects, Borel partitions and the
//! Picard-type dimension arithmetic.

mod defects;
mod dimension;
mod margin;
mod partition;
mod pointwise;

pub use defects::{defects, defects_with, DefectReport};
pub use dimension::{admissible_p_max, dimension_from_classes, picard_dimension_bound, uniqueness_threshold};
pub use margin::{
    chen_coefficient, chen_margin, chen_margin_with, smt_coefficient, smt_margin, smt_margin_with, SmtForm, SmtReport,
    SmtRow,
};
pub use partition::{borel_partition, PairResidual, PartitionReport, PERIODICITY_TOL};
pub use pointwise::{pointwise_lemma35_check, Decomposition, PointwiseReport, PointwiseSample};

use thiserror::Error;

use crate::determinants::DetError;
use crate::funcalg::FuncError;
use crate::nevanlinna::NevError;
use crate::nochka::NochkaError;
use crate::projgeom::GeomError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmtError {
    #[error("hyperplanes are not in {big_n}-subgeneral position: planes {witness:?} have rank {rank}")]
    Position {
        big_n: usize,
        witness: Vec<usize>,
        rank: usize,
    },
    #[error("hypothesis q(>2N-n+1) fails: q = {q}, 2N-n+1 = {bound}")]
    TooFewPlanes { q: usize, bound: i64 },
    #[error("mapping has dimension {map} but the hyperplanes live in dimension {planes}")]
    DimensionMismatch { map: usize, planes: usize },
    #[error("{0} ≡ 0 at every sample: the components are linearly dependent (Casorati criterion), refusing")]
    Degenerate(&'static str),
    #[error("estimated hyperorder {0:.3} is not below 1")]
    Hyperorder(f64),
    #[error("determinant of size {0} has no symbolic expansion; its zeros cannot be counted")]
    DeterminantTooLarge(usize),
    #[error("defect undefined: {0}")]
    UndefinedDefect(String),
    #[error("no admissible (S, R, R°) decomposition at z = {0}")]
    NoDecomposition(String),
    #[error("Nochka weights failed verification: {0}")]
    Weights(String),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("expression {0} is identically zero")]
    ZeroFunction(usize),
    #[error(transparent)]
    Nev(#[from] NevError),
    #[error(transparent)]
    Det(#[from] DetError),
    #[error(transparent)]
    Nochka(#[from] NochkaError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// Numerical budgets shared by the margin and defect checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `tol_err(r) = relative·max(1, T(r)) + quadrature estimate`
    pub relative: f64,
    /// Largest admissible fraction of exceptional radii.
    pub exceptional_fraction: f64,
    /// Allowed overshoot of `δ` outside `[0, 1]`.
    pub defect_bound: f64,
    /// Allowed negative slack in the defect relation.
    pub relation_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            relative: 0.05,
            exceptional_fraction: 0.10,
            defect_bound: 0.02,
            relation_slack: 0.05,
        }
    }
}

impl Tolerances {
    pub fn strict() -> Self {
        Tolerances {
            relative: 0.02,
            exceptional_fraction: 0.05,
            defect_bound: 0.01,
            relation_slack: 0.02,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}
