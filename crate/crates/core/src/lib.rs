//! Numerical laboratory for difference Nevanlinna theory.
//!
//! Holomorphic curves `f = [f₀ : … : f_n]` from ℂ into ℙⁿ(ℂ) are built from
//! closed-form expressions ([`funcalg`]); hyperplane systems in N-subgeneral
//! position and their Nochka weights live in [`projgeom`] and [`nochka`];
//! characteristic, counting and proximity functions are in [`nevanlinna`];
//! Casorati and Wronskian determinants in [`determinants`]; and [`smt`]
//! assembles the second main theorem margins, defect relations, Borel
//! partitions and Picard-type dimension bounds.

pub mod determinants;
pub mod fixtures;
pub mod funcalg;
pub mod nevanlinna;
pub mod nochka;
pub mod projgeom;
pub mod sampling;
pub mod smt;

pub use funcalg::{parse_complex, parse_expr, Eval, EvalResult, Expr, Wide};
pub use num_complex::Complex64;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
