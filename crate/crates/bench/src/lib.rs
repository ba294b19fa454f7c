//! Benchmark fixtures shared by the criterion targets.

use nevlab::nevanlinna::RGrid;
use nevlab::projgeom::{Hyperplane, HyperplaneSystem, ProjectiveMap};
use nevlab::{parse_expr, Complex64, Expr};

pub fn expr(src: &str) -> Expr {
    parse_expr(src).unwrap_or_else(|e| panic!("fixture `{src}`: {e}"))
}

/// `[1, e^z, e^{2z}]` with shift offset 1.
pub fn exponential_curve() -> ProjectiveMap {
    ProjectiveMap::new(
        vec![expr("1"), expr("exp(z)"), expr("exp(2*z)")],
        Complex64::new(1.0, 0.0),
    )
    .expect("reduced")
}

/// `[1, e^z]` with shift offset 1.
pub fn exponential_line() -> ProjectiveMap {
    ProjectiveMap::new(vec![expr("1"), expr("exp(z)")], Complex64::new(1.0, 0.0)).expect("reduced")
}

/// Five lines of ℙ² in general position.
pub fn five_lines() -> HyperplaneSystem {
    let rows: [[f64; 3]; 5] = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [1.0, 2.0, 3.0],
    ];
    let planes = rows
        .iter()
        .enumerate()
        .map(|(i, r)| Hyperplane::real(r, format!("L{i}")).expect("nonzero"))
        .collect();
    HyperplaneSystem::new(planes, 2).expect("valid counts")
}

/// `q` points of ℙ¹ at `1, 2, …` on the affine line, 2-subgeneral.
pub fn points_p1(q: usize) -> HyperplaneSystem {
    let planes = (0..q)
        .map(|j| Hyperplane::real(&[j as f64 + 1.0, -1.0], format!("p{j}")).expect("nonzero"))
        .collect();
    HyperplaneSystem::new(planes, 2).expect("valid counts")
}

pub fn grid(count: usize, k: usize) -> RGrid {
    RGrid::geometric(5.0, 40.0, count, k).expect("valid grid")
}
