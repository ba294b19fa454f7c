//! Built-in mappings and hyperplane systems used by tests, benches and the CLI.

use num_complex::Complex64;
use rand::Rng;

use crate::funcalg::{parse_expr, Expr};
use crate::projgeom::{Hyperplane, HyperplaneSystem, ProjectiveMap};

/// Draws a random system of `q` planes in ℙⁿ that passes the `N`-subgeneral
/// check, or `None` after `attempts` tries.
///
/// Planes are small integer vectors. Some are copies (scaled) of earlier ones
/// and some are drawn from a fixed n-dimensional subspace, so the result
/// usually has genuinely degenerate subsets when `N > n`.
pub fn random_system<R: Rng>(
    rng: &mut R,
    n: usize,
    big_n: usize,
    q: usize,
    attempts: usize,
) -> Option<HyperplaneSystem> {
    let width = n + 1;
    for _ in 0..attempts {
        let basis: Vec<Vec<f64>> = (0..n.max(1)).map(|_| random_row(rng, width)).collect();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(q);
        while rows.len() < q {
            let row = match rng.gen_range(0..3) {
                0 if !rows.is_empty() && big_n > n => {
                    let src = &rows[rng.gen_range(0..rows.len())];
                    let k = [1.0, 2.0, -1.0][rng.gen_range(0..3)];
                    src.iter().map(|x| k * x).collect()
                }
                1 if big_n > n => {
                    let mut v = vec![0.0; width];
                    for b in &basis {
                        let c = rng.gen_range(-2..=2) as f64;
                        for (vi, bi) in v.iter_mut().zip(b) {
                            *vi += c * bi;
                        }
                    }
                    v
                }
                _ => random_row(rng, width),
            };
            if row.iter().any(|&x| x != 0.0) {
                rows.push(row);
            }
        }
        let planes: Vec<Hyperplane> = rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| Hyperplane::real(r, format!("H{i}")).ok())
            .collect();
        if let Ok(sys) = HyperplaneSystem::new(planes, big_n) {
            if sys.check_subgeneral().passed() {
                return Some(sys);
            }
        }
    }
    None
}

fn random_row<R: Rng>(rng: &mut R, width: usize) -> Vec<f64> {
    (0..width).map(|_| rng.gen_range(-3..=3) as f64).collect()
}

fn system(rows: &[&[f64]], big_n: usize) -> HyperplaneSystem {
    let planes = rows
        .iter()
        .enumerate()
        .map(|(i, r)| Hyperplane::real(r, format!("H{i}")).expect("nonzero fixture plane"))
        .collect();
    HyperplaneSystem::new(planes, big_n).expect("valid fixture system")
}

fn map(components: &[&str]) -> ProjectiveMap {
    let comps: Vec<Expr> = components
        .iter()
        .map(|s| parse_expr(s).expect("fixture parses"))
        .collect();
    ProjectiveMap::new(comps, Complex64::new(1.0, 0.0)).expect("fixture map is reduced")
}

/// A named mapping with a short description of its growth.
pub struct MapFixture {
    pub name: &'static str,
    pub map: ProjectiveMap,
}

/// Curves into ℙ¹ used across the batteries.
pub fn curves_p1() -> Vec<MapFixture> {
    vec![
        MapFixture {
            name: "[1, e^z]",
            map: map(&["1", "exp(z)"]),
        },
        MapFixture {
            name: "[1, z]",
            map: map(&["1", "z"]),
        },
        MapFixture {
            name: "[sin z, cos z]",
            map: map(&["sin(z)", "cos(z)"]),
        },
        MapFixture {
            name: "[e^z, e^-z]",
            map: map(&["exp(z)", "exp(-z)"]),
        },
        MapFixture {
            name: "[1, z e^z]",
            map: map(&["1", "z*exp(z)"]),
        },
    ]
}

/// Curves into ℙ².
pub fn curves_p2() -> Vec<MapFixture> {
    vec![
        MapFixture {
            name: "[1, e^z, e^2z]",
            map: map(&["1", "exp(z)", "exp(2*z)"]),
        },
        MapFixture {
            name: "[1, z, z^2]",
            map: map(&["1", "z", "z^2"]),
        },
    ]
}

/// Hyperplane systems in ℙ¹, paired with a label.
pub fn systems_p1() -> Vec<(&'static str, HyperplaneSystem)> {
    vec![
        ("q=3 general", system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0]], 1)),
        (
            "q=4 general",
            system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0], &[1.0, 1.0]], 1),
        ),
        (
            "q=5 N=2 duplicated",
            system(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, -1.0], &[2.0, -2.0], &[1.0, 1.0]], 2),
        ),
    ]
}

/// Hyperplane systems in ℙ².
pub fn systems_p2() -> Vec<(&'static str, HyperplaneSystem)> {
    vec![
        (
            "q=4 general",
            system(
                &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, -1.0, 1.0]],
                2,
            ),
        ),
        (
            "q=5 general",
            system(
                &[
                    &[1.0, 0.0, 0.0],
                    &[0.0, 1.0, 0.0],
                    &[0.0, 0.0, 1.0],
                    &[1.0, -1.0, 1.0],
                    &[1.0, 2.0, -3.0],
                ],
                2,
            ),
        ),
        (
            // planes 0, 1, 2 share the point [0:0:1]
            "q=6 N=3 concurrent",
            system(
                &[
                    &[1.0, 0.0, 0.0],
                    &[0.0, 1.0, 0.0],
                    &[1.0, 1.0, 0.0],
                    &[0.0, 0.0, 1.0],
                    &[1.0, -1.0, 1.0],
                    &[1.0, 2.0, -3.0],
                ],
                3,
            ),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixture_systems_are_certified() {
        for (name, sys) in systems_p1().into_iter().chain(systems_p2()) {
            assert!(sys.check_subgeneral().passed(), "{name}");
        }
        let (_, conc) = &systems_p2()[2];
        assert!(!conc.in_general_position());
        assert_eq!(curves_p1().len() + curves_p2().len(), 7);
    }

    #[test]
    fn random_systems_respect_request() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sys = random_system(&mut rng, 2, 3, 7, 200).unwrap();
        assert_eq!((sys.n(), sys.big_n(), sys.q()), (2, 3, 7));
        assert!(sys.check_subgeneral().passed());
    }
}
